"""Self-contained dense LP solver: two-phase primal simplex with Bland's rule.

The group-assignment pipelines only need small/medium minimization LPs with
nonnegative variables, so a deterministic dense tableau implementation is
preferred over an external solver.  Bland's pivoting rule guarantees
termination; determinism means identical inputs give bit-identical outputs.

Tolerances: pivots below PIVOT_TOL are treated as zero, and returned points
satisfy every constraint to within FEAS_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7

LESS_EQUAL = "<="
EQUAL = "="
GREATER_EQUAL = ">="
_RELATIONS = (LESS_EQUAL, EQUAL, GREATER_EQUAL)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(ValueError):
    """Raised for malformed programs (dimension mismatch, bad relation)."""


@dataclass
class LinearProgram:
    """min objective . x  s.t.  rows, x >= 0.

    Each constraint is (coefficients, relation, bound) with relation one of
    "<=", "=", ">=".  ``names`` optionally labels variables for debugging
    and extraction.
    """

    n_vars: int
    objective: np.ndarray
    constraints: list[tuple[np.ndarray, str, float]] = field(default_factory=list)
    names: list[str] | None = None

    def add(self, coeffs, relation: str, bound: float) -> None:
        row = np.asarray(coeffs, dtype=float)
        if row.shape != (self.n_vars,):
            raise LpError(f"constraint has {row.shape[0]} coefficients, expected {self.n_vars}")
        if relation not in _RELATIONS:
            raise LpError(f"unknown relation {relation!r}")
        self.constraints.append((row, relation, float(bound)))

    def check(self) -> None:
        obj = np.asarray(self.objective, dtype=float)
        if obj.shape != (self.n_vars,):
            raise LpError(f"objective has {obj.shape[0]} coefficients, expected {self.n_vars}")
        if not np.all(np.isfinite(obj)):
            raise LpError("objective has non-finite entries")
        for k, (row, _, bound) in enumerate(self.constraints):
            if row.shape != (self.n_vars,):
                raise LpError(f"constraint {k} has wrong arity")
            if not (np.all(np.isfinite(row)) and np.isfinite(bound)):
                raise LpError(f"constraint {k} has non-finite entries")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def residuals(lp: LinearProgram, x: np.ndarray) -> np.ndarray:
    """Constraint violations of x, nonpositive entries meaning satisfied."""
    out = np.empty(len(lp.constraints))
    for k, (row, rel, bound) in enumerate(lp.constraints):
        lhs = float(row @ x)
        if rel == LESS_EQUAL:
            out[k] = lhs - bound
        elif rel == GREATER_EQUAL:
            out[k] = bound - lhs
        else:
            out[k] = abs(lhs - bound)
    return out


def is_feasible(lp: LinearProgram, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
    if np.any(x < -tol):
        return False
    return bool(np.all(residuals(lp, x) <= tol))


def _bland_entering(cost_row: np.ndarray, ncols: int) -> int:
    neg = np.nonzero(cost_row[:ncols] < -PIVOT_TOL)[0]
    return int(neg[0]) if neg.size else -1


def _bland_leaving(tableau: np.ndarray, basis: list[int], col: int) -> int:
    nrows = tableau.shape[0] - 1
    column = tableau[:nrows, col]
    rhs = tableau[:nrows, -1]
    best_row, best_ratio = -1, np.inf
    for i in range(nrows):
        a = column[i]
        if a > PIVOT_TOL:
            ratio = rhs[i] / a
            if ratio < best_ratio - 1e-12 or (
                abs(ratio - best_ratio) <= 1e-12 and (best_row < 0 or basis[i] < basis[best_row])
            ):
                best_ratio = ratio
                best_row = i
    return best_row


def _pivot(tableau: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tableau[row, :] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row, :])
    basis[row] = col


def _run_simplex(tableau: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> str:
    for _ in range(max_iter):
        col = _bland_entering(tableau[-1, :], ncols)
        if col < 0:
            return OPTIMAL
        row = _bland_leaving(tableau, basis, col)
        if row < 0:
            return UNBOUNDED
        _pivot(tableau, basis, row, col)
    raise LpError("simplex iteration limit exceeded")


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve min c.x subject to lp's constraints and x >= 0.

    Returns an optimal solution, or a bare infeasible/unbounded status.
    """
    lp.check()
    n = lp.n_vars
    rows = len(lp.constraints)
    if rows == 0:
        # Nothing binds beyond x >= 0; bounded iff no negative objective entry.
        if np.any(np.asarray(lp.objective) < 0):
            return LpSolution(UNBOUNDED)
        return LpSolution(OPTIMAL, np.zeros(n), 0.0)

    # Canonicalize to b >= 0.
    A = np.zeros((rows, n))
    b = np.zeros(rows)
    rels: list[str] = []
    for i, (row, rel, bound) in enumerate(lp.constraints):
        if bound < 0:
            row, bound = -row, -bound
            rel = {LESS_EQUAL: GREATER_EQUAL, GREATER_EQUAL: LESS_EQUAL, EQUAL: EQUAL}[rel]
        A[i] = row
        b[i] = bound
        rels.append(rel)

    n_slack = sum(1 for r in rels if r == LESS_EQUAL)
    n_surplus = sum(1 for r in rels if r == GREATER_EQUAL)
    n_art = sum(1 for r in rels if r in (GREATER_EQUAL, EQUAL))
    slack0, surplus0, art0 = n, n + n_slack, n + n_slack + n_surplus
    total = art0 + n_art

    tableau = np.zeros((rows + 1, total + 1))
    tableau[:rows, :n] = A
    tableau[:rows, -1] = b
    basis: list[int] = []
    si = ti = ai = 0
    for i, rel in enumerate(rels):
        if rel == LESS_EQUAL:
            tableau[i, slack0 + si] = 1.0
            basis.append(slack0 + si)
            si += 1
        elif rel == GREATER_EQUAL:
            tableau[i, surplus0 + ti] = -1.0
            tableau[i, art0 + ai] = 1.0
            basis.append(art0 + ai)
            ti += 1
            ai += 1
        else:
            tableau[i, art0 + ai] = 1.0
            basis.append(art0 + ai)
            ai += 1

    max_iter = 2000 + 200 * (rows + total)

    # Phase 1: minimize the artificial sum.  Artificials that leave the basis
    # are never allowed back in, so entering candidates stop at art0.
    phase1 = np.zeros(total + 1)
    phase1[art0:art0 + n_art] = 1.0
    for i, bv in enumerate(basis):
        if bv >= art0:
            phase1 -= tableau[i, :]
    tableau[-1, :] = phase1
    status = _run_simplex(tableau, basis, art0, max_iter)
    if status != OPTIMAL or -tableau[-1, -1] > FEAS_TOL:
        return LpSolution(INFEASIBLE)

    # Drive remaining artificials out of the basis; drop redundant rows.
    keep_rows: list[int] = []
    for i in range(rows):
        if basis[i] >= art0:
            pivot_col = -1
            for j in range(art0):
                if abs(tableau[i, j]) > PIVOT_TOL:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue  # all-zero row: redundant constraint
            _pivot(tableau, basis, i, pivot_col)
        keep_rows.append(i)

    body = tableau[keep_rows, :]
    basis = [basis[i] for i in keep_rows]
    cols = np.ones(total + 1, dtype=bool)
    cols[art0:art0 + n_art] = False
    reduced = np.vstack([body[:, cols], np.zeros((1, int(cols.sum())))])

    # Phase 2 with the real objective expressed in the current basis.  All
    # basis entries now index structural or slack columns (below art0), which
    # keep their positions after the artificial columns are masked out.
    cost = np.zeros(reduced.shape[1])
    cost[:n] = np.asarray(lp.objective, dtype=float)
    reduced[-1, :] = cost
    for i, bv in enumerate(basis):
        if cost[bv] != 0.0:
            reduced[-1, :] -= cost[bv] * reduced[i, :]
    status = _run_simplex(reduced, basis, reduced.shape[1] - 1, max_iter)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED)

    x = np.zeros(reduced.shape[1] - 1)
    for i, bv in enumerate(basis):
        x[bv] = reduced[i, -1]
    solution = np.where(np.abs(x[:n]) < PIVOT_TOL, 0.0, x[:n])
    return LpSolution(OPTIMAL, solution, float(np.asarray(lp.objective) @ solution))


def lp_to_text(lp: LinearProgram) -> str:
    """Dump in a CPLEX-LP-like text format for cross-checking elsewhere."""
    names = lp.names or [f"x{i}" for i in range(lp.n_vars)]

    def expr(coeffs: np.ndarray) -> str:
        terms = [f"{c:+.12g} {names[i]}" for i, c in enumerate(coeffs) if c != 0]
        return " ".join(terms) if terms else "0"

    lines = ["Minimize", f" obj: {expr(np.asarray(lp.objective, dtype=float))}", "Subject To"]
    for k, (row, rel, bound) in enumerate(lp.constraints):
        lines.append(f" c{k}: {expr(row)} {rel} {bound:.12g}")
    lines += ["Bounds"] + [f" 0 <= {nm}" for nm in names] + ["End"]
    return "\n".join(lines) + "\n"
