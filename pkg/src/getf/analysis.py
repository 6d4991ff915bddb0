"""Terminal chains and machine-checked schedule bounds.

A terminal chain walks backwards from a latest-finishing task through
latest-finishing immediate predecessors until it reaches a task with no
predecessor.  Every report here decomposes schedule quantities along such
chains:

  * ``separation_report``: makespan <= P + sum_k D_k + C, where P is the
    chain's processing time, D_k the total demand mapped to band k divided
    by the band's speed, and C the chain's worst-case communication time;
    plus a replay of the per-link idle bound.
  * ``makespan_theorem_report``: P <= 2*gamma*T*, sum D_k <= 2*K*T*, and the
    combined makespan <= 2*(gamma+K)*T* + C, against the fractional optimum.
  * ``identical_report``: the identical-machines decomposition
    makespan <= avg load + ((m-1)/m) * chain processing + C', optionally
    compared against a zero-communication exact optimum.
  * ``weighted_theorem_report``: per-task chain/load bounds against the
    time-indexed fractional optima, the aggregate weighted-completion
    inequality, interval-estimate consistency, and the per-interval
    feasibility substitution.

Reports never raise on a violated inequality; they carry pass flags so a
violation is a loud, inspectable result.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

from .grouping import GroupAssignment, MachineGroups, WeightedFractional, weighted_slice_feasibility
from .model import Instance, TaskGraph
from .scheduler import Schedule, TieBreak, TieChooser

log = logging.getLogger(__name__)

FINISH_TIE_TOL = 1e-9
REL_SLACK_TOL = 1e-6


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class TerminalChain:
    tasks: tuple[int, ...]

    @property
    def anchor(self) -> int:
        return self.tasks[-1]

    def links(self) -> list[tuple[int, int]]:
        return list(zip(self.tasks, self.tasks[1:]))


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.slack >= -REL_SLACK_TOL * max(1.0, abs(self.rhs))


@dataclass
class BoundReport:
    kind: str
    objective: float
    context: dict[str, object] = field(default_factory=dict)
    inequalities: list[Inequality] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(iq.passed for iq in self.inequalities)

    def failing(self) -> list[Inequality]:
        return [iq for iq in self.inequalities if not iq.passed]

    def add(self, name: str, lhs: float, rhs: float) -> Inequality:
        iq = Inequality(name, lhs, rhs)
        self.inequalities.append(iq)
        return iq

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "objective": self.objective,
            "passed": self.passed,
            "context": dict(self.context),
            "inequalities": [
                {"name": iq.name, "lhs": iq.lhs, "rhs": iq.rhs,
                 "slack": iq.slack, "pass": iq.passed}
                for iq in self.inequalities
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Chain construction
# ---------------------------------------------------------------------------

def latest_finishing(candidates: list[int], finish: dict[int, float],
                     tol: float = FINISH_TIE_TOL) -> list[int]:
    top = max(finish[j] for j in candidates)
    return sorted(j for j in candidates if finish[j] >= top - tol)


def terminal_chain(s: Schedule, g: TaskGraph, anchor: int | None = None,
                   tie: TieBreak | None = None) -> TerminalChain:
    """Backward walk through latest-finishing immediate predecessors.

    ``anchor`` defaults to a latest-finishing task of the whole schedule;
    finish ties (within 1e-9) are broken by the tie rule.
    """
    if anchor is not None and anchor not in s.assignment:
        raise AnalysisError(f"anchor task {anchor} is not in the schedule")
    chooser = TieChooser(tie or TieBreak.by_index(), g)

    preds = g.predecessors()
    if anchor is None:
        anchor = chooser.choose(latest_finishing(sorted(s.assignment), s.finish))
    chain = [anchor]
    current = anchor
    while preds[current]:
        current = chooser.choose(latest_finishing(preds[current], s.finish))
        chain.append(current)
    chain.reverse()
    return TerminalChain(tuple(chain))


def link_comm_time(inst: Instance, f: GroupAssignment, s: Schedule,
                   src: int, dst: int) -> float:
    """Worst-case transfer time of edge (src, dst): data over the slowest
    communication speed from src's machine into dst's machine group."""
    data = inst.graph.edge_data()[(src, dst)]
    sigma = min(inst.platform.sigma(s.assignment[src], i) for i in f.machines_for(dst))
    return data / sigma


def chain_comm_time(chain: TerminalChain, s: Schedule, f: GroupAssignment,
                    inst: Instance) -> float:
    return sum(link_comm_time(inst, f, s, a, b) for a, b in chain.links())


def _min_cost_chain(g: TaskGraph, finish: dict[int, float], anchors: list[int],
                    link_cost, node_cost) -> tuple[TerminalChain, float]:
    """Cheapest terminal chain over the latest-finishing-predecessor relation.

    cost(j) = node_cost(j) + min over latest-finishing predecessors j' of
    (link_cost(j', j) + cost(j')); the best anchored chain is reconstructed
    deterministically (value ties resolve to the lowest task id).
    """
    preds = g.predecessors()
    cost: dict[int, float] = {}
    back: dict[int, int | None] = {}

    def resolve(j: int) -> float:
        if j in cost:
            return cost[j]
        stack = [j]
        while stack:
            v = stack[-1]
            if v in cost:
                stack.pop()
                continue
            if not preds[v]:
                cost[v] = node_cost(v)
                back[v] = None
                stack.pop()
                continue
            cands = latest_finishing(preds[v], finish)
            missing = [p for p in cands if p not in cost]
            if missing:
                stack.extend(missing)
                continue
            best_p, best_val = None, math.inf
            for p in cands:
                val = cost[p] + link_cost(p, v)
                if val < best_val - 1e-15 or (val <= best_val + 1e-15 and
                                              (best_p is None or p < best_p)):
                    best_p, best_val = p, val
            cost[v] = node_cost(v) + best_val
            back[v] = best_p
            stack.pop()
        return cost[j]

    best_anchor, best_val = None, math.inf
    for a in sorted(anchors):
        val = resolve(a)
        if val < best_val - 1e-15:
            best_anchor, best_val = a, val
    chain = []
    cur: int | None = best_anchor
    while cur is not None:
        chain.append(cur)
        cur = back[cur]
    chain.reverse()
    return TerminalChain(tuple(chain)), best_val


def min_comm_terminal_chain(s: Schedule, inst: Instance, f: GroupAssignment,
                            anchor: int | None = None) -> tuple[TerminalChain, float]:
    """The terminal chain minimizing total communication time, and that time."""
    anchors = [anchor] if anchor is not None else latest_finishing(
        sorted(s.assignment), s.finish
    )
    return _min_cost_chain(
        inst.graph, s.finish, anchors,
        link_cost=lambda a, b: link_comm_time(inst, f, s, a, b),
        node_cost=lambda j: 0.0,
    )


# ---------------------------------------------------------------------------
# Separation decomposition
# ---------------------------------------------------------------------------

def chain_processing_time(chain: TerminalChain, s: Schedule, inst: Instance) -> float:
    return sum(
        inst.graph.tasks[j].demand / inst.platform.speed(s.assignment[j])
        for j in chain.tasks
    )


def group_loads(inst: Instance, f: GroupAssignment, groups: MachineGroups,
                tasks: list[int] | None = None) -> dict[int, float]:
    """D_k: total demand assigned to band k over the band's original speed."""
    task_ids = tasks if tasks is not None else [t.id for t in inst.graph.tasks]
    demand_by_group: dict[int, float] = {k: 0.0 for k in range(1, groups.K + 1)}
    for j in task_ids:
        demand_by_group[f.group_of_task[j]] += inst.graph.tasks[j].demand
    out: dict[int, float] = {}
    for k, total in demand_by_group.items():
        out[k] = total / groups.group_speed[k] if total > 0 else 0.0
    return out


def machine_idle_in_window(s: Schedule, machine: int, lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    busy = 0.0
    for a, b, _ in s.machine_intervals.get(machine, ()):
        busy += max(0.0, min(b, hi) - max(a, lo))
    return (hi - lo) - busy


def idle_bound_replay(chain: TerminalChain, s: Schedule, inst: Instance,
                      f: GroupAssignment, report: BoundReport) -> None:
    """Assert, per chain link and per machine of the successor's group, that
    idle time inside the link window is covered by the link's transfer time."""
    edge_data = inst.graph.edge_data()
    for a, b in chain.links():
        window_lo, window_hi = s.finish[a], s.start[b]
        for i in f.machines_for(b):
            idle = machine_idle_in_window(s, i, window_lo, window_hi)
            bound = edge_data[(a, b)] / inst.platform.sigma(s.assignment[a], i)
            report.add(f"idle[{a}->{b}]@m{i}", idle, bound)


def separation_report(s: Schedule, inst: Instance, f: GroupAssignment,
                      groups: MachineGroups) -> BoundReport:
    """makespan <= P + sum_k D_k + C over the cheapest terminal chain,
    plus the per-link idle replay."""
    chain, comm = min_comm_terminal_chain(s, inst, f)
    proc = chain_processing_time(chain, s, inst)
    loads = group_loads(inst, f, groups)
    total_load = sum(loads.values())
    report = BoundReport(
        kind="separation",
        objective=s.makespan(),
        context={
            "P": proc, "C": comm, "sum_D": total_load,
            "gamma": groups.gamma, "K": float(groups.K),
            **{f"D_{k}": v for k, v in sorted(loads.items())},
        },
    )
    report.context["chain"] = list(chain.tasks)
    report.add("makespan<=P+sumD+C", s.makespan(), proc + total_load + comm)
    idle_bound_replay(chain, s, inst, f, report)
    return report


def makespan_theorem_report(s: Schedule, inst: Instance, f: GroupAssignment,
                            groups: MachineGroups, tstar: float) -> BoundReport:
    """Chain and load bounds against the fractional makespan optimum T*."""
    chain, comm = min_comm_terminal_chain(s, inst, f)
    proc = chain_processing_time(chain, s, inst)
    loads = group_loads(inst, f, groups)
    total_load = sum(loads.values())
    g, K = groups.gamma, groups.K
    report = BoundReport(
        kind="makespan_theorem",
        objective=s.makespan(),
        context={"P": proc, "C": comm, "sum_D": total_load,
                 "gamma": g, "K": float(K), "T*": tstar},
    )
    report.context["chain"] = list(chain.tasks)
    report.add("P<=2*gamma*T*", proc, 2.0 * g * tstar)
    report.add("sumD<=2*K*T*", total_load, 2.0 * K * tstar)
    report.add("makespan<=2*(gamma+K)*T*+C", s.makespan(), 2.0 * (g + K) * tstar + comm)
    return report


# ---------------------------------------------------------------------------
# Identical machines
# ---------------------------------------------------------------------------

def identical_report(s: Schedule, inst: Instance,
                     opt_ignore_comm: float | None = None) -> BoundReport:
    """Decomposition bound for identical-speed machines under ETF.

    Uses the terminal chain minimizing ((m-1)/m) * chain processing + C',
    where a link's C' contribution averages its transfer time over all
    machines.  If ``opt_ignore_comm`` (an exact zero-communication optimum)
    is supplied, also checks makespan <= (2 - 1/m) * opt + C'.
    """
    speeds = {mc.speed for mc in inst.platform.machines}
    if len(speeds) != 1:
        raise AnalysisError("identical_report requires identical machine speeds")
    speed = speeds.pop()
    m = inst.platform.m
    edge_data = inst.graph.edge_data()

    def link_cost(a: int, b: int) -> float:
        src = s.assignment[a]
        return sum(
            edge_data[(a, b)] / inst.platform.sigma(src, i) for i in range(m)
        ) / m

    def node_cost(j: int) -> float:
        return (m - 1) / m * inst.graph.tasks[j].demand / speed

    anchors = latest_finishing(sorted(s.assignment), s.finish)
    chain, weighted_val = _min_cost_chain(inst.graph, s.finish, anchors,
                                          link_cost, node_cost)
    c_prime = sum(link_cost(a, b) for a, b in chain.links())
    chain_proc = chain_processing_time(chain, s, inst)
    avg_load = sum(t.demand for t in inst.graph.tasks) / (m * speed)

    report = BoundReport(
        kind="identical",
        objective=s.makespan(),
        context={"C'": c_prime, "chain_P": chain_proc, "avg_load": avg_load,
                 "m": float(m)},
    )
    report.context["chain"] = list(chain.tasks)
    report.add(
        "makespan<=avg_load+((m-1)/m)*chainP+C'",
        s.makespan(),
        avg_load + (m - 1) / m * chain_proc + c_prime,
    )
    if opt_ignore_comm is not None:
        report.context["OPT_ignore_comm"] = opt_ignore_comm
        report.add(
            "makespan<=(2-1/m)*OPT+C'",
            s.makespan(),
            (2.0 - 1.0 / m) * opt_ignore_comm + c_prime,
        )
    return report


# ---------------------------------------------------------------------------
# Weighted completion time
# ---------------------------------------------------------------------------

def per_task_chain_comm(s: Schedule, inst: Instance,
                        f: GroupAssignment) -> dict[int, float]:
    """C(S, j): cheapest terminal-chain communication time anchored at j in
    the prefix of the schedule up to j's iteration.

    Chains anchored at j only visit ancestors of j, which are always inside
    the prefix, so the values coincide with anchored chains over the full
    schedule.  Logs (debug) whenever j is not the latest finisher of its
    prefix.
    """
    out: dict[int, float] = {}
    running_max = -math.inf
    for j in s.iteration_order:
        _, comm = min_comm_terminal_chain(s, inst, f, anchor=j)
        out[j] = comm
        if s.finish[j] < running_max - FINISH_TIE_TOL:
            log.debug("task %d is not the latest finisher of its prefix "
                      "(finish %.9g < %.9g)", j, s.finish[j], running_max)
        running_max = max(running_max, s.finish[j])
    return out


def weighted_theorem_report(s: Schedule, inst: Instance, f: GroupAssignment,
                            groups: MachineGroups,
                            wsol: WeightedFractional) -> BoundReport:
    """Per-task and aggregate weighted-completion bounds against the
    time-indexed fractional optimum.

    Checks, per task j over its schedule prefix: chain processing plus band
    loads <= 32*(gamma+K)*C*_j, and 2^(q(j)-1) <= 2*C*_j; in aggregate:
    sum_j w_j C_j <= 32*(gamma+K) * sum_j w_j C*_j + sum_j w_j C(S,j); and
    the per-interval feasibility substitution of the collapsed fractions.
    """
    if not wsol.q_of:
        raise AnalysisError("weighted solution must be collapsed first")
    g, K = groups.gamma, groups.K
    factor = 32.0 * (g + K)
    weights = {t.id: t.weight for t in inst.graph.tasks}

    report = BoundReport(
        kind="weighted_theorem",
        objective=s.weighted_completion(inst),
        context={"gamma": g, "K": float(K), "factor": factor,
                 "lp_objective": wsol.objective(weights)},
    )

    prefix_load: dict[int, float] = {k: 0.0 for k in range(1, K + 1)}
    chain_comm: dict[int, float] = {}
    for j in s.iteration_order:
        k = f.group_of_task[j]
        prefix_load[k] += inst.graph.tasks[j].demand
        chain_j, comm_j = min_comm_terminal_chain(s, inst, f, anchor=j)
        chain_comm[j] = comm_j
        proc_j = chain_processing_time(chain_j, s, inst)
        loads_j = sum(
            prefix_load[k] / groups.group_speed[k]
            for k in prefix_load if prefix_load[k] > 0
        )
        report.add(f"P+sumD(task {j})<=32*(gamma+K)*C*", proc_j + loads_j,
                   factor * wsol.C[j])
        report.add(f"2^(q-1)(task {j})<=2*C*", 2.0 ** (wsol.q_of[j] - 1),
                   2.0 * wsol.C[j])

    lhs = s.weighted_completion(inst)
    rhs = factor * wsol.objective(weights) + sum(
        weights[j] * chain_comm[j] for j in chain_comm
    )
    report.add("sum wC<=32*(gamma+K)*sum wC*+sum wC(S,j)", lhs, rhs)

    for q, violation in sorted(weighted_slice_feasibility(inst, groups, wsol).items()):
        report.add(f"interval {q} substitution feasible", violation, 0.0)
    return report
