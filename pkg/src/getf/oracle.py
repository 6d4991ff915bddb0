"""Exact optima and analytic lower bounds for tiny instances.

The brute-force search enumerates every machine assignment and every
topological order, placing tasks greedily at their earliest feasible start
for the fixed (assignment, order) pair.  With a fixed assignment and fixed
per-machine sequencing, delaying any start can never help, so componentwise
minimal starts are optimal and the enumeration is exact.  Intended strictly
for acceptance-test ground truth; the state guard aborts anything larger
than desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Instance, Machine, Platform
from .scheduler import Schedule, comm_delay

MAKESPAN = "makespan"
WEIGHTED = "weighted"


class OracleLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_tasks: int = 7
    max_machines: int = 3
    max_states: int = 100_000_000


def restrict_platform(inst: Instance, machine_ids: tuple[int, ...]) -> tuple[Instance, dict[int, int]]:
    """Sub-instance over a machine subset; returns it plus new->old id map."""
    ordered = sorted(machine_ids)
    machines = tuple(
        Machine(new_id, inst.platform.speed(old)) for new_id, old in enumerate(ordered)
    )
    comm = tuple(
        tuple(inst.platform.sigma(a, b) for b in ordered) for a in ordered
    )
    return Instance(inst.graph, Platform(machines, comm)), dict(enumerate(ordered))


def _count_topological_orders(preds: list[list[int]], limit: int) -> int:
    n = len(preds)
    indeg = [len(p) for p in preds]
    succs: list[list[int]] = [[] for _ in range(n)]
    for j, ps in enumerate(preds):
        for p in ps:
            succs[p].append(j)
    count = 0

    def walk(remaining: int) -> None:
        nonlocal count
        if count > limit:
            return
        if remaining == 0:
            count += 1
            return
        for v in range(n):
            if indeg[v] == 0:
                indeg[v] = -1
                for w in succs[v]:
                    indeg[w] -= 1
                walk(remaining - 1)
                for w in succs[v]:
                    indeg[w] += 1
                indeg[v] = 0

    walk(n)
    return count


def brute_force_schedule(
    inst: Instance,
    ignore_comm: bool = False,
    objective: str = MAKESPAN,
    limits: OracleLimits = OracleLimits(),
) -> tuple[float, Schedule]:
    """Exact optimum over (machine assignment) x (topological order) pairs.

    ``ignore_comm`` zeroes every communication delay, yielding the
    zero-communication optimum the approximation bounds compare against.
    Deterministic: returns the first optimal schedule in enumeration order.
    """
    n = inst.graph.n
    m = inst.platform.m
    if n > limits.max_tasks or m > limits.max_machines:
        raise OracleLimitError(
            f"instance ({n} tasks, {m} machines) exceeds oracle limits "
            f"({limits.max_tasks}, {limits.max_machines})"
        )
    if objective not in (MAKESPAN, WEIGHTED):
        raise ValueError(f"unknown objective {objective!r}")

    preds = inst.graph.predecessors()
    succs = inst.graph.successors()
    edge_data = inst.graph.edge_data()
    demand = [t.demand for t in inst.graph.tasks]
    weight = [t.weight for t in inst.graph.tasks]
    speed = [inst.platform.speed(i) for i in range(m)]

    n_orders = _count_topological_orders(preds, limits.max_states)
    if m ** n * max(1, n_orders) > limits.max_states:
        raise OracleLimitError(
            f"{m ** n} assignments x {n_orders} orders exceeds the state guard"
        )

    def delay(src_task: int, dst_task: int, src_m: int, dst_m: int) -> float:
        if ignore_comm:
            return 0.0
        return comm_delay(inst, edge_data[(src_task, dst_task)], src_m, dst_m)

    best_value = math.inf
    best_assign: list[int] | None = None
    best_order: list[int] | None = None

    assign = [0] * n
    indeg0 = [len(p) for p in preds]

    def place_rest(order: list[int], indeg: list[int], avail: list[float],
                   finish: dict[int, float], partial: float) -> None:
        """DFS over topological completions with branch-and-bound pruning."""
        nonlocal best_value, best_assign, best_order
        if partial >= best_value - 1e-15:
            return
        if len(order) == n:
            if partial < best_value - 1e-15:
                best_value = partial
                best_assign = assign.copy()
                best_order = order.copy()
            return
        for v in range(n):
            if indeg[v] != 0:
                continue
            i = assign[v]
            start = avail[i]
            for p in preds[v]:
                arrival = finish[p] + delay(p, v, assign[p], i)
                if arrival > start:
                    start = arrival
            end = start + demand[v] / speed[i]
            if objective == MAKESPAN:
                new_partial = max(partial, end)
            else:
                new_partial = partial + weight[v] * end
            saved_avail = avail[i]
            avail[i] = end
            finish[v] = end
            indeg[v] = -1
            for w in succs[v]:
                indeg[w] -= 1
            order.append(v)
            place_rest(order, indeg, avail, finish, new_partial)
            order.pop()
            for w in succs[v]:
                indeg[w] += 1
            indeg[v] = 0
            del finish[v]
            avail[i] = saved_avail

    def enumerate_assignments(j: int) -> None:
        if j == n:
            place_rest([], indeg0.copy(), [0.0] * m, {}, 0.0)
            return
        for i in range(m):
            assign[j] = i
            enumerate_assignments(j + 1)

    enumerate_assignments(0)

    if best_assign is None:
        raise OracleLimitError("search finished without a schedule")
    sched = Schedule()
    avail = [0.0] * m
    for v in best_order:
        i = best_assign[v]
        start = avail[i]
        for p in preds[v]:
            arrival = sched.finish[p] + delay(p, v, best_assign[p], i)
            if arrival > start:
                start = arrival
        sched.place(v, i, start, demand[v] / speed[i])
        avail[i] = sched.finish[v]
    return best_value, sched


def lower_bounds(inst: Instance) -> tuple[float, float]:
    """(work bound, chain bound), both valid lower bounds on the
    zero-communication optimal makespan.

    work bound: total demand over total speed; chain bound: the largest
    total demand along any path, run at the fastest speed.
    """
    total_speed = sum(mc.speed for mc in inst.platform.machines)
    s_max = max(mc.speed for mc in inst.platform.machines)
    work = sum(t.demand for t in inst.graph.tasks) / total_speed

    from .model import topological_order

    heaviest = {j: inst.graph.tasks[j].demand for j in range(inst.graph.n)}
    preds = inst.graph.predecessors()
    for j in topological_order(inst.graph):
        if preds[j]:
            heaviest[j] = inst.graph.tasks[j].demand + max(heaviest[p] for p in preds[j])
    chain = max(heaviest.values(), default=0.0) / s_max
    return work, chain
