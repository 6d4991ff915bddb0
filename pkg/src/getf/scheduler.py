"""Greedy schedulers for task DAGs on related machines with comm delays.

Three schedulers share one placement engine:

  * ``getf_schedule``: at every iteration, among tasks whose predecessors
    are all scheduled, pick one achieving the smallest earliest start over
    the machines of its assigned group (task ties broken by rule, machine
    ties by fastest speed then lowest id), and append it there.
  * ``etf_schedule``: the same with the single all-machines group.
  * ``sls_schedule``: a fixed-priority list scheduler that walks a given
    topological order instead of globally minimizing start times (machine
    ties go to the lowest id).

Machines are append-only: a task starts no earlier than the end of the last
interval already placed on its machine, and gaps are never back-filled.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .grouping import GroupAssignment, trivial_assignment
from .model import Instance

START_TIE_TOL = 1e-12


class SchedulingError(ValueError):
    pass


@dataclass(frozen=True)
class TieBreak:
    """Rule for choosing among tasks whose earliest starts tie.

    ``random`` draws are fully determined by the seed; the other variants
    are order statistics over task attributes with lowest-id fallback.
    """

    variant: str
    seed: int = 0

    BY_INDEX = "by-index"
    RANDOM = "random"
    LARGEST_DEMAND = "largest-demand"
    MOST_SUCCESSORS = "most-successors"

    @classmethod
    def by_index(cls) -> "TieBreak":
        return cls(cls.BY_INDEX)

    @classmethod
    def random_rule(cls, seed: int) -> "TieBreak":
        return cls(cls.RANDOM, seed)

    @classmethod
    def largest_demand(cls) -> "TieBreak":
        return cls(cls.LARGEST_DEMAND)

    @classmethod
    def most_successors(cls) -> "TieBreak":
        return cls(cls.MOST_SUCCESSORS)


class TieChooser:
    """Stateful chooser; random variants consume a private seeded stream."""

    def __init__(self, rule: TieBreak, graph):
        self.rule = rule
        self._rng = random.Random(rule.seed) if rule.variant == TieBreak.RANDOM else None
        self._demand = {t.id: t.demand for t in graph.tasks}
        if rule.variant == TieBreak.MOST_SUCCESSORS:
            succs = graph.successors()
            self._out_degree = {j: len(succs[j]) for j in range(graph.n)}

    def choose(self, candidates: list[int]) -> int:
        if len(candidates) == 1:
            return candidates[0]
        ordered = sorted(candidates)
        v = self.rule.variant
        if v == TieBreak.BY_INDEX:
            return ordered[0]
        if v == TieBreak.RANDOM:
            return self._rng.choice(ordered)
        if v == TieBreak.LARGEST_DEMAND:
            return max(ordered, key=lambda j: (self._demand[j], -j))
        if v == TieBreak.MOST_SUCCESSORS:
            return max(ordered, key=lambda j: (self._out_degree[j], -j))
        raise SchedulingError(f"unknown tie-break variant {v!r}")


@dataclass
class Schedule:
    assignment: dict[int, int] = field(default_factory=dict)
    start: dict[int, float] = field(default_factory=dict)
    finish: dict[int, float] = field(default_factory=dict)
    iteration_order: list[int] = field(default_factory=list)
    machine_intervals: dict[int, list[tuple[float, float, int]]] = field(default_factory=dict)

    def is_scheduled(self, task: int) -> bool:
        return task in self.assignment

    def machine_available(self, machine: int) -> float:
        intervals = self.machine_intervals.get(machine)
        return intervals[-1][1] if intervals else 0.0

    def makespan(self) -> float:
        return max(self.finish.values(), default=0.0)

    def weighted_completion(self, inst: Instance) -> float:
        return sum(t.weight * self.finish[t.id] for t in inst.graph.tasks)

    def place(self, task: int, machine: int, start: float, duration: float) -> None:
        end = start + duration
        self.assignment[task] = machine
        self.start[task] = start
        self.finish[task] = end
        self.machine_intervals.setdefault(machine, []).append((start, end, task))
        self.iteration_order.append(task)

    def to_dict(self, inst: Instance) -> dict:
        return {
            "assignments": [
                {
                    "task": j,
                    "machine": self.assignment[j],
                    "start": self.start[j],
                    "end": self.finish[j],
                }
                for j in sorted(self.assignment)
            ],
            "iteration_order": list(self.iteration_order),
            "makespan": self.makespan(),
            "weighted_completion": self.weighted_completion(inst),
        }

    def to_json(self, inst: Instance) -> str:
        return json.dumps(self.to_dict(inst), indent=2) + "\n"


def schedule_from_dict(doc: dict) -> Schedule:
    s = Schedule()
    entries = sorted(doc["assignments"], key=lambda e: float(e["start"]))
    order = doc.get("iteration_order") or [e["task"] for e in entries]
    by_task = {int(e["task"]): e for e in doc["assignments"]}
    for j in order:
        e = by_task[int(j)]
        s.place(int(e["task"]), int(e["machine"]), float(e["start"]),
                float(e["end"]) - float(e["start"]))
    return s


def comm_delay(inst: Instance, data: float, src_machine: int, dst_machine: int) -> float:
    sigma = inst.platform.sigma(src_machine, dst_machine)
    return data / sigma  # data/inf == 0.0, the zero-delay sentinel


def earliest_start(task: int, machine: int, partial: Schedule, inst: Instance,
                   preds: list[list[int]] | None = None,
                   edge_data: dict[tuple[int, int], float] | None = None) -> float:
    """Earliest feasible start of ``task`` on ``machine`` given the partial
    schedule: machine availability vs. every predecessor's data arrival."""
    if preds is None:
        preds = inst.graph.predecessors()
    if edge_data is None:
        edge_data = inst.graph.edge_data()
    t = partial.machine_available(machine)
    for p in preds[task]:
        if not partial.is_scheduled(p):
            raise SchedulingError(f"predecessor {p} of task {task} is not scheduled")
        arrival = partial.finish[p] + comm_delay(
            inst, edge_data[(p, task)], partial.assignment[p], machine
        )
        if arrival > t:
            t = arrival
    return t


def _machine_key(inst: Instance, machine: int, prefer_fast: bool) -> tuple:
    if prefer_fast:
        return (-inst.platform.speed(machine), machine)
    return (machine,)


def _best_placement(task: int, machines: tuple[int, ...], partial: Schedule,
                    inst: Instance, preds, edge_data, prefer_fast: bool) -> tuple[float, int]:
    best_t, best_m = None, None
    for i in machines:
        t = earliest_start(task, i, partial, inst, preds, edge_data)
        if best_t is None or t < best_t - START_TIE_TOL or (
            abs(t - best_t) <= START_TIE_TOL
            and _machine_key(inst, i, prefer_fast) < _machine_key(inst, best_m, prefer_fast)
        ):
            best_t, best_m = t, i
    return best_t, best_m


def getf_schedule(inst: Instance, f: GroupAssignment, tie: TieBreak) -> Schedule:
    """Greedy earliest-start scheduling restricted to per-task machine groups."""
    n = inst.graph.n
    preds = inst.graph.predecessors()
    edge_data = inst.graph.edge_data()
    chooser = TieChooser(tie, inst.graph)
    sched = Schedule()
    remaining = set(range(n))
    n_unscheduled_preds = [len(preds[j]) for j in range(n)]
    succs = inst.graph.successors()
    ready = sorted(j for j in remaining if n_unscheduled_preds[j] == 0)

    while remaining:
        best: dict[int, tuple[float, int]] = {}
        min_t = None
        for j in ready:
            t, mach = _best_placement(
                j, f.machines_for(j), sched, inst, preds, edge_data, prefer_fast=True
            )
            best[j] = (t, mach)
            if min_t is None or t < min_t:
                min_t = t
        tied = [j for j in ready if abs(best[j][0] - min_t) <= START_TIE_TOL]
        j = chooser.choose(tied)
        t, mach = best[j]
        sched.place(j, mach, t, inst.graph.tasks[j].demand / inst.platform.speed(mach))
        remaining.discard(j)
        ready.remove(j)
        for w in succs[j]:
            n_unscheduled_preds[w] -= 1
            if n_unscheduled_preds[w] == 0:
                ready.append(w)
        ready.sort()
    return sched


def etf_schedule(inst: Instance, tie: TieBreak) -> Schedule:
    """GETF with the single all-machines group."""
    return getf_schedule(inst, trivial_assignment(inst), tie)


def sls_schedule(inst: Instance, f: GroupAssignment, priority: list[int]) -> Schedule:
    """Fixed-priority list scheduling within the assigned machine groups."""
    n = inst.graph.n
    if sorted(priority) != list(range(n)):
        raise SchedulingError("priority must enumerate every task exactly once")
    position = {j: k for k, j in enumerate(priority)}
    for e in inst.graph.edges:
        if position[e.src] > position[e.dst]:
            raise SchedulingError(
                f"priority is not topological: task {e.dst} precedes its predecessor {e.src}"
            )
    preds = inst.graph.predecessors()
    edge_data = inst.graph.edge_data()
    sched = Schedule()
    for j in priority:
        t, mach = _best_placement(
            j, f.machines_for(j), sched, inst, preds, edge_data, prefer_fast=False
        )
        sched.place(j, mach, t, inst.graph.tasks[j].demand / inst.platform.speed(mach))
    return sched


@dataclass
class FeasibilityReport:
    violations: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations


def verify_schedule(inst: Instance, s: Schedule,
                    f: GroupAssignment | None = None,
                    tol: float = 1e-9) -> FeasibilityReport:
    """Independent feasibility check of a finished schedule.

    Checks, in time order: per-machine interval overlap, precedence with
    communication delays, exact durations, and group consistency when a
    group assignment is supplied.
    """
    findings: list[tuple[float, str]] = []
    n = inst.graph.n

    for j in range(n):
        if j not in s.assignment:
            findings.append((0.0, f"task {j} is not scheduled"))
    if findings:
        return FeasibilityReport([m for _, m in sorted(findings, key=lambda kv: kv[0])])

    by_machine: dict[int, list[tuple[float, float, int]]] = {}
    for j in range(n):
        by_machine.setdefault(s.assignment[j], []).append((s.start[j], s.finish[j], j))
    for mach, intervals in by_machine.items():
        intervals.sort()
        for (a0, b0, t0), (a1, b1, t1) in zip(intervals, intervals[1:]):
            if a1 < b0 - tol:
                findings.append((a1, f"tasks {t0} and {t1} overlap on machine {mach}"))

    edge_data = inst.graph.edge_data()
    for e in inst.graph.edges:
        bound = s.finish[e.src] + comm_delay(inst, e.data, s.assignment[e.src], s.assignment[e.dst])
        if s.start[e.dst] < bound - tol:
            findings.append((
                s.start[e.dst],
                f"task {e.dst} starts at {s.start[e.dst]:.9g} before its data from "
                f"task {e.src} arrives at {bound:.9g}",
            ))

    for j in range(n):
        expected = inst.graph.tasks[j].demand / inst.platform.speed(s.assignment[j])
        if abs((s.finish[j] - s.start[j]) - expected) > tol:
            findings.append((s.start[j], f"task {j} duration differs from demand/speed"))

    if f is not None:
        for j in range(n):
            allowed = set(f.machines_for(j))
            if s.assignment[j] not in allowed:
                findings.append((s.start[j], f"task {j} placed outside its machine group"))

    findings.sort(key=lambda kv: kv[0])
    return FeasibilityReport([m for _, m in findings])
