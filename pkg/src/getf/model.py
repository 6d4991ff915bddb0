"""Scheduling instances: task DAGs, machine platforms, validation and JSON I/O.

An instance couples a directed acyclic task graph (per-task processing
demands and weights, per-edge data volumes) with a platform of related
machines (per-machine speeds, pairwise communication speeds).  Everything
downstream -- schedulers, LP builders, bound reports -- consumes the types
defined here and relies on ``validate_instance`` having passed.

Conventions:
  * task ids are 0..n-1 and machine ids are 0..m-1, both dense;
  * task j runs for demand/speed time units on its machine;
  * an edge (j', j) carrying ``data`` units forces
    start(j) >= finish(j') + data / comm_speed[m(j')][m(j)];
  * a communication speed of ``math.inf`` means zero delay and is encoded
    as ``null`` in JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


ABS_TOL = 1e-9


class InstanceError(ValueError):
    """Raised when an instance document or value is malformed."""


class CycleError(InstanceError):
    """Raised when the task graph contains a directed cycle."""


@dataclass(frozen=True)
class Task:
    id: int
    demand: float
    weight: float = 0.0


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    data: float = 0.0


@dataclass(frozen=True)
class TaskGraph:
    tasks: tuple[Task, ...]
    edges: tuple[Edge, ...]

    @property
    def n(self) -> int:
        return len(self.tasks)

    def predecessors(self) -> list[list[int]]:
        """Immediate predecessor ids, indexed by task id."""
        preds: list[list[int]] = [[] for _ in self.tasks]
        for e in self.edges:
            preds[e.dst].append(e.src)
        return preds

    def successors(self) -> list[list[int]]:
        succs: list[list[int]] = [[] for _ in self.tasks]
        for e in self.edges:
            succs[e.src].append(e.dst)
        return succs

    def edge_data(self) -> dict[tuple[int, int], float]:
        return {(e.src, e.dst): e.data for e in self.edges}


@dataclass(frozen=True)
class Machine:
    id: int
    speed: float


@dataclass(frozen=True)
class Platform:
    machines: tuple[Machine, ...]
    comm_speed: tuple[tuple[float, ...], ...]  # math.inf = zero delay

    @property
    def m(self) -> int:
        return len(self.machines)

    def speed(self, machine_id: int) -> float:
        return self.machines[machine_id].speed

    def sigma(self, src_machine: int, dst_machine: int) -> float:
        return self.comm_speed[src_machine][dst_machine]


@dataclass(frozen=True)
class Instance:
    graph: TaskGraph
    platform: Platform


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_instance(inst: Instance) -> ValidationReport:
    """Check every structural invariant; violations make the instance unusable.

    Disconnected DAGs and zero-data edges are legal and only warned about.
    """
    report = ValidationReport()
    g, p = inst.graph, inst.platform
    n, m = g.n, p.m

    for idx, task in enumerate(g.tasks):
        if task.id != idx:
            report.violations.append(f"task ids must be dense 0..n-1, found {task.id} at position {idx}")
        if not task.demand > 0:
            report.violations.append(f"nonpositive demand, task {task.id}")
        if task.weight < 0:
            report.violations.append(f"negative weight, task {task.id}")

    seen_pairs: set[tuple[int, int]] = set()
    for e in g.edges:
        if not (0 <= e.src < n) or not (0 <= e.dst < n):
            report.violations.append(f"edge ({e.src},{e.dst}) references missing task")
            continue
        if e.src == e.dst:
            report.violations.append(f"self edge on task {e.src}")
        if (e.src, e.dst) in seen_pairs:
            report.violations.append(f"parallel edge ({e.src},{e.dst})")
        seen_pairs.add((e.src, e.dst))
        if e.data < 0:
            report.violations.append(f"negative data on edge ({e.src},{e.dst})")
        elif e.data == 0:
            report.warnings.append(f"zero-data edge ({e.src},{e.dst})")

    for idx, mac in enumerate(p.machines):
        if mac.id != idx:
            report.violations.append(f"machine ids must be dense 0..m-1, found {mac.id} at position {idx}")
        if not mac.speed > 0:
            report.violations.append(f"nonpositive speed, machine {mac.id}")

    if len(p.comm_speed) != m or any(len(row) != m for row in p.comm_speed):
        report.violations.append(f"comm_speed must be {m}x{m}")
    else:
        for i, row in enumerate(p.comm_speed):
            for j, s in enumerate(row):
                if not (s == math.inf or s > 0):
                    report.violations.append(f"nonpositive comm speed, pair ({i},{j})")

    if not report.violations and n > 0:
        try:
            topological_order(g)
        except CycleError as exc:
            report.violations.append(str(exc))

    if not report.violations and n > 1:
        if _component_count(g) > 1:
            report.warnings.append("task graph is disconnected")

    return report


def _component_count(g: TaskGraph) -> int:
    parent = list(range(g.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in g.edges:
        ra, rb = find(e.src), find(e.dst)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in range(g.n)})


def topological_order(g: TaskGraph) -> list[int]:
    """Kahn's algorithm, always taking the lowest available id first."""
    import heapq

    indeg = [0] * g.n
    succs = g.successors()
    for e in g.edges:
        indeg[e.dst] += 1
    ready = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in succs[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    if len(order) != g.n:
        stuck = sorted(set(range(g.n)) - set(order))
        raise CycleError(f"cycle detected among tasks {stuck}")
    return order


def normalize_demands(inst: Instance) -> tuple[Instance, float]:
    """Scale demands so the smallest processing time over any machine is >= 1.

    Returns the scaled instance and the multiplier applied to every demand
    (1.0 when the instance is already normalized).  Edge data volumes and
    machine speeds are untouched, so communication times are preserved.
    """
    min_ratio = min(
        t.demand / mac.speed for t in inst.graph.tasks for mac in inst.platform.machines
    )
    if min_ratio >= 1.0 - 1e-12:  # tolerate one ulp of drift: keeps this idempotent
        return inst, 1.0
    scale = 1.0 / min_ratio
    tasks = tuple(Task(t.id, t.demand * scale, t.weight) for t in inst.graph.tasks)
    graph = TaskGraph(tasks, inst.graph.edges)
    return Instance(graph, inst.platform), scale


# ---------------------------------------------------------------------------
# JSON (de)serialization.  Field names are part of the on-disk contract:
#   {"tasks": [{"id", "demand", "weight"}], "edges": [{"src", "dst", "data"}],
#    "machines": [{"id", "speed"}], "comm_speed": [[...]]}
# with null entries in comm_speed meaning infinite speed (zero delay).
# ---------------------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    return {
        "tasks": [
            {"id": t.id, "demand": t.demand, "weight": t.weight} for t in inst.graph.tasks
        ],
        "edges": [
            {"src": e.src, "dst": e.dst, "data": e.data} for e in inst.graph.edges
        ],
        "machines": [{"id": mc.id, "speed": mc.speed} for mc in inst.platform.machines],
        "comm_speed": [
            [None if s == math.inf else s for s in row] for row in inst.platform.comm_speed
        ],
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InstanceError(message)


def instance_from_dict(doc: dict) -> Instance:
    _require(isinstance(doc, dict), "instance document must be a JSON object")
    for key in ("tasks", "edges", "machines", "comm_speed"):
        _require(key in doc, f"missing field '{key}'")

    tasks = []
    for entry in doc["tasks"]:
        _require(isinstance(entry, dict) and "id" in entry and "demand" in entry,
                 "task entries need 'id' and 'demand'")
        tasks.append(Task(int(entry["id"]), float(entry["demand"]),
                          float(entry.get("weight", 0.0))))
    edges = []
    for entry in doc["edges"]:
        _require(isinstance(entry, dict) and "src" in entry and "dst" in entry,
                 "edge entries need 'src' and 'dst'")
        edges.append(Edge(int(entry["src"]), int(entry["dst"]),
                          float(entry.get("data", 0.0))))
    machines = []
    for entry in doc["machines"]:
        _require(isinstance(entry, dict) and "id" in entry and "speed" in entry,
                 "machine entries need 'id' and 'speed'")
        machines.append(Machine(int(entry["id"]), float(entry["speed"])))

    comm_rows = []
    _require(isinstance(doc["comm_speed"], list), "'comm_speed' must be a matrix")
    for row in doc["comm_speed"]:
        _require(isinstance(row, list), "'comm_speed' must be a matrix")
        comm_rows.append(tuple(math.inf if s is None else float(s) for s in row))

    inst = Instance(
        graph=TaskGraph(tuple(tasks), tuple(edges)),
        platform=Platform(tuple(machines), tuple(comm_rows)),
    )
    report = validate_instance(inst)
    if not report.ok:
        raise InstanceError("; ".join(report.violations))
    return inst


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(doc)


def load_instance(path: str) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())
