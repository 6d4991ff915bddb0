"""Command-line surface: generate, solve, verify, compare, gantt.

Exit codes: 0 success, 1 usage error, 2 infeasible input or validation
failure, 3 bound-report violation.  GETF_LOG (quiet|info|debug) controls
logging verbosity.

``solve`` never emits a schedule that fails the independent feasibility
check, and for the greedy schedulers it computes the separation report
first: a violated makespan decomposition aborts with exit code 3 (pass
``--strict`` to also fail on any per-link idle entry).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import analysis, grouping, model, scheduler
from .generator import (FORK_JOIN, LAYERED, RANDOM_DAG, SELF_COMM_INFINITE,
                        SELF_COMM_MATRIX, WEIGHTS_SINK_ONLY, WEIGHTS_UNIFORM,
                        WEIGHTS_ZERO, GeneratorSpec, generate_instance)

log = logging.getLogger("getf")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_BOUND = 3

ALGORITHMS = ("getf-makespan", "getf-weighted", "etf", "sls")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


class CliError(RuntimeError):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _parse_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return (float(lo), float(hi)) if hi else (float(lo), float(lo))


def _parse_tie(text: str) -> scheduler.TieBreak:
    if text == "by-index":
        return scheduler.TieBreak.by_index()
    if text == "largest-demand":
        return scheduler.TieBreak.largest_demand()
    if text == "most-succ":
        return scheduler.TieBreak.most_successors()
    if text.startswith("random:"):
        return scheduler.TieBreak.random_rule(int(text.split(":", 1)[1]))
    raise CliError(f"unknown tie rule {text!r}", EXIT_USAGE)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load_instance(path: str) -> model.Instance:
    try:
        return model.load_instance(path)
    except FileNotFoundError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    except model.InstanceError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INFEASIBLE) from exc


def _pipeline(inst: model.Instance, algo: str, tie: scheduler.TieBreak,
              theta: float, gamma: float | None):
    """Run one scheduling algorithm; returns (schedule, assignment, groups)."""
    if algo == "etf":
        f = grouping.trivial_assignment(inst)
        return scheduler.etf_schedule(inst, tie), f, f.groups
    if algo == "sls":
        f = grouping.trivial_assignment(inst)
        priority = model.topological_order(inst.graph)
        return scheduler.sls_schedule(inst, f, priority), f, f.groups
    if algo == "getf-makespan":
        groups = grouping.partition_machines(inst.platform, gamma)
        frac = grouping.solve_makespan_relaxation(inst, groups)
        f = grouping.assign_groups_makespan(frac, groups, theta)
        return scheduler.getf_schedule(inst, f, tie), f, groups
    if algo == "getf-weighted":
        normalized, scale = model.normalize_demands(inst)
        if scale != 1.0:
            log.info("demands scaled by %g to derive the group assignment", scale)
        groups = grouping.partition_machines(normalized.platform, gamma)
        wsol = grouping.solve_weighted_relaxation(normalized, groups)
        f = grouping.assign_groups_weighted(wsol, groups, theta)
        return scheduler.getf_schedule(inst, f, tie), f, groups
    raise CliError(f"unknown algorithm {algo!r}", EXIT_USAGE)


def cmd_generate(args) -> int:
    family = {"layered": LAYERED, "fork-join": FORK_JOIN, "random-dag": RANDOM_DAG}[args.family]
    weights = {"zero": WEIGHTS_ZERO, "uniform": WEIGHTS_UNIFORM,
               "sink-only": WEIGHTS_SINK_ONLY}[args.weights]
    self_comm = {"matrix": SELF_COMM_MATRIX, "infinite": SELF_COMM_INFINITE}[args.self_comm]
    spec = GeneratorSpec(
        family=family, n=args.n, m=args.m, seed=args.seed, density=args.density,
        demand_range=_parse_range(args.demand), speed_range=_parse_range(args.speed),
        comm_range=_parse_range(args.comm), data_range=_parse_range(args.data),
        self_comm=self_comm, weights=weights,
    )
    inst = generate_instance(spec)
    _write(model.serialize_instance(inst), args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    tie = _parse_tie(args.tie)
    sched, f, groups = _pipeline(inst, args.algo, tie, args.theta, args.gamma)

    feas = scheduler.verify_schedule(inst, sched, f)
    if not feas.feasible:
        raise CliError("schedule failed verification: " + "; ".join(feas.violations),
                       EXIT_INFEASIBLE)

    if args.algo in ("getf-makespan", "getf-weighted", "etf"):
        report = analysis.separation_report(sched, inst, f, groups)
        main = report.inequalities[0]
        idle_entries = report.inequalities[1:]
        bad_idle = [iq for iq in idle_entries if not iq.passed]
        if bad_idle:
            log.info("%d of %d idle-bound entries exceeded their link transfer time",
                     len(bad_idle), len(idle_entries))
        if not main.passed or (args.strict and bad_idle):
            sys.stderr.write(report.to_json())
            raise CliError("separation report violated", EXIT_BOUND)
        log.info("separation: makespan %.6g <= %.6g (slack %.3g)",
                 main.lhs, main.rhs, main.slack)

    _write(sched.to_json(inst), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    try:
        doc = json.loads(Path(args.schedule).read_text(encoding="utf-8"))
        sched = scheduler.schedule_from_dict(doc)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read schedule: {exc}", EXIT_USAGE) from exc

    feas = scheduler.verify_schedule(inst, sched)
    out: dict = {"feasible": feas.feasible, "violations": feas.violations}

    if args.algo is not None:
        tie = _parse_tie(args.tie)
        _, f, groups = _pipeline(inst, args.algo, tie, args.theta, args.gamma)
        group_ok = scheduler.verify_schedule(inst, sched, f)
        out["group_consistent"] = group_ok.feasible
        report = analysis.separation_report(sched, inst, f, groups)
        out["separation"] = report.to_dict()
    _write(json.dumps(out, indent=2) + "\n", args.output)
    if not feas.feasible:
        return EXIT_INFEASIBLE
    if args.algo is not None and not out["separation"]["inequalities"][0]["pass"]:
        return EXIT_BOUND
    return EXIT_OK


def compare_batch(instance_dir: str, algorithms: list[str],
                  seeds: list[int] | None = None) -> str:
    """CSV comparison over every instance JSON in a directory.

    One row per (instance, algorithm, tie); error rows carry the message in
    the final column instead of aborting the batch.  A mean summary row per
    algorithm follows the per-instance rows.  The runtime column is wall
    clock and is the only nondeterministic column.
    """
    ties = [scheduler.TieBreak.random_rule(s) for s in seeds] if seeds else \
        [scheduler.TieBreak.by_index()]
    paths = sorted(Path(instance_dir).glob("*.json"))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["instance", "algorithm", "tie", "makespan", "weighted_completion",
                     "P", "sum_D", "C", "bound_slack", "runtime_s", "error"])

    sums: dict[str, list[float]] = {a: [0.0, 0.0, 0.0, 0] for a in algorithms}
    for path in paths:
        for algo in algorithms:
            for tie in ties:
                tie_label = tie.variant if tie.variant != scheduler.TieBreak.RANDOM \
                    else f"random:{tie.seed}"
                t0 = time.perf_counter()
                try:
                    inst = model.load_instance(str(path))
                    sched, f, groups = _pipeline(inst, algo, tie, 0.5, None)
                    feas = scheduler.verify_schedule(inst, sched, f)
                    if not feas.feasible:
                        raise CliError(feas.violations[0], EXIT_INFEASIBLE)
                    rep = analysis.separation_report(sched, inst, f, groups)
                    main = rep.inequalities[0]
                    elapsed = time.perf_counter() - t0
                    writer.writerow([
                        path.name, algo, tie_label,
                        f"{sched.makespan():.9g}",
                        f"{sched.weighted_completion(inst):.9g}",
                        f"{rep.context['P']:.9g}", f"{rep.context['sum_D']:.9g}",
                        f"{rep.context['C']:.9g}", f"{main.slack:.9g}",
                        f"{elapsed:.6f}", "",
                    ])
                    agg = sums[algo]
                    agg[0] += sched.makespan()
                    agg[1] += sched.weighted_completion(inst)
                    agg[2] += main.slack
                    agg[3] += 1
                except Exception as exc:  # error rows, not aborts
                    elapsed = time.perf_counter() - t0
                    writer.writerow([path.name, algo, tie_label, "", "", "", "", "", "",
                                     f"{elapsed:.6f}", str(exc)])
    for algo in algorithms:
        total, wtotal, slack, count = sums[algo]
        if count:
            writer.writerow(["(mean)", algo, "", f"{total / count:.9g}",
                             f"{wtotal / count:.9g}", "", "", "",
                             f"{slack / count:.9g}", "", ""])
    return buf.getvalue()


def cmd_compare(args) -> int:
    algorithms = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algorithms:
        if a not in ALGORITHMS:
            raise CliError(f"unknown algorithm {a!r}", EXIT_USAGE)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()] if args.seeds else None
    _write(compare_batch(args.directory, algorithms, seeds), args.output)
    return EXIT_OK


def cmd_gantt(args) -> int:
    try:
        doc = json.loads(Path(args.schedule).read_text(encoding="utf-8"))
        sched = scheduler.schedule_from_dict(doc)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read schedule: {exc}", EXIT_USAGE) from exc
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task", "machine", "start", "end"])
    rows = sorted(
        ((sched.assignment[j], sched.start[j], sched.finish[j], j) for j in sched.assignment),
    )
    for machine, start, end, task in rows:
        writer.writerow([task, machine, f"{start:.9g}", f"{end:.9g}"])
    _write(buf.getvalue(), args.output)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="getf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a random instance JSON")
    p.add_argument("--family", choices=["layered", "fork-join", "random-dag"],
                   default="layered")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--demand", default="1:4", help="demand range lo:hi")
    p.add_argument("--speed", default="1:2", help="machine speed range lo:hi")
    p.add_argument("--comm", default="1:4", help="communication speed range lo:hi")
    p.add_argument("--data", default="0:4", help="edge data volume range lo:hi")
    p.add_argument("--self-comm", choices=["matrix", "infinite"], default="matrix")
    p.add_argument("--weights", choices=["zero", "uniform", "sink-only"], default="zero")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="schedule an instance")
    p.add_argument("instance")
    p.add_argument("--algo", choices=list(ALGORITHMS), default="getf-makespan")
    p.add_argument("--tie", default="by-index",
                   help="by-index | random:<seed> | largest-demand | most-succ")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--strict", action="store_true",
                   help="also fail on per-link idle-bound violations")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a schedule against an instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.add_argument("--algo", choices=list(ALGORITHMS), default=None,
                   help="recompute this pipeline's groups and bound report")
    p.add_argument("--tie", default="by-index")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="batch comparison over a directory")
    p.add_argument("directory")
    p.add_argument("--algos", default="getf-makespan,etf,sls")
    p.add_argument("--seeds", default="", help="comma-separated random tie seeds")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gantt", help="schedule JSON -> task,machine,start,end CSV")
    p.add_argument("schedule")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gantt)
    return parser


def _configure_logging() -> None:
    level = {"quiet": logging.WARNING, "info": logging.INFO,
             "debug": logging.DEBUG}.get(os.environ.get("GETF_LOG", "quiet"), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse help/usage paths
        return int(exc.code or 0)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except (model.InstanceError, grouping.GroupingError, scheduler.SchedulingError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
