import random

import pytest

from getf.analysis import (chain_comm_time, chain_processing_time, identical_report,
                           latest_finishing, machine_idle_in_window,
                           makespan_theorem_report, min_comm_terminal_chain,
                           per_task_chain_comm, separation_report, terminal_chain,
                           weighted_theorem_report)
from getf.generator import FAMILIES, GeneratorSpec, generate_instance
from getf.grouping import (GroupAssignment, partition_machines,
                           assign_groups_makespan, assign_groups_weighted,
                           solve_makespan_relaxation, solve_weighted_relaxation,
                           trivial_assignment)
from getf.model import normalize_demands
from getf.oracle import brute_force_schedule
from getf.scheduler import Schedule, TieBreak, etf_schedule, getf_schedule

from conftest import make_instance


def getf_on_example(example_instance):
    f = trivial_assignment(example_instance)
    return getf_schedule(example_instance, f, TieBreak.by_index()), f


# ---------------------------------------------------------------------------
# Oracle: enumerate every terminal chain by walking all latest-finishing
# predecessor choices; small DAGs only.
# ---------------------------------------------------------------------------

def all_terminal_chains(s: Schedule, inst) -> list[tuple[int, ...]]:
    preds = inst.graph.predecessors()
    anchors = latest_finishing(sorted(s.assignment), s.finish)
    chains = []

    def extend(suffix):
        head = suffix[0]
        if not preds[head]:
            chains.append(tuple(suffix))
            return
        for p in latest_finishing(preds[head], s.finish):
            extend([p] + suffix)

    for a in anchors:
        extend([a])
    return chains


class TestTerminalChain:
    def test_worked_example_by_index(self, example_instance):
        s, _ = getf_on_example(example_instance)
        chain = terminal_chain(s, example_instance.graph, anchor=3)
        assert chain.tasks == (0, 3)  # tasks 0 and 1 tie at finish 1; lowest id

    def test_single_task(self):
        inst = make_instance([1.0], [], [1.0])
        s = etf_schedule(inst, TieBreak.by_index())
        assert terminal_chain(s, inst.graph).tasks == (0,)

    def test_path_dag_unique_chain(self):
        inst = make_instance([1, 1, 1], [(0, 1, 1.0), (1, 2, 1.0)], [1.0], comm=2.0)
        s = etf_schedule(inst, TieBreak.by_index())
        assert terminal_chain(s, inst.graph).tasks == (0, 1, 2)

    def test_backward_walk_invariant(self):
        rng = random.Random(61)
        for k in range(15):
            spec = GeneratorSpec(family=FAMILIES[k % 3], n=rng.randint(3, 15),
                                 m=rng.randint(2, 5), seed=500 + k, density=0.4)
            inst = generate_instance(spec)
            s = etf_schedule(inst, TieBreak.by_index())
            chain = terminal_chain(s, inst.graph)
            preds = inst.graph.predecessors()
            assert not preds[chain.tasks[0]]
            for a, b in chain.links():
                assert a in preds[b]
                assert a in latest_finishing(preds[b], s.finish)


class TestChainComm:
    def test_worked_example_links(self, example_instance):
        s, f = getf_on_example(example_instance)
        from getf.analysis import TerminalChain
        assert chain_comm_time(TerminalChain((1, 3)), s, f, example_instance) \
            == pytest.approx(1.0)
        assert chain_comm_time(TerminalChain((0, 3)), s, f, example_instance) \
            == pytest.approx(2.0)

    def test_zero_data_chain(self):
        inst = make_instance([1, 1], [(0, 1, 0.0)], [1.0, 1.0], comm=1.0)
        f = trivial_assignment(inst)
        s = getf_schedule(inst, f, TieBreak.by_index())
        from getf.analysis import TerminalChain
        assert chain_comm_time(TerminalChain((0, 1)), s, f, inst) == 0.0

    def test_min_comm_picks_cheapest(self, example_instance):
        s, f = getf_on_example(example_instance)
        chain, comm = min_comm_terminal_chain(s, example_instance, f)
        assert chain.tasks == (1, 3)
        assert comm == pytest.approx(1.0)

    def test_min_comm_matches_exhaustive_enumeration(self):
        rng = random.Random(71)
        for k in range(20):
            spec = GeneratorSpec(family=FAMILIES[k % 3], n=rng.randint(3, 9),
                                 m=rng.randint(2, 4), seed=600 + k, density=0.5)
            inst = generate_instance(spec)
            f = trivial_assignment(inst)
            s = getf_schedule(inst, f, TieBreak.by_index())
            chain, comm = min_comm_terminal_chain(s, inst, f)
            enumerated = all_terminal_chains(s, inst)
            from getf.analysis import TerminalChain
            best = min(chain_comm_time(TerminalChain(c), s, f, inst) for c in enumerated)
            assert comm == pytest.approx(best, abs=1e-9)
            assert chain.tasks in enumerated

    def test_path_dag_no_choice(self):
        inst = make_instance([1, 1, 1], [(0, 1, 2.0), (1, 2, 3.0)], [1.0, 1.0], comm=1.0)
        f = trivial_assignment(inst)
        s = getf_schedule(inst, f, TieBreak.by_index())
        chain, comm = min_comm_terminal_chain(s, inst, f)
        assert chain.tasks == (0, 1, 2)
        assert comm == pytest.approx(chain_comm_time(chain, s, f, inst))


class TestSeparation:
    def test_worked_example_numbers(self, example_instance):
        s, f = getf_on_example(example_instance)
        groups = f.groups
        rep = separation_report(s, example_instance, f, groups)
        assert rep.context["P"] == pytest.approx(4.0)
        assert rep.context["sum_D"] == pytest.approx(3.0)
        assert rep.context["C"] == pytest.approx(1.0)
        main = rep.inequalities[0]
        assert main.lhs == pytest.approx(5.0)
        assert main.rhs == pytest.approx(8.0)
        assert main.slack == pytest.approx(3.0)
        assert main.passed

    def test_single_task_trivial(self):
        inst = make_instance([1.0], [], [1.0])
        f = trivial_assignment(inst)
        s = getf_schedule(inst, f, TieBreak.by_index())
        rep = separation_report(s, inst, f, f.groups)
        assert rep.inequalities[0].passed
        assert rep.context["P"] == pytest.approx(1.0)
        assert rep.context["sum_D"] == pytest.approx(1.0)
        assert rep.context["C"] == 0.0

    def test_random_ensemble_inequality_holds(self):
        rng = random.Random(81)
        ties = [TieBreak.by_index(), TieBreak.random_rule(5),
                TieBreak.largest_demand(), TieBreak.most_successors()]
        for k in range(120):
            spec = GeneratorSpec(family=FAMILIES[k % 3], n=rng.randint(3, 30),
                                 m=rng.randint(2, 8), seed=700 + k,
                                 density=rng.choice([0.2, 0.4]),
                                 self_comm=("matrix", "infinite")[k % 2])
            inst = generate_instance(spec)
            groups = partition_machines(inst.platform)
            nonempty = [g for g in range(1, groups.K + 1) if groups.members[g]]
            fr = random.Random(k)
            f = GroupAssignment({t.id: fr.choice(nonempty) for t in inst.graph.tasks},
                                groups)
            s = getf_schedule(inst, f, ties[k % 4])
            rep = separation_report(s, inst, f, groups)
            assert rep.inequalities[0].passed, rep.to_json()

    def test_zero_comm_reduces_to_load_terms(self):
        inst = make_instance([2, 2, 2, 2], [(0, 2, 0.0), (1, 3, 0.0)], [1.0, 1.0],
                             comm=None)
        f = trivial_assignment(inst)
        s = getf_schedule(inst, f, TieBreak.by_index())
        rep = separation_report(s, inst, f, f.groups)
        assert rep.context["C"] == 0.0
        assert all(iq.passed for iq in rep.inequalities)  # idle replay too

    def test_decomposition_violation_is_flagged_loudly(self):
        # Two predecessors with very different data volumes: the chain keeps
        # the late-finishing light edge while the heavy edge stalls everything,
        # so the decomposition under-counts.  The report must say so.
        inst = make_instance(
            [1.0, 2.0, 1.0],
            [(0, 2, 4.0), (1, 2, 0.5)],
            [1.0, 1.0, 1.0],
            comm=1.0,
        )
        f = trivial_assignment(inst)
        s = getf_schedule(inst, f, TieBreak.by_index())
        assert s.makespan() == pytest.approx(6.0)
        rep = separation_report(s, inst, f, f.groups)
        main = rep.inequalities[0]
        assert not main.passed
        # chain is (1, 2): P = 2 + 1, sum_D = 4/3, C = 0.5
        assert main.rhs == pytest.approx(3.0 + 4.0 / 3.0 + 0.5)
        assert not rep.passed

    def test_idle_replay_not_universal_even_on_worked_example(self, example_instance):
        # On the min-comm chain (1, 3), machine 1 idles a full unit inside the
        # window [1, 2] while the link transfer bound is only 0.5: the link
        # bound ignores task 0's slower data.  This pins the known limitation.
        s, f = getf_on_example(example_instance)
        rep = separation_report(s, example_instance, f, f.groups)
        idle_entries = {iq.name: iq for iq in rep.inequalities[1:]}
        bad = idle_entries["idle[1->3]@m1"]
        assert bad.lhs == pytest.approx(1.0)
        assert bad.rhs == pytest.approx(0.5)
        assert not bad.passed


class TestMakespanTheorem:
    def test_worked_example(self, example_instance):
        groups = partition_machines(example_instance.platform)
        frac = solve_makespan_relaxation(example_instance, groups)
        f = assign_groups_makespan(frac, groups)
        s = getf_schedule(example_instance, f, TieBreak.by_index())
        rep = makespan_theorem_report(s, example_instance, f, groups, frac.T)
        by_name = {iq.name: iq for iq in rep.inequalities}
        assert by_name["P<=2*gamma*T*"].lhs == pytest.approx(4.0)
        assert by_name["P<=2*gamma*T*"].rhs == pytest.approx(16.0)
        assert by_name["sumD<=2*K*T*"].lhs == pytest.approx(3.0)
        assert by_name["sumD<=2*K*T*"].rhs == pytest.approx(8.0)
        assert by_name["makespan<=2*(gamma+K)*T*+C"].rhs == pytest.approx(25.0)
        assert rep.passed

    def test_single_machine_chain_bound(self):
        inst = make_instance([1, 2], [(0, 1, 1.0)], [1.0], comm=2.0)
        groups = partition_machines(inst.platform)
        frac = solve_makespan_relaxation(inst, groups)
        f = assign_groups_makespan(frac, groups)
        s = getf_schedule(inst, f, TieBreak.by_index())
        rep = makespan_theorem_report(s, inst, f, groups, frac.T)
        assert rep.passed
        assert frac.T >= chain_processing_time(
            min_comm_terminal_chain(s, inst, f)[0], s, inst) / (2 * groups.gamma)

    def test_zero_comm_pipeline_vs_brute_force(self):
        rng = random.Random(91)
        for k in range(10):
            spec = GeneratorSpec(family=FAMILIES[k % 3], n=rng.randint(2, 5),
                                 m=rng.randint(1, 3), seed=800 + k, density=0.5,
                                 data_range=(0.0, 0.0), speed_range=(1.0, 2.0))
            inst = generate_instance(spec)
            groups = partition_machines(inst.platform)
            frac = solve_makespan_relaxation(inst, groups)
            f = assign_groups_makespan(frac, groups)
            s = getf_schedule(inst, f, TieBreak.by_index())
            rep = makespan_theorem_report(s, inst, f, groups, frac.T)
            assert rep.passed
            opt, _ = brute_force_schedule(inst, ignore_comm=True)
            g, K = groups.gamma, groups.K
            assert s.makespan() <= 2 * (g + K) * opt + 1e-9


class TestIdentical:
    def test_worked_example_numbers(self, example_instance):
        s, _ = getf_on_example(example_instance)
        rep = identical_report(s, example_instance, opt_ignore_comm=4.0)
        assert rep.context["C'"] == pytest.approx(0.75)
        inter, vs_opt = rep.inequalities
        assert inter.lhs == pytest.approx(5.0)
        assert inter.rhs == pytest.approx(3.0 + 2.0 + 0.75)
        assert vs_opt.rhs == pytest.approx(1.5 * 4.0 + 0.75)
        assert rep.passed

    def test_equality_on_single_machine_zero_data(self):
        inst = make_instance([1, 2], [(0, 1, 0.0)], [1.0], comm=None)
        s = etf_schedule(inst, TieBreak.by_index())
        opt, _ = brute_force_schedule(inst, ignore_comm=True)
        rep = identical_report(s, inst, opt_ignore_comm=opt)
        vs_opt = rep.inequalities[1]
        assert s.makespan() == pytest.approx(3.0)
        assert vs_opt.rhs == pytest.approx((2 - 1 / 1) * 3.0 + 0.0)
        assert rep.passed

    def test_rejects_heterogeneous_speeds(self):
        inst = make_instance([1.0], [], [1.0, 2.0], comm=1.0)
        s = etf_schedule(inst, TieBreak.by_index())
        with pytest.raises(Exception, match="identical"):
            identical_report(s, inst)


class TestPerTaskChains:
    def test_first_task_has_zero(self, example_instance):
        s, f = getf_on_example(example_instance)
        comm = per_task_chain_comm(s, example_instance, f)
        assert comm[s.iteration_order[0]] == 0.0

    def test_worked_example_task3(self, example_instance):
        s, f = getf_on_example(example_instance)
        comm = per_task_chain_comm(s, example_instance, f)
        assert comm[3] == pytest.approx(1.0)

    def test_zero_data_all_zero(self):
        inst = make_instance([1, 1, 1], [(0, 1, 0.0), (0, 2, 0.0)], [1.0, 1.0],
                             comm=1.0)
        f = trivial_assignment(inst)
        s = getf_schedule(inst, f, TieBreak.by_index())
        assert set(per_task_chain_comm(s, inst, f).values()) == {0.0}


class TestWeightedTheorem:
    def test_single_task_all_terms_forced(self):
        inst = make_instance([1.0], [], [1.0], weights=[1.0])
        groups = partition_machines(inst.platform)
        wsol = solve_weighted_relaxation(inst, groups)
        f = assign_groups_weighted(wsol, groups)
        s = getf_schedule(inst, f, TieBreak.by_index())
        rep = weighted_theorem_report(s, inst, f, groups, wsol)
        # gamma=2, K=1: per-task bound is 32*3*C* = 96
        by_name = {iq.name: iq for iq in rep.inequalities}
        per_task = by_name["P+sumD(task 0)<=32*(gamma+K)*C*"]
        assert per_task.lhs == pytest.approx(2.0)  # P = 1 plus D = 1
        assert per_task.rhs == pytest.approx(96.0)
        assert rep.passed

    def test_worked_example_full_pipeline(self, example_instance):
        groups = partition_machines(example_instance.platform)
        wsol = solve_weighted_relaxation(example_instance, groups)
        f = assign_groups_weighted(wsol, groups)
        s = getf_schedule(example_instance, f, TieBreak.by_index())
        rep = weighted_theorem_report(s, example_instance, f, groups, wsol)
        assert rep.passed
        assert rep.objective == pytest.approx(s.weighted_completion(example_instance))

    def test_random_ensemble(self):
        rng = random.Random(101)
        for k in range(25):
            spec = GeneratorSpec(family=FAMILIES[k % 3], n=rng.randint(3, 7),
                                 m=rng.randint(2, 4), seed=900 + k, density=0.5,
                                 demand_range=(1.0, 4.0), speed_range=(0.5, 1.0),
                                 weights="uniform",
                                 self_comm=("matrix", "infinite")[k % 2])
            inst, scale = normalize_demands(generate_instance(spec))
            assert scale == 1.0
            groups = partition_machines(inst.platform)
            wsol = solve_weighted_relaxation(inst, groups)
            f = assign_groups_weighted(wsol, groups)
            s = getf_schedule(inst, f, TieBreak.by_index())
            rep = weighted_theorem_report(s, inst, f, groups, wsol)
            assert rep.passed, rep.to_json()


def test_idle_window_arithmetic():
    s = Schedule()
    s.place(0, 0, 0.0, 1.0)
    s.place(1, 0, 3.0, 2.0)
    assert machine_idle_in_window(s, 0, 0.0, 5.0) == pytest.approx(2.0)
    assert machine_idle_in_window(s, 0, 1.0, 3.0) == pytest.approx(2.0)
    assert machine_idle_in_window(s, 0, 4.0, 4.0) == 0.0
    assert machine_idle_in_window(s, 1, 0.0, 2.0) == pytest.approx(2.0)


def test_report_json_shape(example_instance):
    s, f = getf_on_example(example_instance)
    doc = separation_report(s, example_instance, f, f.groups).to_dict()
    assert doc["kind"] == "separation"
    assert {"name", "lhs", "rhs", "slack", "pass"} <= set(doc["inequalities"][0])
