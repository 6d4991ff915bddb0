"""Quantify gaps on tiny instances where the exact optimum is computable.

For a batch of small DAGs: the analytic lower bounds, the fractional
optimum T*, the exact zero-communication optimum, the exact optimum with
communication, and the greedy schedule's makespan, side by side.
"""

from getf import (GeneratorSpec, TieBreak, brute_force_schedule, generate_instance,
                  lower_bounds, partition_machines, solve_makespan_relaxation,
                  trivial_assignment, getf_schedule)


def main():
    header = ("seed", "work_lb", "chain_lb", "T*", "opt_no_comm", "opt", "greedy")
    print(("{:>6} " + "{:>12} " * 6).format(*header))
    for seed in range(8):
        spec = GeneratorSpec(family="random_dag", n=5, m=2, seed=seed, density=0.5,
                             demand_range=(1.0, 4.0), speed_range=(1.0, 2.0),
                             comm_range=(1.0, 2.0), data_range=(0.0, 2.0))
        inst = generate_instance(spec)
        work, chain = lower_bounds(inst)
        groups = partition_machines(inst.platform)
        tstar = solve_makespan_relaxation(inst, groups).T
        opt_free, _ = brute_force_schedule(inst, ignore_comm=True)
        opt, _ = brute_force_schedule(inst)
        greedy = getf_schedule(inst, trivial_assignment(inst), TieBreak.by_index())
        row = (work, chain, tstar, opt_free, opt, greedy.makespan())
        print(("{:>6} " + "{:>12.4g} " * 6).format(seed, *row))
    print("\ninvariants visible above: max(work, chain) <= T* <= opt_no_comm "
          "<= opt <= greedy")


if __name__ == "__main__":
    main()
