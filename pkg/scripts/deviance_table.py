"""Deviant share, Chebyshev value and retained mass for a gauge, all exact.

    python3 scripts/deviance_table.py --gauge power:a=1 --depth 64 --stages 3
"""
import argparse

from gaugecantor import GaugeSpec, derive_schedule, deviant_fraction_exact, pruning_levels, retained_mass
from gaugecantor.deviance import chebyshev_bound


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gauge", default="power:a=1")
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--stages", type=int, default=3)
    args = p.parse_args(argv)

    s = derive_schedule(GaugeSpec.parse(args.gauge), args.depth)
    print(f"gauge {args.gauge}, depth {s.depth}, {s.n_det} deterministic steps, C2 = {s.c2}")
    print(f"{'n':>4} {'k_n':>5} {'sum gamma':>12} {'deviant':>10} {'chebyshev':>10}")
    n = 1
    while n <= s.n_det:
        dev = deviant_fraction_exact(s, n)
        print(f"{n:>4} {s.k(n):>5} {float(s.gamma_sum(n)):>12.4f} {float(dev):>10.5f} {float(chebyshev_bound(s, n)):>10.5f}")
        n *= 2
    plan = pruning_levels(s, args.stages)
    for st in plan.stages:
        rm = retained_mass(None, plan, stage=st.j)
        print(f"stage {st.j}: n={st.n_j} level={st.k_n_j} retained mass {float(rm.mass):.6f} (>= {float(rm.bound)})")
    if plan.note:
        print(plan.note)


if __name__ == "__main__":
    main()
