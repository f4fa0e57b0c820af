"""Hit probability of the pruned set against 64 / sum(gamma) for a range of n.

    python3 scripts/decay_sweep.py --gauge power:a=1 --depth 256 --n 8 16 32 64 128
"""
import argparse
import csv
import sys
from fractions import Fraction

from gaugecantor import GaugeSpec, Line, derive_schedule, hit_probability_mc, pruning_levels


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gauge", default="power:a=1")
    p.add_argument("--depth", type=int, default=256)
    p.add_argument("--stages", type=int, default=8)
    p.add_argument("--n", type=int, nargs="+", default=[4, 8, 16, 32, 64, 128])
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slope", default="5/11")
    p.add_argument("--intercept", default="3/13")
    args = p.parse_args(argv)

    s = derive_schedule(GaugeSpec.parse(args.gauge), args.depth)
    plan = pruning_levels(s, args.stages)
    line = Line.slope_intercept(Fraction(args.slope), Fraction(args.intercept))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "k_n", "sum_gamma", "bound", "estimate", "ci_lo", "ci_hi", "aborted"])
    for n in args.n:
        if n > s.n_det:
            print(f"# n={n} needs more than {s.n_det} deterministic steps; stopping", file=sys.stderr)
            break
        rep = hit_probability_mc(s, plan, line, n, args.trials, args.seed)
        w.writerow([n, s.k(n), str(s.gamma_sum(n)), f"{float(rep.bound):.6g}", f"{rep.estimate:.6g}",
                    f"{rep.ci_lo:.6g}", f"{rep.ci_hi:.6g}", rep.aborted_trials])
        sys.stdout.flush()


if __name__ == "__main__":
    main()
