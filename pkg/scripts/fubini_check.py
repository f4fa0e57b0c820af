"""Compare mean projection length with the integral of line-hitting probabilities.

    python3 scripts/fubini_check.py --depth 16 --theta 1.0472 --trials 200 --hit-trials 200
"""
import argparse
import json
import math

from gaugecantor import GaugeSpec, derive_schedule, fubini_check, pruning_levels


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gauge", default="power:a=1")
    p.add_argument("--depth", type=int, default=16)
    p.add_argument("--stages", type=int, default=1)
    p.add_argument("--theta", type=float, nargs="+", default=[math.pi / 3])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--hit-trials", type=int, default=200)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    s = derive_schedule(GaugeSpec.parse(args.gauge), args.depth)
    plan = pruning_levels(s, args.stages)
    for theta in args.theta:
        fc = fubini_check(s, plan, theta, args.depth, args.trials, args.hit_trials, args.seed, args.grid)
        d = fc.to_dict()
        print(json.dumps({"theta": theta, "favard": d["favard"]["estimate"], "integral": d["integral"],
                          "difference": d["difference"], "tolerance": d["tolerance"], "agree": d["agree"]}))


if __name__ == "__main__":
    main()
