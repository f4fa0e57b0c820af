"""Command-line front end: one subcommand per experiment.

Every run prints one JSON document (or a CSV table) on stdout and is fully
determined by its flags; nothing time- or machine-dependent is emitted.

Exit codes: 0 success, 2 gauge validation failure, 3 vertex-unsafe line,
4 node budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

from .construction import DEFAULT_NODE_BUDGET, BudgetError, Realization
from .deviance import pruning_levels, prune
from .gauge import GaugeError, GaugeSpec, derive_schedule, divergence_report, validate_gauge
from .measure import mass_distribution_check, retained_mass, square_mass
from .projection import (
    DEFAULT_NODE_CAP,
    Line,
    VertexUnsafeError,
    favard_mc,
    fubini_check,
    hit_probability_mc,
    projection_length,
)

EXIT_GAUGE = 2
EXIT_VERTEX = 3
EXIT_BUDGET = 4


@dataclass
class ExperimentConfig:
    gauge: str = "power:a=1"
    depth: int = 8
    stages: int = 0
    n: tuple = ()
    alpha: Optional[float] = None
    theta: Optional[float] = None
    offset: float = 0.0
    line: Optional[str] = None
    trials: int = 1000
    seed: int = 0
    format: str = "json"
    out: Optional[str] = None
    node_budget: int = DEFAULT_NODE_BUDGET
    node_cap: int = DEFAULT_NODE_CAP
    grid: int = 256
    hit_trials: int = 200
    prune_final: bool = True

    def line_obj(self) -> Line:
        if self.line:
            parts = self.line.split(",")
            if len(parts) != 3:
                raise SystemExit("--line takes three rational coefficients a,b,c for a x + b y = c")
            return Line.from_coefficients(*(Fraction(p.strip()) for p in parts))
        if self.theta is not None:
            return Line.from_normal(self.theta, self.offset)
        if self.alpha is not None:
            return Line.from_angle(self.alpha, self.offset)
        raise SystemExit("a line needs --line, --theta or --alpha")


def _emit(doc, cfg: ExperimentConfig):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n" if not isinstance(doc, str) else doc
    if cfg.out and cfg.format == "json" and not isinstance(doc, str):
        with open(cfg.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _frac_pair(x: Fraction) -> dict:
    return {"exact": str(x), "float": float(x)}


def _squares_out(sq, cfg: ExperimentConfig) -> str:
    if cfg.format == "csv":
        return sq.to_csv()
    return json.dumps(sq.to_json(), indent=2) + "\n"


def cmd_gauge(cfg: ExperimentConfig) -> int:
    g = GaugeSpec.parse(cfg.gauge)
    report = validate_gauge(g, cfg.depth)
    doc = {"config": asdict(cfg), "gauge": str(g), "validation": report.to_dict()}
    if not report.ok:
        _emit(doc, cfg)
        return EXIT_GAUGE
    s = derive_schedule(g, cfg.depth)
    div = divergence_report(s)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "alpha", "step_kind", "lambda", "lambda_partial"])
        for n in range(s.depth + 1):
            w.writerow([n, s.alpha[n], s.step_kind[n] or "", str(s.lam[n]), str(div.lambda_partial[n])])
        _emit(buf.getvalue(), cfg)
        return 0
    doc.update(schedule=s.to_dict(), divergence=div.to_dict(), mass_check=mass_distribution_check(s).to_dict(),
               convergent=div.classification == "converging-evidence")
    _emit(doc, cfg)
    return 0


def _schedule(cfg: ExperimentConfig, depth: Optional[int] = None):
    g = GaugeSpec.parse(cfg.gauge)
    return derive_schedule(g, depth or cfg.depth)


def cmd_build(cfg: ExperimentConfig) -> int:
    s = _schedule(cfg)
    fam = prune(Realization(s, cfg.seed), None, cfg.depth, cfg.node_budget)[-1]
    summary = {"config": asdict(cfg), "level": cfg.depth, "count": len(fam),
               "square_mass": _frac_pair(square_mass(s, cfg.depth)), "total_mass": _frac_pair(len(fam) * square_mass(s, cfg.depth))}
    _write_family(fam, summary, cfg)
    return 0


def cmd_prune(cfg: ExperimentConfig) -> int:
    s = _schedule(cfg)
    plan = pruning_levels(s, cfg.stages)
    fam = prune(Realization(s, cfg.seed), plan, cfg.depth, cfg.node_budget)[-1]
    rm = retained_mass(None, plan, depth=cfg.depth)
    counted = len(fam) * square_mass(s, cfg.depth)
    summary = {"config": asdict(cfg), "plan": plan.to_dict(), "level": cfg.depth, "count": len(fam),
               "retained_mass": rm.to_dict(), "counted_mass": _frac_pair(counted),
               "applied_stages": [st.j for st in plan.applied(cfg.depth)]}
    _write_family(fam, summary, cfg)
    sys.stderr.write(f"retained mass {rm.mass}\n")
    return 0


def _write_family(fam, summary, cfg: ExperimentConfig):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(_squares_out(fam, cfg))
        sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(_squares_out(fam, cfg))


def cmd_project(cfg: ExperimentConfig) -> int:
    s = _schedule(cfg)
    plan = pruning_levels(s, cfg.stages)
    theta = cfg.theta if cfg.theta is not None else 0.0
    fam = prune(Realization(s, cfg.seed), plan, cfg.depth, cfg.node_budget)[-1]
    _emit({"config": asdict(cfg), "theta": theta, "count": len(fam), "length": projection_length(fam, theta)}, cfg)
    return 0


def cmd_hitprob(cfg: ExperimentConfig) -> int:
    ns = list(cfg.n) or [1]
    s = _schedule(cfg, max(cfg.depth, 1))
    need = max(ns)
    if need > s.n_det:
        raise SystemExit(f"--n {need} needs more deterministic steps than depth {s.depth} provides ({s.n_det})")
    plan = pruning_levels(s, cfg.stages)
    line = cfg.line_obj()
    reports = [hit_probability_mc(s, plan, line, n, cfg.trials, cfg.seed, cfg.node_cap, cfg.prune_final) for n in ns]
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "k_n", "sum_gamma", "bound", "estimate", "ci_lo", "ci_hi"])
        for n, rep in zip(ns, reports):
            w.writerow([n, s.k(n), str(s.gamma_sum(n)), float(rep.bound), rep.estimate, rep.ci_lo, rep.ci_hi])
        _emit(buf.getvalue(), cfg)
        return 0
    docs = []
    for rep in reports:
        d = rep.to_dict()
        d["pass"] = d["within_bound"]
        docs.append(d)
    _emit({"config": asdict(cfg), "plan": plan.to_dict(), "reports": docs}, cfg)
    return 0


def cmd_favlen(cfg: ExperimentConfig) -> int:
    s = _schedule(cfg)
    plan = pruning_levels(s, cfg.stages)
    theta = cfg.theta if cfg.theta is not None else 0.0
    rep = favard_mc(s, plan, theta, cfg.depth, cfg.trials, cfg.seed)
    _emit({"config": asdict(cfg), "report": rep.to_dict()}, cfg)
    return 0


def cmd_fubini(cfg: ExperimentConfig) -> int:
    s = _schedule(cfg)
    plan = pruning_levels(s, cfg.stages)
    theta = cfg.theta if cfg.theta is not None else math.pi / 3
    fc = fubini_check(s, plan, theta, cfg.depth, cfg.trials, cfg.hit_trials, cfg.seed, cfg.grid)
    _emit({"config": asdict(cfg), "check": fc.to_dict()}, cfg)
    return 0


COMMANDS = {
    "gauge": cmd_gauge,
    "build": cmd_build,
    "prune": cmd_prune,
    "project": cmd_project,
    "hitprob": cmd_hitprob,
    "favlen": cmd_favlen,
    "fubini-check": cmd_fubini,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gauge", default="power:a=1", help="power:a=<a> | powerlog:a=<a>,b=<b> | table:@<path>")
    common.add_argument("--depth", type=int, default=8)
    common.add_argument("--stages", type=int, default=0, help="number of pruning stages J")
    common.add_argument("--n", type=int, nargs="+", default=(), help="deterministic-step index (several for a decay table)")
    common.add_argument("--theta", type=float, help="normal angle of the line / projection direction")
    common.add_argument("--alpha", type=float, help="direction angle of the line")
    common.add_argument("--offset", type=float, default=0.0)
    common.add_argument("--line", help="exact line a,b,c meaning a x + b y = c (rationals like 5/11; write --line=-1,2,3 when a is negative)")
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--hit-trials", type=int, default=200, help="trials per offset in fubini-check")
    common.add_argument("--grid", type=int, default=256, help="offsets in fubini-check")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")
    common.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    common.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    common.add_argument("--no-final-prune", dest="prune_final", action="store_false",
                        help="hitprob: skip removing squares deviant at stage n itself")
    p = argparse.ArgumentParser(prog="gaugecantor", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k != "command"}
    fields["n"] = tuple(fields["n"])
    cfg = ExperimentConfig(**fields)
    try:
        return COMMANDS[args.command](cfg)
    except GaugeError as exc:
        sys.stderr.write(f"gauge error: {exc}\n")
        return EXIT_GAUGE
    except VertexUnsafeError as exc:
        sys.stderr.write(f"vertex-unsafe line: {exc}\n")
        return EXIT_VERTEX
    except BudgetError as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
