"""The natural measure mu on the construction and retained-mass accounting.

Every square of F_n carries mass 4^-alpha_n.  Because membership in F_n only
constrains the digits at random levels and deviance only reads the digits at
deterministic levels, the mass removed by pruning does not depend on the
seed; ``retained_mass`` computes it from the law of the scores.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .construction import DEFAULT_NODE_BUDGET, Realization
from .deviance import DeviancePlan, IntWeights, prune
from .gauge import Schedule

# a ball of radius r in [2^-n-1, 2^-n) meets at most 9 level-n dyadic squares
BALL_COVER = 9
SQUARE_CONSTANT = 4


def square_mass(s: Schedule, n: int) -> Fraction:
    return Fraction(1, 4 ** s.alpha[n])


def mass_assignment(squares, s: Schedule) -> dict:
    """address -> exact mass for a SquareSet of level n."""
    m = square_mass(s, squares.level)
    return {a: m for a in squares.addresses()}


@dataclass
class MassCheckReport:
    levels_checked: int
    violations: list = field(default_factory=list)
    ball_constant: int = SQUARE_CONSTANT * BALL_COVER
    min_ratio: Optional[Fraction] = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "levels_checked": self.levels_checked,
            "violations": self.violations,
            "ball_constant": self.ball_constant,
            "min_ratio": str(self.min_ratio) if self.min_ratio is not None else None,
        }


def mass_distribution_check(s: Schedule, depth: Optional[int] = None) -> MassCheckReport:
    """Check mu(square of level n) = 4^-alpha_n <= 4 phi(2^-n) for n <= depth.

    ``min_ratio`` is the smallest phi(2^-n) / mu(square); it is >= 1/4 on a
    healthy schedule.
    """
    g = s.gauge
    if g is None:
        raise ValueError("schedule carries no gauge")
    depth = s.depth if depth is None else depth
    rep = MassCheckReport(depth + 1)
    for n in range(depth + 1):
        mu = square_mass(s, n)
        phi = g.exact(n)
        if phi is None:
            phi_f = g(n)
            ok = float(mu) <= SQUARE_CONSTANT * phi_f * (1 + 1e-12)
            ratio = Fraction(phi_f) / mu
        else:
            ok = mu <= SQUARE_CONSTANT * phi
            ratio = phi / mu
        if not ok:
            rep.violations.append({"n": n, "mass": str(mu), "phi": float(phi if phi is not None else phi_f)})
        rep.min_ratio = ratio if rep.min_ratio is None else min(rep.min_ratio, ratio)
    return rep


@dataclass
class RetainedMass:
    mass: Fraction
    removed: list  # mass removed at each applied stage, in order
    bound: Fraction  # 1 - sum over applied stages of 2^-(j+1)
    stages: list

    def to_dict(self) -> dict:
        return {
            "retained_mass": str(self.mass),
            "retained_mass_float": float(self.mass),
            "removed": [str(x) for x in self.removed],
            "bound": str(self.bound),
            "stages": [st.j for st in self.stages],
        }


def _stage_list(plan: DeviancePlan, stage, depth):
    stages = plan.stages if depth is None else plan.applied(depth)
    if stage is not None:
        stages = [st for st in stages if st.j <= stage]
    return stages


def retained_mass(r: Optional[Realization], plan: DeviancePlan, stage: Optional[int] = None,
                  depth: Optional[int] = None, method: str = "patterns",
                  budget: int = DEFAULT_NODE_BUDGET) -> RetainedMass:
    """Exact mu of the pruned set after stages 1..stage (all stages if None).

    ``method="patterns"`` follows the law of the scores through the stages and
    never touches the realization; ``"enumerate"`` builds and prunes ``r``
    eagerly up to the deepest applied stage and counts squares.
    """
    s = plan.schedule
    stages = _stage_list(plan, stage, depth)
    bound = 1 - sum((Fraction(1, 2 ** (st.j + 1)) for st in stages), Fraction(0))
    if not stages:
        return RetainedMass(Fraction(1), [], bound, [])
    if method == "enumerate":
        if r is None:
            raise ValueError("method='enumerate' needs a realization")
        sub = DeviancePlan(s, stages, len(stages))
        last = stages[-1].k_n_j
        fams = prune(r, sub, last, budget)
        removed = []
        prev = Fraction(1)
        for st in stages:
            m = len(fams[st.k_n_j]) * square_mass(s, st.k_n_j)
            removed.append(prev - m)
            prev = m
        return RetainedMass(prev, removed, bound, stages)
    if method != "patterns":
        raise ValueError(f"unknown method {method!r}")
    iw = IntWeights(s)
    cut = {st.n_j: st for st in stages}
    dist = {0: Fraction(1)}
    removed = []
    for i in range(1, stages[-1].n_j + 1):
        w = iw.w[i - 1]
        nxt = defaultdict(Fraction)
        for S, p in dist.items():
            nxt[S] += p / 2
            nxt[S + w] += p / 2
        dist = nxt
        if i in cut:
            T = iw.total(i)
            gone = sum((p for S, p in dist.items() if abs(4 * S - 2 * T) > T), Fraction(0))
            dist = {S: p for S, p in dist.items() if not abs(4 * S - 2 * T) > T}
            removed.append(gone)
    return RetainedMass(sum(dist.values(), Fraction(0)), removed, bound, stages)
