"""Scores S_n, deviant and rich squares, pruning levels, and pruned families.

S_n(B) only reads the digits of B at the deterministic levels k_1..k_n, and
only through whether each digit lies in {0, 2}.  The weights gamma_i are
powers of two, so internally they are rescaled to integers and every
threshold test is an integer comparison.
"""
from __future__ import annotations

import itertools
import json
import warnings
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .construction import DEFAULT_NODE_BUDGET, Frontier, Realization, check_budget
from .gauge import Schedule


class StageSkippedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ScoreBreakdown:
    s_n: Fraction
    sum0: Fraction
    sum2: Fraction
    total: Fraction

    @property
    def deviant(self) -> bool:
        return abs(self.s_n - self.total / 2) > self.total / 4

    @property
    def rich0(self) -> bool:
        return self.sum0 >= self.total / 8

    @property
    def rich2(self) -> bool:
        return self.sum2 >= self.total / 8

    @property
    def anti(self) -> Fraction:
        """Weight on digits {1, 3}."""
        return self.total - self.s_n


def score(s: Schedule, a: str, n: int) -> ScoreBreakdown:
    if n < 1 or n > s.n_det:
        raise ValueError(f"n={n} outside 1..{s.n_det} deterministic steps")
    if len(a) < s.k(n):
        raise ValueError(f"address of level {len(a)} too short to read digit at level k_{n}={s.k(n)}")
    sum0 = sum2 = Fraction(0)
    for i in range(1, n + 1):
        d = a[s.k(i) - 1]
        if d == "0":
            sum0 += s.gamma[i - 1]
        elif d == "2":
            sum2 += s.gamma[i - 1]
    return ScoreBreakdown(sum0 + sum2, sum0, sum2, s.gamma_sum(n))


class IntWeights:
    """gamma_i rescaled to integers: gamma_i = w_i / scale."""

    def __init__(self, s: Schedule):
        self.schedule = s
        exps = [s.k(i) - 2 * i for i in range(1, s.n_det + 1)]
        shift = max([0] + [-e for e in exps])
        self.w = [1 << (e + shift) for e in exps]
        self.scale = 1 << shift
        self.prefix = [0]
        for x in self.w:
            self.prefix.append(self.prefix[-1] + x)

    def total(self, n: int) -> int:
        return self.prefix[n]


def _deviant_int(S: int, T: int) -> bool:
    return abs(4 * S - 2 * T) > T


def score_distribution(s: Schedule, n: int) -> dict:
    """Exact law of S_n (integer-scaled) as {S: number of the 2^n patterns}."""
    iw = IntWeights(s)
    dist = {0: 1}
    for w in iw.w[:n]:
        nxt = defaultdict(int)
        for S, c in dist.items():
            nxt[S] += c
            nxt[S + w] += c
        dist = nxt
    return dict(dist)


def deviant_fraction_exact(s: Schedule, n: int, method: str = "distribution", budget_bits: int = 24) -> Fraction:
    """Fraction of the 2^n {0,2}-membership patterns at k_1..k_n that are deviant.

    ``method="patterns"`` enumerates the patterns directly (n <= budget_bits);
    ``"distribution"`` convolves the law of S_n and is exact for any n.
    """
    if n < 1 or n > s.n_det:
        raise ValueError(f"n={n} outside 1..{s.n_det} deterministic steps")
    iw = IntWeights(s)
    T = iw.total(n)
    if method == "patterns":
        if n > budget_bits:
            raise ValueError(f"pattern enumeration budget exceeded (n={n} > {budget_bits})")
        bad = 0
        for pat in itertools.product((0, 1), repeat=n):
            S = sum(w for w, p in zip(iw.w, pat) if p)
            bad += _deviant_int(S, T)
        return Fraction(bad, 2 ** n)
    if method != "distribution":
        raise ValueError(f"unknown method {method!r}")
    dist = score_distribution(s, n)
    bad = sum(c for S, c in dist.items() if _deviant_int(S, T))
    return Fraction(bad, 2 ** n)


def chebyshev_bound(s: Schedule, n: int) -> Fraction:
    """Var(S_n) / (E(S_n)/2)^2 = 4 sum gamma^2 / (sum gamma)^2."""
    g = s.gamma[:n]
    return 4 * sum(x * x for x in g) / sum(g) ** 2


@dataclass
class DichotomyReport:
    n: int
    patterns: int
    nondeviant: int
    not_rich: int
    low_anti: int

    @property
    def ok(self) -> bool:
        return self.not_rich == 0 and self.low_anti == 0


def check_rich_dichotomy(s: Schedule, n: int) -> DichotomyReport:
    """Exhaustive check over the 3^n classes {0}, {2}, {1 or 3} at k_1..k_n.

    Every non-deviant pattern must be 0-rich or 2-rich and carry at least a
    quarter of the total weight on the anti-diagonal digits.
    """
    iw = IntWeights(s)
    T = iw.total(n)
    w = iw.w[:n]
    nondev = not_rich = low_anti = 0
    for pat in itertools.product((0, 2, 1), repeat=n):
        s0 = sum(x for x, p in zip(w, pat) if p == 0)
        s2 = sum(x for x, p in zip(w, pat) if p == 2)
        if _deviant_int(s0 + s2, T):
            continue
        nondev += 1
        if not (8 * s0 >= T or 8 * s2 >= T):
            not_rich += 1
        if 4 * (T - s0 - s2) < T:
            low_anti += 1
    return DichotomyReport(n, 3 ** n, nondev, not_rich, low_anti)


# --- pruning plan --------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    j: int
    n_j: int
    k_n_j: int
    sum_gamma: Fraction


@dataclass
class DeviancePlan:
    schedule: Schedule
    stages: list
    requested: int
    truncated: bool = False
    note: str = ""

    @property
    def J(self) -> int:
        return len(self.stages)

    def applied(self, depth: int) -> list:
        return [st for st in self.stages if st.k_n_j <= depth]

    def to_dict(self) -> dict:
        return {
            "stages": [
                {"j": st.j, "n_j": st.n_j, "k_n_j": st.k_n_j, "sum_gamma": str(st.sum_gamma)}
                for st in self.stages
            ],
            "c2": str(self.schedule.c2),
            "requested": self.requested,
            "truncated": self.truncated,
            "note": self.note,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def pruning_levels(s: Schedule, J: int) -> DeviancePlan:
    """Least n(j) > n(j-1) with sum_{i<=n(j)} gamma_i > C2 2^(j+1), for j = 1..J."""
    partial = [Fraction(0)]
    for g in s.gamma:
        partial.append(partial[-1] + g)
    stages = []
    i = 1
    for j in range(1, J + 1):
        need = s.c2 * 2 ** (j + 1)
        while i <= s.n_det and partial[i] <= need:
            i += 1
        if i > s.n_det:
            break
        stages.append(Stage(j, i, s.k(i), partial[i]))
        i += 1
    truncated = len(stages) < J
    note = ""
    if truncated:
        total = partial[-1]
        note = (
            f"schedule truncated at j={len(stages) + 1}: sum of gamma within depth {s.depth} is {total}, "
            f"needs > {s.c2 * 2 ** (len(stages) + 2)}"
        )
        if total <= 4 * s.c2 and not stages:
            note += "; no stage is reachable, consistent with a convergent integral of phi(r)/r^2"
    return DeviancePlan(s, stages, J, truncated, note)


def deviant_mask(ix: np.ndarray, iy: np.ndarray, level: int, s: Schedule, n: int, iw: IntWeights = None) -> np.ndarray:
    """Vectorised deviance of level-``level`` squares at stage n (needs level >= k_n)."""
    iw = iw or IntWeights(s)
    S = np.zeros(len(ix), dtype=ix.dtype)
    for i in range(1, n + 1):
        sh = level - s.k(i)
        bx = (ix >> sh) & 1
        by = (iy >> sh) & 1
        S = S + (bx == by).astype(ix.dtype) * iw.w[i - 1]
    T = iw.total(n)
    return np.abs(4 * S - 2 * T) > T


def iter_pruned(r: Realization, plan: DeviancePlan, depth: int, budget: int = DEFAULT_NODE_BUDGET):
    """Yield the pruned frontier at levels 0..depth (plan may be None)."""
    s = r.schedule
    if depth > s.depth:
        raise ValueError(f"depth {depth} exceeds schedule depth {s.depth}")
    check_budget(s, depth, budget)
    at_level = {st.k_n_j: st for st in plan.applied(depth)} if plan is not None else {}
    iw = IntWeights(s)
    f = Frontier.root(r.master_seed, depth)
    yield f
    for level in range(1, depth + 1):
        f = f.grow(s.is_deterministic(level))
        st = at_level.get(level)
        if st is not None and len(f.ix):
            f = f.select(~deviant_mask(f.ix, f.iy, level, s, st.n_j, iw))
        yield f


def prune(r: Realization, plan: DeviancePlan, depth: int, budget: int = DEFAULT_NODE_BUDGET) -> list:
    """F'_0..F'_depth: the build with deviant squares removed at each stage level.

    Stages whose level k_{n(j)} lies beyond ``depth`` are skipped with a warning.
    """
    skipped = [st.j for st in plan.stages if st.k_n_j > depth] if plan is not None else []
    if skipped:
        warnings.warn(f"pruning stages {skipped} lie beyond depth {depth} and were skipped", StageSkippedWarning, stacklevel=2)
    return [f.squares() for f in iter_pruned(r, plan, depth, budget)]
