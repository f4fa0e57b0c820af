"""Lines, hit tests, projection lengths and Monte Carlo hitting estimates.

A line is kept exactly as an integer triple (A, B, C) meaning A x + B y = C.
For a level-k square with grid coordinates (i, j) the signed value
A i + B j - C 2^k at its lower-left corner is an integer, the other corners
add A, B and A + B, and the closed square meets the line iff these four
values do not share a strict sign.  Going to a child doubles the value and
adds A bx + B by, so a walk down the tree never leaves integer arithmetic.
This is what makes depth-256 walks exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .construction import (
    DIGIT_XY,
    Realization,
    address_to_xy,
    child_state,
    choice_of,
    derive_seed,
    root_state,
)
from .deviance import DeviancePlan, IntWeights, iter_pruned
from .gauge import DETERMINISTIC, Schedule

Z95 = 1.959963984540054
DEFAULT_NODE_CAP = 10**6


class VertexUnsafeError(ValueError):
    def __init__(self, line, depth, distance, eps, suggestion=None):
        msg = f"line passes within {distance:.3g} of a level-{depth} vertex (eps={eps:.3g})"
        if suggestion is not None:
            msg += (f"; a nearby safe line is --line={suggestion.A},{suggestion.B},{suggestion.C}"
                    f" (offset {suggestion.offset!r})")
        super().__init__(msg)
        self.line = line
        self.depth = depth
        self.suggestion = suggestion


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Line:
    """The line A x + B y = C with coprime integers, (A, B) != (0, 0).

    Angles follow two conventions: ``alpha`` is the direction of the line in
    [0, pi) and ``offset`` the signed distance along its left-hand normal
    (-sin alpha, cos alpha); ``theta`` is the direction the line is orthogonal
    to, and ``normal_offset`` the value of p . (cos theta, sin theta) on it.
    """

    A: int
    B: int
    C: int

    def __post_init__(self):
        if self.A == 0 and self.B == 0:
            raise ValueError("degenerate line")

    @classmethod
    def from_coefficients(cls, a, b, c) -> "Line":
        a, b, c = _frac(a), _frac(b), _frac(c)
        den = math.lcm(a.denominator, b.denominator, c.denominator)
        A, B, C = int(a * den), int(b * den), int(c * den)
        g = math.gcd(math.gcd(A, B), C)
        A, B, C = A // g, B // g, C // g
        if A < 0 or (A == 0 and B < 0):
            A, B, C = -A, -B, -C
        return cls(A, B, C)

    @classmethod
    def from_angle(cls, alpha: float, offset: float) -> "Line":
        """Line with direction ``alpha`` at signed distance ``offset`` along the left normal."""
        return cls.from_coefficients(-math.sin(alpha), math.cos(alpha), offset)

    @classmethod
    def from_normal(cls, theta: float, t: float) -> "Line":
        """The line {p : p . (cos theta, sin theta) = t}."""
        return cls.from_coefficients(math.cos(theta), math.sin(theta), t)

    @classmethod
    def horizontal(cls, y) -> "Line":
        return cls.from_coefficients(0, 1, y)

    @classmethod
    def vertical(cls, x) -> "Line":
        return cls.from_coefficients(1, 0, x)

    @classmethod
    def slope_intercept(cls, m, c) -> "Line":
        """y = m x + c."""
        return cls.from_coefficients(-_frac(m), 1, c)

    def rationalized(self, max_denominator: int = 10**6) -> "Line":
        """Nearby line with small-height rational coefficients."""
        norm = max(abs(self.A), abs(self.B))
        a, b, c = (Fraction(v, norm).limit_denominator(max_denominator) for v in (self.A, self.B, self.C))
        return Line.from_coefficients(a, b, c)

    def unit(self) -> tuple:
        """(a, b, c) as floats, scaled so that max(|a|, |b|) = 1."""
        m = max(abs(self.A), abs(self.B))
        return float(Fraction(self.A, m)), float(Fraction(self.B, m)), float(Fraction(self.C, m))

    @property
    def norm(self) -> float:
        return math.hypot(self.A, self.B)

    @property
    def alpha(self) -> float:
        a, b, _ = self.unit()
        return math.atan2(-a, b) % math.pi

    @property
    def offset(self) -> float:
        a, b, c = self.unit()
        al = self.alpha
        sign = 1.0 if (-a * math.sin(al) + b * math.cos(al)) > 0 else -1.0
        return sign * c / math.hypot(a, b)

    @property
    def theta(self) -> float:
        return (self.alpha + math.pi / 2) % math.pi

    @property
    def normal_offset(self) -> float:
        return self.offset if self.alpha < math.pi / 2 else -self.offset

    def value(self, x, y):
        """A x + B y - C, exact for Fractions."""
        return self.A * x + self.B * y - self.C

    def signed_distance(self, x: float, y: float) -> float:
        a, b, c = self.unit()
        return (a * x + b * y - c) / math.hypot(a, b)

    def contains_point(self, x, y) -> bool:
        return self.value(_frac(x), _frac(y)) == 0

    def corner_range(self) -> tuple:
        vals = (0, self.A, self.B, self.A + self.B)
        return min(vals), max(vals)

    def transformed(self, kind: str) -> "Line":
        """Image under a symmetry of the unit square (r90, r180, r270, fx, fy, fd, fa)."""
        A, B, C = self.A, self.B, self.C
        # each map sends (x, y) to (x', y'); substitute its inverse into A x + B y = C
        if kind == "fx":  # x -> 1 - x
            return Line.from_coefficients(-A, B, C - A)
        if kind == "fy":  # y -> 1 - y
            return Line.from_coefficients(A, -B, C - B)
        if kind == "fd":  # swap x and y
            return Line.from_coefficients(B, A, C)
        if kind == "fa":  # (x, y) -> (1 - y, 1 - x)
            return Line.from_coefficients(-B, -A, C - A - B)
        if kind == "r90":  # (x, y) -> (1 - y, x)
            return Line.from_coefficients(-B, A, C - B)
        if kind == "r180":
            return Line.from_coefficients(-A, -B, C - A - B)
        if kind == "r270":  # (x, y) -> (y, 1 - x)
            return Line.from_coefficients(B, -A, C - A)
        if kind == "id":
            return self
        raise ValueError(f"unknown symmetry {kind!r}")


SYMMETRIES = ("id", "r90", "r180", "r270", "fx", "fy", "fd", "fa")


# --- hit tests and counts ------------------------------------------------------

def hits_cell(line: Line, level: int, i: int, j: int) -> bool:
    v = line.A * i + line.B * j - line.C * (1 << level)
    lo, hi = line.corner_range()
    return v + lo <= 0 <= v + hi


def line_hits_square(line: Line, a: str) -> bool:
    """Does the line meet the closed square with address ``a``?"""
    i, j = address_to_xy(a)
    return hits_cell(line, len(a), i, j)


def meets_unit_square(line: Line) -> bool:
    return hits_cell(line, 0, 0, 0)


def _vertex_distance_scan(line: Line, depth: int) -> float:
    N = 1 << depth
    a, b, c = line.unit()
    k = np.arange(N + 1, dtype=float) / N
    if abs(b) >= abs(a):
        other = np.clip(np.rint((c - a * k) / b * N), 0, N) / N
        d = np.abs(a * k + b * other - c)
    else:
        other = np.clip(np.rint((c - b * k) / a * N), 0, N) / N
        d = np.abs(a * other + b * k - c)
    return float(d.min()) / math.hypot(a, b)


def _scaled_vertex_distance(line: Line, depth: int, scan_limit: int = 20) -> float:
    """2^depth times the distance to the nearest level-``depth`` vertex (a lower bound when deep)."""
    if depth <= scan_limit:
        return math.ldexp(_vertex_distance_scan(line, depth), depth)
    g = math.gcd(line.A, line.B)
    r = (line.C << depth) % g
    a, b, _ = line.unit()
    return float(Fraction(min(r, g - r), max(abs(line.A), abs(line.B)))) / math.hypot(a, b)


def min_vertex_distance(line: Line, depth: int, scan_limit: int = 20) -> float:
    """Distance from the line to the nearest level-``depth`` vertex in [0, 1]^2.

    Exact (to float rounding) by a column scan when depth <= scan_limit;
    beyond that a lower bound from the lattice of values A i + B j - C 2^depth,
    which only takes values congruent to -C 2^depth modulo gcd(A, B).
    """
    return math.ldexp(_scaled_vertex_distance(line, depth, scan_limit), -depth)


def default_eps(depth: int) -> float:
    return math.ldexp(1.0, -(depth + 20))


def _safe(line: Line, depth: int, eps: Optional[float]) -> tuple:
    scaled = _scaled_vertex_distance(line, depth)
    # compare at scale 2^depth so that deep levels neither overflow nor underflow
    limit = 2.0 ** -20 if eps is None else math.ldexp(eps, depth)
    return scaled > limit, math.ldexp(scaled, -depth)


def is_vertex_safe(line: Line, depth: int, eps: Optional[float] = None) -> bool:
    return _safe(line, depth, eps)[0]


def suggest_safe_line(line: Line, depth: int, eps: Optional[float] = None, max_height: int = 1000) -> Optional[Line]:
    """A nearby line that is vertex-safe at every depth.

    The direction is rounded to a slope p/q of height <= max_height and the
    offset to a multiple of 1/M with M a power of 3 and the numerator prime to
    3.  Then A i + B j - C 2^D is never divisible by M, so every dyadic vertex
    stays at distance >= 1 / (2^D M |(p, q)|) from the line.
    """
    al = line.alpha
    c, s_ = math.cos(al), math.sin(al)
    if abs(c) >= abs(s_):
        f = Fraction(s_ / c).limit_denominator(max_height)
        p, q = f.numerator, f.denominator
    else:
        f = Fraction(c / s_).limit_denominator(max_height)
        q, p = f.numerator, f.denominator
    d = line.signed_distance(0.5, 0.5)
    a, b, _ = line.unit()
    h = math.hypot(a, b)
    px, py = 0.5 - d * a / h, 0.5 - d * b / h
    s0 = -p * px + q * py
    M = 1
    while 3 * M * math.hypot(p, q) < 2.0 ** 19:
        M *= 3
    if M == 1:
        return None
    num = round(s0 * M)
    if num % 3 == 0:
        num += 1
    cand = Line.from_coefficients(-p * M, q * M, num)
    return cand if is_vertex_safe(cand, depth, eps) else None


def require_vertex_safe(line: Line, depth: int, eps: Optional[float] = None):
    ok, d = _safe(line, depth, eps)
    if not ok:
        sug = suggest_safe_line(line, depth, eps)
        raise VertexUnsafeError(line, depth, d, default_eps(depth) if eps is None else eps, sug)


def _floordiv(p: int, q: int) -> int:
    return p // q


def _ceildiv(p: int, q: int) -> int:
    return -((-p) // q)


def count_intersected_columns(line: Line, level: int) -> int:
    """Exact closed-square count by scanning the 2^level columns."""
    N = 1 << level
    A, B, CN = line.A, line.B, line.C * N
    if B == 0:
        # vertical line x = CN / A in grid units
        cols = sum(1 for i in range(N) if i * A <= CN <= (i + 1) * A) if A > 0 else 0
        return cols * N
    total = 0
    for i in range(N):
        p0, p1 = CN - A * i, CN - A * (i + 1)
        lo = min(_ceildiv(p0, B), _ceildiv(p1, B)) - 1
        hi = max(_floordiv(p0, B), _floordiv(p1, B))
        lo, hi = max(lo, 0), min(hi, N - 1)
        if hi >= lo:
            total += hi - lo + 1
    return total


def _chord(line: Line):
    """Endpoints of the line inside [0, 1]^2 as Fractions, or None."""
    A, B, C = line.A, line.B, line.C
    pts = set()
    if B != 0:
        for x in (0, 1):
            y = Fraction(C - A * x, B)
            if 0 <= y <= 1:
                pts.add((Fraction(x), y))
    if A != 0:
        for y in (0, 1):
            x = Fraction(C - B * y, A)
            if 0 <= x <= 1:
                pts.add((x, Fraction(y)))
    if not pts:
        return None
    pts = sorted(pts)
    return pts[0], pts[-1]


def count_intersected(line: Line, level: int, column_limit: int = 16) -> int:
    """A(line) = number of closed level-``level`` squares met by the line.

    Up to ``column_limit`` the count is an exact column scan.  Deeper levels
    use the crossing count 1 + (interior grid lines crossed), which is exact
    for lines avoiding every vertex and is only used for vertex-safe lines.
    """
    if level <= column_limit:
        return count_intersected_columns(line, level)
    require_vertex_safe(line, level)
    ch = _chord(line)
    if ch is None:
        return 0
    (x0, y0), (x1, y1) = ch
    N = 1 << level

    def crossings(u, v):
        u, v = min(u, v) * N, max(u, v) * N
        # integers strictly inside (u, v), restricted to 1..N-1
        lo = max(math.floor(u) + 1, 1)
        hi = min(math.ceil(v) - 1, N - 1)
        return max(0, hi - lo + 1)

    return 1 + crossings(x0, x1) + crossings(y0, y1)


# --- interval unions and projection lengths -------------------------------------

@dataclass
class IntervalUnion:
    """Disjoint closed intervals; touching or overlapping inputs are merged."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_intervals(cls, lo, hi) -> "IntervalUnion":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.size == 0:
            return cls(lo, hi)
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
        reach = np.maximum.accumulate(hi)
        start = np.empty(lo.size, dtype=bool)
        start[0] = True
        start[1:] = lo[1:] > reach[:-1]
        idx = np.flatnonzero(start)
        ends = np.append(idx[1:], lo.size) - 1
        return cls(lo[idx], reach[ends])

    @property
    def intervals(self) -> list:
        return list(zip(self.lo.tolist(), self.hi.tolist()))

    @property
    def total_length(self) -> float:
        return float(np.sum(self.hi - self.lo))

    def __len__(self):
        return len(self.lo)


def projected_intervals(squares, theta: float) -> tuple:
    x0, y0, side = squares.rects()
    c, s = math.cos(theta), math.sin(theta)
    lo = x0 * c + y0 * s + side * (min(0.0, c) + min(0.0, s))
    return lo, lo + side * (abs(c) + abs(s))


def projection_length(squares, theta: float) -> float:
    """Length of the projection of the union of ``squares`` onto direction theta."""
    if len(squares) == 0:
        return 0.0
    lo, hi = projected_intervals(squares, theta)
    return IntervalUnion.from_intervals(lo, hi).total_length


# --- Monte Carlo ------------------------------------------------------------------

@dataclass
class McReport:
    trials: int
    hits_or_sum: float
    estimate: float
    ci_lo: float
    ci_hi: float
    bound: Optional[Fraction] = None
    aborted_trials: int = 0
    master_seed: int = 0
    params: dict = field(default_factory=dict)
    seed_rule: str = "trial seed = derive_seed(master_seed, trial_index)"

    @property
    def half_width(self) -> float:
        return (self.ci_hi - self.ci_lo) / 2

    def to_dict(self) -> dict:
        d = {
            "trials": self.trials,
            "hits_or_sum": self.hits_or_sum,
            "estimate": self.estimate,
            "ci": [self.ci_lo, self.ci_hi],
            "bound": None if self.bound is None else float(self.bound),
            "bound_exact": None if self.bound is None else str(self.bound),
            "aborted_trials": self.aborted_trials,
            "master_seed": self.master_seed,
            "seed_rule": self.seed_rule,
            "params": self.params,
        }
        if self.bound is not None:
            d["within_bound"] = self.ci_hi <= float(self.bound)
        return d


def wilson(hits: int, n: int) -> tuple:
    if n == 0:
        return 0.0, 1.0
    lo, hi = proportion_confint(hits, n, alpha=0.05, method="wilson")
    return float(lo), float(hi)


def normal_ci(values) -> tuple:
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    if v.size < 2:
        return m, m, m
    # centring on a sample keeps the spread of identical values exactly 0
    hw = Z95 * float((v - v[0]).std(ddof=1)) / math.sqrt(v.size)
    return m, m - hw, m + hw


class LineWalker:
    """Lazy, line-restricted realisation of the pruned construction.

    Only squares meeting the line are expanded; at random levels only the
    child picked by the seeded oracle is considered.  Deviance is checked at
    every applied stage level and, with ``final_n``, at the target level.
    """

    def __init__(self, s: Schedule, plan: Optional[DeviancePlan], line: Line, level: int,
                 final_n: Optional[int] = None, node_cap: int = DEFAULT_NODE_CAP):
        if level > s.depth:
            raise ValueError(f"level {level} exceeds schedule depth {s.depth}")
        self.line = line
        self.level = level
        self.node_cap = node_cap
        iw = IntWeights(s)
        self.det = [False] + [s.step_kind[m] == DETERMINISTIC for m in range(1, level + 1)]
        self.weight = [0] * (level + 1)
        for i, k in enumerate(s.det_indices, 1):
            if k <= level:
                self.weight[k] = iw.w[i - 1]
        self.check = {}
        for st in (plan.applied(level) if plan is not None else []):
            self.check[st.k_n_j] = iw.total(st.n_j)
        if final_n is not None:
            if s.k(final_n) != level:
                raise ValueError(f"final check n={final_n} is at level {s.k(final_n)}, not {level}")
            self.check[level] = iw.total(final_n)
        self.lo, self.hi = line.corner_range()
        self.off = [line.A * bx + line.B * by for bx, by in DIGIT_XY]

    def trial(self, seed: int) -> tuple:
        """(hit, nodes_expanded, aborted) for one realisation."""
        lo, hi, level = self.lo, self.hi, self.level
        v0 = -self.line.C
        if not (v0 + lo <= 0 <= v0 + hi):
            return False, 0, False
        if level == 0:
            return True, 0, False
        det, weight, check, off = self.det, self.weight, self.check, self.off
        stack = [(0, v0, root_state(seed), 0)]
        nodes = 0
        while stack:
            L, v, h, S = stack.pop()
            L1 = L + 1
            digits = range(4) if det[L1] else (choice_of(h),)
            w = weight[L1]
            T = check.get(L1)
            for d in digits:
                v1 = 2 * v + off[d]
                if not (v1 + lo <= 0 <= v1 + hi):
                    continue
                S1 = S + w if (w and (d == 0 or d == 2)) else S
                if T is not None and abs(4 * S1 - 2 * T) > T:
                    continue
                if L1 == level:
                    return True, nodes, False
                nodes += 1
                if nodes > self.node_cap:
                    return False, nodes, True
                stack.append((L1, v1, child_state(h, d), S1))
        return False, nodes, False


def _run_hits(walker: LineWalker, trials: int, master_seed: int) -> tuple:
    hits = aborted = 0
    for t in range(trials):
        hit, _, ab = walker.trial(derive_seed(master_seed, t))
        if ab:
            aborted += 1
        elif hit:
            hits += 1
    return hits, aborted


def hit_probability_level(s: Schedule, plan: Optional[DeviancePlan], line: Line, level: int, trials: int,
                          master_seed: int, final_n: Optional[int] = None, node_cap: int = DEFAULT_NODE_CAP,
                          vertex_safe: bool = True, eps: Optional[float] = None) -> McReport:
    """Probability that the pruned family at ``level`` meets ``line``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if vertex_safe:
        require_vertex_safe(line, level, eps)
    walker = LineWalker(s, plan, line, level, final_n, node_cap)
    hits, aborted = _run_hits(walker, trials, master_seed)
    done = trials - aborted
    lo, hi = wilson(hits, done)
    params = {"level": level, "line": [str(line.A), str(line.B), str(line.C)], "final_n": final_n,
              "stages": [st.j for st in (plan.applied(level) if plan else [])]}
    return McReport(trials, hits, hits / done if done else float("nan"), lo, hi, None, aborted, master_seed, params)


def hit_bound(s: Schedule, n: int) -> Fraction:
    """64 / (gamma_1 + ... + gamma_n)."""
    return 64 / s.gamma_sum(n)


def hit_probability_mc(s: Schedule, plan: Optional[DeviancePlan], line: Line, n: int, trials: int,
                       master_seed: int, node_cap: int = DEFAULT_NODE_CAP, prune_final: bool = True,
                       eps: Optional[float] = None) -> McReport:
    """Estimate P(R'_{k_n} meets line) and attach the bound 64 / sum gamma_i.

    R'_{k_n} is the level-k_n family with every applied plan stage removed and,
    when ``prune_final``, also the squares deviant at stage n itself.
    """
    if n < 1 or n > s.n_det:
        raise ValueError(f"n={n} outside 1..{s.n_det} deterministic steps")
    level = s.k(n)
    rep = hit_probability_level(s, plan, line, level, trials, master_seed,
                                final_n=n if prune_final else None, node_cap=node_cap, eps=eps)
    rep.bound = hit_bound(s, n)
    rep.params.update(n=n, k_n=level, sum_gamma=str(s.gamma_sum(n)), prune_final=prune_final)
    return rep


def hit_probability_exact(s: Schedule, plan: Optional[DeviancePlan], line: Line, level: int,
                          final_n: Optional[int] = None) -> Fraction:
    """Exact hitting probability by recursion over line-touching squares.

    At a deterministic step the four subtrees are independent, so the miss
    probability multiplies; at a random step each child is kept with
    probability 1/4.  No seeded oracle is involved.
    """
    iw = IntWeights(s)
    weight = [0] * (level + 1)
    for i, k in enumerate(s.det_indices, 1):
        if k <= level:
            weight[k] = iw.w[i - 1]
    check = {st.k_n_j: iw.total(st.n_j) for st in (plan.applied(level) if plan else [])}
    if final_n is not None:
        check[level] = iw.total(final_n)
    quarter = Fraction(1, 4)

    def q(L, i, j, S):
        if not hits_cell(line, L, i, j):
            return Fraction(0)
        T = check.get(L)
        if T is not None and abs(4 * S - 2 * T) > T:
            return Fraction(0)
        if L == level:
            return Fraction(1)
        kids = []
        for d, (bx, by) in enumerate(DIGIT_XY):
            w = weight[L + 1] if d in (0, 2) else 0
            kids.append(q(L + 1, 2 * i + bx, 2 * j + by, S + w))
        if s.step_kind[L + 1] == DETERMINISTIC:
            miss = Fraction(1)
            for p in kids:
                miss *= 1 - p
            return 1 - miss
        return quarter * sum(kids)

    return q(0, 0, 0, 0)


def favard_mc(s: Schedule, plan: Optional[DeviancePlan], theta: float, depth: int, trials: int,
              master_seed: int) -> McReport:
    """Mean projection length onto direction theta of the pruned family at ``depth``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lengths = []
    for t in range(trials):
        r = Realization(s, derive_seed(master_seed, t))
        for f in iter_pruned(r, plan, depth):
            pass
        lengths.append(projection_length(f.squares(), theta))
    m, lo, hi = normal_ci(lengths)
    params = {"theta": theta, "depth": depth, "stages": [st.j for st in (plan.applied(depth) if plan else [])],
              "variance": float(np.var(np.asarray(lengths) - lengths[0], ddof=1)) if trials > 1 else 0.0}
    return McReport(trials, float(np.sum(lengths)), m, lo, hi, None, 0, master_seed, params)


def projection_range(theta: float) -> tuple:
    c, s = math.cos(theta), math.sin(theta)
    vals = (0.0, c, s, c + s)
    return min(vals), max(vals)


@dataclass
class FubiniCheck:
    favard: McReport
    integral: float
    integral_half_width: float
    grid: int

    @property
    def difference(self) -> float:
        return abs(self.favard.estimate - self.integral)

    @property
    def tolerance(self) -> float:
        return self.favard.half_width + self.integral_half_width

    @property
    def agree(self) -> bool:
        return self.difference <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "favard": self.favard.to_dict(),
            "integral": self.integral,
            "integral_ci": [self.integral - self.integral_half_width, self.integral + self.integral_half_width],
            "grid": self.grid,
            "difference": float(self.difference),
            "tolerance": float(self.tolerance),
            "agree": bool(self.agree),
        }


def fubini_check(s: Schedule, plan: Optional[DeviancePlan], theta: float, depth: int, favard_trials: int,
                 hit_trials: int, master_seed: int, grid: int = 256) -> FubiniCheck:
    """Compare E[projection length] with the integral over offsets of hit probabilities.

    The two routes use independent seed streams.  The integral is a trapezoid
    rule over ``grid`` offsets spanning the projection of the unit square.
    """
    fav = favard_mc(s, plan, theta, depth, favard_trials, derive_seed(master_seed, 0))
    t0, t1 = projection_range(theta)
    ts = np.linspace(t0, t1, grid)
    h = (t1 - t0) / (grid - 1)
    wts = np.full(grid, h)
    wts[0] = wts[-1] = h / 2
    hit_seed = derive_seed(master_seed, 1)
    integral = var = 0.0
    for g, (t, w) in enumerate(zip(ts, wts)):
        line = Line.from_normal(theta, float(t))
        rep = hit_probability_level(s, plan, line, depth, hit_trials, derive_seed(hit_seed, g), vertex_safe=False)
        p = rep.estimate
        integral += float(w) * p
        var += float(w) ** 2 * p * (1 - p) / hit_trials
    return FubiniCheck(fav, integral, Z95 * math.sqrt(var), grid)
