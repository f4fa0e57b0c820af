"""Gauge functions on dyadic scales and the construction schedule they induce.

A gauge is only ever evaluated at r = 2^-n, so every gauge here is really a
sequence ``phi[n] = phi(2^-n)`` normalised to ``phi[0] = 1``.  Values are kept
as exact ``Fraction`` whenever that is possible (tables, integral powers) so
that the schedule inequalities can be checked without rounding.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

DETERMINISTIC = "D"
RANDOM = "R"


class GaugeError(ValueError):
    """Raised for gauges that cannot be evaluated or violate regularity."""


class BoundaryWarning(UserWarning):
    """The floor formula for alpha was decided in floating point at a lattice point."""


class ClampWarning(UserWarning):
    """alpha had to be clamped to keep unit increments."""


class TruncatedInfimumWarning(UserWarning):
    """The grid infimum used by ``regularize`` was still decreasing at the last level."""


@dataclass(frozen=True)
class GaugeSpec:
    """A gauge restricted to the dyadic grid.

    kind is ``"power"`` (phi = r^a), ``"powerlog"`` (phi = r^a max(log 1/r, 1)^b)
    or ``"table"`` (explicit values of phi(2^-n), n = 0, 1, ...).
    """

    kind: str
    a: float = 1.0
    b: float = 0.0
    values: tuple = ()
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in ("power", "powerlog", "table"):
            raise GaugeError(f"unknown gauge kind {self.kind!r}")
        if self.kind in ("power", "powerlog") and not self.a > 0:
            raise GaugeError("invalid gauge: exponent a must be positive")
        if self.kind == "table":
            if not self.values:
                raise GaugeError("invalid gauge: empty table")
            vals = tuple(Fraction(v) if not isinstance(v, Fraction) else v for v in self.values)
            for n, v in enumerate(vals):
                if v <= 0:
                    raise GaugeError(f"invalid gauge: non-positive value at n={n}")
            if self.normalize:
                vals = tuple(v / vals[0] for v in vals)
            object.__setattr__(self, "values", vals)

    @classmethod
    def power(cls, a: float) -> "GaugeSpec":
        return cls("power", a=a)

    @classmethod
    def powerlog(cls, a: float, b: float) -> "GaugeSpec":
        return cls("powerlog", a=a, b=b)

    @classmethod
    def table(cls, values: Sequence, normalize: bool = True) -> "GaugeSpec":
        return cls("table", values=tuple(values), normalize=normalize)

    @classmethod
    def parse(cls, text: str) -> "GaugeSpec":
        """Parse ``power:a=1``, ``powerlog:a=1,b=-2`` or ``table:@path``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        if kind == "table":
            if not rest.startswith("@"):
                raise GaugeError("table gauge must be given as table:@<path>")
            return cls.table(read_table(rest[1:]))
        params = {}
        for item in filter(None, rest.split(",")):
            key, eq, val = item.partition("=")
            if not eq:
                raise GaugeError(f"malformed gauge parameter {item!r}")
            params[key.strip()] = float(val)
        if kind == "power":
            return cls.power(params.get("a", 1.0))
        if kind == "powerlog":
            return cls.powerlog(params.get("a", 1.0), params.get("b", 0.0))
        raise GaugeError(f"unknown gauge kind {kind!r}")

    def __str__(self):
        if self.kind == "power":
            return f"power:a={self.a:g}"
        if self.kind == "powerlog":
            return f"powerlog:a={self.a:g},b={self.b:g}"
        return f"table:[{len(self.values)} values]"

    @property
    def max_level(self) -> Optional[int]:
        return len(self.values) - 1 if self.kind == "table" else None

    def _check_level(self, n: int):
        if n < 0:
            raise GaugeError("gauge levels start at n=0")
        if self.kind == "table" and n >= len(self.values):
            raise GaugeError(f"table gauge has no value for n={n} (has {len(self.values)})")

    def exact(self, n: int) -> Optional[Fraction]:
        """phi(2^-n) as a Fraction, or None if it is not a known rational."""
        self._check_level(n)
        if self.kind == "table":
            return self.values[n]
        # the log factor max(n log 2, 1)^b is exactly 1 only for n <= 1
        if self.kind == "powerlog" and self.b != 0 and n >= 2:
            return None
        # read the exponent as the decimal the user wrote (0.1 means 1/10)
        e = Fraction(repr(float(self.a))) * n
        if e.denominator == 1:
            return Fraction(1, 2 ** int(e))
        return None

    def __call__(self, n: int) -> float:
        """phi(2^-n) as a float."""
        self._check_level(n)
        if self.kind == "table":
            return float(self.values[n])
        val = 2.0 ** (-self.a * n)
        if self.kind == "powerlog" and self.b != 0:
            val *= max(n * math.log(2.0), 1.0) ** self.b
        if not val > 0:
            raise GaugeError(f"invalid gauge: value underflows at n={n}")
        return val

    def log4_inverse(self, n: int) -> float:
        """log(phi(2^-n)) / log(1/4), computed without forming phi when possible."""
        self._check_level(n)
        if self.kind == "table":
            return -math.log(self.values[n]) / math.log(4.0)
        x = self.a * n / 2.0
        if self.kind == "powerlog" and self.b != 0:
            x -= self.b * math.log(max(n * math.log(2.0), 1.0)) / math.log(4.0)
        return x

    def grid(self, depth: int) -> list:
        """Values phi(2^-n) for n = 0..depth, exact where possible."""
        out = []
        for n in range(depth + 1):
            e = self.exact(n)
            out.append(e if e is not None else self(n))
        return out


def read_table(path) -> list:
    """Read one positive decimal per line; line n is phi(2^-n)."""
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(Fraction(line))
        except ValueError as exc:
            raise GaugeError(f"{path}:{lineno}: not a decimal: {line!r}") from exc
    return values


@dataclass
class Violation:
    n: int
    kind: str  # "monotone" or "regul"
    detail: str


@dataclass
class ValidationReport:
    depth: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def levels(self, kind: Optional[str] = None) -> list:
        return [v.n for v in self.violations if kind is None or v.kind == kind]

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "ok": self.ok,
            "violations": [{"n": v.n, "kind": v.kind, "detail": v.detail} for v in self.violations],
        }


def _le(x, y, rtol=1e-12) -> bool:
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        return x <= y
    return float(x) <= float(y) * (1 + rtol)


def validate_gauge(g: GaugeSpec, depth: int) -> ValidationReport:
    """Check monotonicity and phi(r)/r^2 decreasing on the grid n = 0..depth."""
    if depth < 1:
        raise GaugeError("depth must be >= 1")
    vals = g.grid(depth)
    for n, v in enumerate(vals):
        if not v > 0:
            raise GaugeError(f"invalid gauge: non-positive value at n={n}")
    report = ValidationReport(depth)
    for n in range(1, depth + 1):
        prev, cur = vals[n - 1], vals[n]
        if not _le(cur, prev):
            report.violations.append(Violation(n, "monotone", f"phi(2^-{n})={float(cur):.6g} > phi(2^-{n - 1})={float(prev):.6g}"))
        if not _le(prev * 4 ** (n - 1), cur * 4 ** n):
            report.violations.append(Violation(n, "regul", f"phi(2^-n)*4^n decreases at n={n}"))
    return report


@dataclass(frozen=True)
class Schedule:
    """alpha, step kinds, lambda and gamma sequences for a gauge up to ``depth``.

    ``step_kind[n]`` describes the transition from level n-1 to n (index 0 unused).
    ``det_indices[i-1]`` is k_i, the level of the i-th deterministic step.
    """

    depth: int
    alpha: tuple
    step_kind: tuple
    det_indices: tuple
    lam: tuple
    gamma: tuple
    c2: Fraction
    warnings: tuple = ()
    gauge: Optional[GaugeSpec] = field(default=None, compare=False, repr=False)

    def k(self, i: int) -> int:
        return self.det_indices[i - 1]

    @property
    def n_det(self) -> int:
        return len(self.det_indices)

    def is_deterministic(self, level: int) -> bool:
        return self.step_kind[level] == DETERMINISTIC

    def gamma_sum(self, n: int) -> Fraction:
        if n > self.n_det:
            raise ValueError(f"only {self.n_det} deterministic steps within depth {self.depth}")
        return sum(self.gamma[:n], Fraction(0))

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "alpha": list(self.alpha),
            "step_kind": list(self.step_kind[1:]),
            "det_indices": list(self.det_indices),
            "lambda": [str(x) for x in self.lam],
            "gamma": [str(x) for x in self.gamma],
            "c2": str(self.c2),
            "c2_float": float(self.c2),
            "warnings": list(self.warnings),
        }


def _alpha_at(g: GaugeSpec, n: int, notes: list) -> int:
    x = g.log4_inverse(n)
    m = round(x)
    if abs(x - m) > 1e-9:
        return math.floor(x)
    exact = g.exact(n)
    if exact is None:
        notes.append(f"n={n}: floor formula decided in floating point at a lattice point")
        warnings.warn(f"alpha_{n} decided in floating point near integer {m}", BoundaryWarning, stacklevel=3)
        return math.floor(x)
    # alpha is the largest integer with phi <= 4^-alpha
    return m if exact <= Fraction(4) ** (-m) else m - 1


def derive_schedule(g: GaugeSpec, depth: int, *, strict: bool = True, max_clamp_fraction: float = 0.1) -> Schedule:
    """Derive alpha_n = floor(log phi(2^-n) / log(1/4)) and everything built from it."""
    if g.kind == "table" and g.values[0] != 1:
        g = GaugeSpec.table(g.values)
    if strict:
        report = validate_gauge(g, depth)
        if not report.ok:
            v = report.violations[0]
            raise GaugeError(f"gauge fails validation at n={v.n} ({v.kind}); {len(report.violations)} violation(s)")
    notes = []
    alpha = [0]
    clamps = 0
    for n in range(1, depth + 1):
        a = _alpha_at(g, n, notes)
        lo, hi = alpha[-1], alpha[-1] + 1
        if a < lo or a > hi:
            clamps += 1
            notes.append(f"n={n}: alpha {a} clamped into [{lo}, {hi}]")
            a = min(max(a, lo), hi)
        alpha.append(a)
    if clamps:
        if clamps > max_clamp_fraction * depth:
            raise GaugeError(f"gauge violates regularity too strongly ({clamps} of {depth} levels clamped)")
        warnings.warn(f"alpha clamped at {clamps} level(s)", ClampWarning, stacklevel=2)

    kinds = [None] + [DETERMINISTIC if alpha[n] > alpha[n - 1] else RANDOM for n in range(1, depth + 1)]
    det = tuple(n for n in range(1, depth + 1) if kinds[n] == DETERMINISTIC)
    lam = tuple(Fraction(2) ** (n - 2 * alpha[n]) for n in range(depth + 1))
    gamma = tuple(lam[k] for k in det)
    return Schedule(depth, tuple(alpha), tuple(kinds), det, lam, gamma, max(lam), tuple(notes), g)


@dataclass
class DivergenceReport:
    lambda_partial: list
    gamma_partial: list
    c2: Fraction
    classification: str
    supcon_fails: bool
    pruning_possible: bool
    note: str = "classification is heuristic over a finite range; c2 is max lambda_n over the computed range, not a proven supremum"

    def to_dict(self) -> dict:
        return {
            "lambda_partial": [str(x) for x in self.lambda_partial],
            "gamma_partial": [str(x) for x in self.gamma_partial],
            "lambda_sum": str(self.lambda_partial[-1]),
            "gamma_sum": str(self.gamma_partial[-1]) if self.gamma_partial else "0",
            "c2": str(self.c2),
            "classification": self.classification,
            "supcon_fails": self.supcon_fails,
            "pruning_possible": self.pruning_possible,
            "note": self.note,
        }


def _partial(seq) -> list:
    out, acc = [], Fraction(0)
    for x in seq:
        acc += x
        out.append(acc)
    return out


def divergence_report(s: Schedule) -> DivergenceReport:
    """Partial sums of lambda_n and gamma_i plus a heuristic trend label.

    The label compares the lambda mass in the second half of the range with
    the first half: a divergent series keeps adding comparable mass, a
    convergent one adds a vanishing share.
    """
    lp = _partial(s.lam)
    gp = _partial(s.gamma)
    N = len(s.lam)
    half = N // 2
    first = lp[half - 1] if half else Fraction(0)
    second = lp[-1] - first
    if N < 8 or first == 0:
        label = "inconclusive"
    elif second >= first / 2:
        label = "diverging-evidence"
    elif second <= first / 100:
        label = "converging-evidence"
    else:
        label = "inconclusive"
    # lambda still setting new maxima late in the range: no finite C2 in sight
    q = max(1, (3 * N) // 4)
    head_max = max(s.lam[:q])
    tail_max = max(s.lam[q:]) if q < N else head_max
    supcon_fails = tail_max > 2 * head_max
    pruning = bool(gp) and gp[-1] > 4 * s.c2
    return DivergenceReport(lp, gp, s.c2, label, supcon_fails, pruning)


def infimum_truncated(g: GaugeSpec, depth: int) -> bool:
    """True if phi(2^-m) 4^m is still strictly decreasing at m = depth."""
    vals = g.grid(depth)
    if depth < 1:
        return False
    return vals[depth] * 4 ** depth < vals[depth - 1] * 4 ** (depth - 1)


def regularize(g: GaugeSpec, depth: int) -> GaugeSpec:
    """Largest gauge below g on the grid with phi_1(r)/r^2 weakly decreasing.

    phi_1(2^-n) = 4^-n min{ phi(2^-m) 4^m : n <= m <= depth }, a suffix minimum.
    Emits ``TruncatedInfimumWarning`` when the minimum is not resolved by depth.
    """
    vals = g.grid(depth)
    report = validate_gauge(g, depth)
    bad = report.levels("monotone")
    if bad:
        raise GaugeError(f"regularize needs a weakly increasing gauge; fails at n={bad[0]}")
    scaled = [Fraction(v) * 4 ** m for m, v in enumerate(vals)]
    out = [None] * (depth + 1)
    run = scaled[depth]
    for n in range(depth, -1, -1):
        run = min(run, scaled[n])
        out[n] = run / 4 ** n
    if infimum_truncated(g, depth):
        warnings.warn(f"grid infimum still decreasing at m={depth}", TruncatedInfimumWarning, stacklevel=2)
    return GaugeSpec.table(out, normalize=False)
