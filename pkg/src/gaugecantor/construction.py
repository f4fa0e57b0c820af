"""Dyadic addressing and seeded realizations of the nested square families F_n.

Digit labelling of the four children of a square::

    3 | 2
    --+--
    0 | 1

so {0, 2} is the main diagonal and {1, 3} the anti-diagonal.  A square of
level k is identified either by its address string or by integer grid
coordinates (ix, iy) with lower-left corner (ix / 2^k, iy / 2^k).

Random choices come from a hash chain keyed by the master seed: the state of
a square is mix(state of parent + digit), and the child kept at a random
level is read off the parent's state.  The choice at a square therefore
depends only on (seed, address), never on traversal order, which is what
lets eager builds and lazy line-restricted walks agree.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gauge import DETERMINISTIC, Schedule

MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_ROOT_SALT = 0x5851F42D4C957F2D
_CHOICE_SALT = 0xD1B54A32D192ED03

DEFAULT_NODE_BUDGET = int(os.environ.get("GAUGECANTOR_NODE_BUDGET", 2**26))

# digit -> (bx, by) and back
DIGIT_XY = ((0, 0), (1, 0), (1, 1), (0, 1))
XY_DIGIT = {xy: d for d, xy in enumerate(DIGIT_XY)}


class BudgetError(RuntimeError):
    def __init__(self, level: int, size: int, budget: int):
        super().__init__(f"node budget {budget} exceeded at level {level} ({size} squares)")
        self.level = level
        self.size = size
        self.budget = budget


def mix64(z: int) -> int:
    """splitmix64 finaliser on a Python int."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def root_state(seed: int) -> int:
    return mix64((seed & MASK) ^ _ROOT_SALT)


def child_state(state: int, digit: int) -> int:
    return mix64((state + (digit + 1) * _GOLDEN) & MASK)


def choice_of(state: int) -> int:
    return mix64(state ^ _CHOICE_SALT) >> 62


def _child_state_array(state: np.ndarray, digit: int) -> np.ndarray:
    return mix64_array(state + np.uint64((digit + 1) * _GOLDEN & MASK))


def _choice_array(state: np.ndarray) -> np.ndarray:
    return (mix64_array(state ^ np.uint64(_CHOICE_SALT)) >> np.uint64(62)).astype(np.int64)


def derive_seed(master_seed: int, index: int) -> int:
    """Per-trial seed from (master seed, trial index) by counter hashing."""
    return mix64((mix64(master_seed & MASK) + (index + 1) * _GOLDEN) & MASK)


# --- addresses ---------------------------------------------------------------

def check_address(a: str) -> str:
    if any(c not in "0123" for c in a):
        raise ValueError(f"address must be over 0-3, got {a!r}")
    return a


def address_to_xy(a: str) -> tuple:
    ix = iy = 0
    for c in check_address(a):
        bx, by = DIGIT_XY[int(c)]
        ix = 2 * ix + bx
        iy = 2 * iy + by
    return ix, iy


def xy_to_address(ix: int, iy: int, level: int) -> str:
    digits = []
    for m in range(level - 1, -1, -1):
        digits.append(str(XY_DIGIT[((ix >> m) & 1, (iy >> m) & 1)]))
    return "".join(digits)


def square_rect(a: str) -> tuple:
    """(x0, y0, side) of the closed square with address ``a``, as exact Fractions."""
    ix, iy = address_to_xy(a)
    side = Fraction(1, 2 ** len(a))
    return ix * side, iy * side, side


def _coord_dtype(level: int):
    return np.int64 if level <= 62 else object


@dataclass(frozen=True, eq=False)
class SquareSet:
    """Squares of one level, stored as grid coordinates in canonical address order."""

    level: int
    ix: np.ndarray
    iy: np.ndarray

    def __len__(self):
        return len(self.ix)

    def __eq__(self, other):
        return (
            isinstance(other, SquareSet)
            and self.level == other.level
            and len(self) == len(other)
            and bool(np.all(self.ix == other.ix))
            and bool(np.all(self.iy == other.iy))
        )

    @classmethod
    def from_addresses(cls, addresses) -> "SquareSet":
        addrs = sorted(set(addresses))
        levels = {len(a) for a in addrs}
        if len(levels) > 1:
            raise ValueError("all addresses in a SquareSet must share one level")
        level = levels.pop() if levels else 0
        dt = _coord_dtype(level)
        xy = [address_to_xy(a) for a in addrs]
        return cls(level, np.array([p[0] for p in xy], dtype=dt), np.array([p[1] for p in xy], dtype=dt))

    def addresses(self) -> list:
        return [xy_to_address(int(x), int(y), self.level) for x, y in zip(self.ix, self.iy)]

    def address_set(self) -> set:
        return set(self.addresses())

    def rects(self) -> tuple:
        """Float arrays (x0, y0) and the common side length."""
        side = 2.0 ** -self.level
        return self.ix.astype(float) * side, self.iy.astype(float) * side, side

    def rows(self):
        for a, (x, y) in zip(self.addresses(), zip(self.ix, self.iy)):
            side = Fraction(1, 2 ** self.level)
            yield self.level, a, x * side, y * side, side

    def to_csv(self, fh=None) -> str:
        buf = fh or io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "address", "x0", "y0", "side"])
        for level, a, x0, y0, side in self.rows():
            w.writerow([level, a, repr(float(x0)), repr(float(y0)), repr(float(side))])
        return buf.getvalue() if fh is None else ""

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "squares": [
                {"address": a, "x0": str(x0), "y0": str(y0), "side": str(side)}
                for _, a, x0, y0, side in self.rows()
            ],
        }


# --- realizations --------------------------------------------------------------

@dataclass(frozen=True)
class Realization:
    schedule: Schedule
    master_seed: int

    @property
    def root(self) -> int:
        return root_state(self.master_seed)

    def state(self, address: str) -> int:
        h = self.root
        for c in address:
            h = child_state(h, int(c))
        return h

    def choice(self, prefix: str) -> int:
        """Child digit kept below ``prefix`` when the next level is random."""
        return choice_of(self.state(prefix))


def contains(r: Realization, a: str) -> bool:
    """Membership of address ``a`` in F_level without materialising siblings."""
    check_address(a)
    if len(a) > r.schedule.depth:
        raise ValueError(f"address level {len(a)} exceeds schedule depth {r.schedule.depth}")
    h = r.root
    for j, c in enumerate(a, 1):
        d = int(c)
        if r.schedule.step_kind[j] != DETERMINISTIC and choice_of(h) != d:
            return False
        h = child_state(h, d)
    return True


@dataclass
class Frontier:
    """Working arrays for eager growth: coordinates plus hash-chain states."""

    level: int
    ix: np.ndarray
    iy: np.ndarray
    h: np.ndarray

    @classmethod
    def root(cls, seed: int, max_level: int) -> "Frontier":
        dt = _coord_dtype(max_level)
        return cls(0, np.zeros(1, dtype=dt), np.zeros(1, dtype=dt), np.array([root_state(seed)], dtype=np.uint64))

    def squares(self) -> SquareSet:
        return SquareSet(self.level, self.ix.copy(), self.iy.copy())

    def select(self, keep: np.ndarray) -> "Frontier":
        return Frontier(self.level, self.ix[keep], self.iy[keep], self.h[keep])

    def grow(self, deterministic: bool) -> "Frontier":
        if deterministic:
            n = len(self.ix)
            ix = np.empty(4 * n, dtype=self.ix.dtype)
            iy = np.empty(4 * n, dtype=self.iy.dtype)
            h = np.empty(4 * n, dtype=np.uint64)
            for d, (bx, by) in enumerate(DIGIT_XY):
                ix[d::4] = 2 * self.ix + bx
                iy[d::4] = 2 * self.iy + by
                h[d::4] = _child_state_array(self.h, d)
            return Frontier(self.level + 1, ix, iy, h)
        digits = _choice_array(self.h)
        bx = np.array([xy[0] for xy in DIGIT_XY])[digits]
        by = np.array([xy[1] for xy in DIGIT_XY])[digits]
        h = mix64_array(self.h + (digits.astype(np.uint64) + np.uint64(1)) * np.uint64(_GOLDEN))
        return Frontier(self.level + 1, 2 * self.ix + bx.astype(self.ix.dtype), 2 * self.iy + by.astype(self.iy.dtype), h)


def check_budget(schedule: Schedule, depth: int, budget: int = DEFAULT_NODE_BUDGET):
    for n in range(depth + 1):
        size = 4 ** schedule.alpha[n]
        if size > budget:
            raise BudgetError(n, size, budget)


def build(r: Realization, depth: int, budget: int = DEFAULT_NODE_BUDGET) -> list:
    """Eagerly materialise F_0..F_depth as SquareSets."""
    s = r.schedule
    if depth > s.depth:
        raise ValueError(f"depth {depth} exceeds schedule depth {s.depth}")
    check_budget(s, depth, budget)
    f = Frontier.root(r.master_seed, depth)
    out = [f.squares()]
    for n in range(1, depth + 1):
        f = f.grow(s.is_deterministic(n))
        out.append(f.squares())
    return out
