"""Hypothesis strategies shared by the test modules."""
from fractions import Fraction

from hypothesis import strategies as st


def _cumulative(ratios):
    vals = [Fraction(1)]
    for q in ratios:
        vals.append(vals[-1] * q)
    return vals


def valid_tables(depth=32):
    """Tables with phi decreasing in n and phi * 4^n increasing: ratios in [1/4, 1]."""
    ratio = st.integers(16, 64).map(lambda k: Fraction(k, 64))
    return st.lists(ratio, min_size=depth, max_size=depth).map(_cumulative)


def monotone_tables(depth=32):
    """Weakly decreasing in n, no regularity required (ratios in [1/64, 1])."""
    ratio = st.integers(1, 64).map(lambda k: Fraction(k, 64))
    return st.lists(ratio, min_size=depth, max_size=depth).map(_cumulative)
