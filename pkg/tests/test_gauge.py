import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gaugecantor.gauge import (
    DETERMINISTIC,
    RANDOM,
    ClampWarning,
    GaugeError,
    GaugeSpec,
    TruncatedInfimumWarning,
    derive_schedule,
    divergence_report,
    infimum_truncated,
    read_table,
    regularize,
    validate_gauge,
)
from strategies import monotone_tables, valid_tables


def alpha_oracle(values):
    """Largest integer a with phi <= 4^-a, found by exact search."""
    out = []
    for v in values:
        a = 0
        while v <= Fraction(1, 4 ** (a + 1)):
            a += 1
        out.append(a)
    return out


def test_linear_schedule_small():
    s = derive_schedule(GaugeSpec.power(1), 8)
    assert s.alpha == (0, 0, 1, 1, 2, 2, 3, 3, 4)
    assert s.det_indices == (2, 4, 6, 8)
    assert s.step_kind[1:] == (RANDOM, DETERMINISTIC) * 4
    assert s.gamma == (1, 1, 1, 1)
    assert s.c2 == 2
    assert s.lam[1] == 2 and s.lam[2] == 1


def test_square_gauge_all_deterministic():
    s = derive_schedule(GaugeSpec.power(2), 4)
    assert s.alpha == (0, 1, 2, 3, 4)
    assert s.det_indices == (1, 2, 3, 4)
    assert s.gamma == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))


def test_constant_gauge():
    s = derive_schedule(GaugeSpec.table([1] * 11), 10)
    assert s.alpha == (0,) * 11
    assert s.det_indices == ()
    assert s.lam[10] == 1024
    # the max of lambda over 0..N is the last term here
    assert s.c2 == 1024
    assert all(x <= s.c2 for x in s.lam)


def test_exact_values():
    assert GaugeSpec.power(1).exact(5) == Fraction(1, 32)
    assert GaugeSpec.power(0.5).exact(3) is None
    assert GaugeSpec.power(0.5).exact(4) == Fraction(1, 4)
    assert GaugeSpec.powerlog(1, -2).exact(1) == Fraction(1, 2)
    assert GaugeSpec.powerlog(1, -2).exact(2) is None
    assert GaugeSpec.powerlog(1, -2)(3) == pytest.approx(2 ** -3 * (3 * math.log(2)) ** -2)


def test_table_normalised():
    g = GaugeSpec.table([2, 1, "1/2"])
    assert g.values == (1, Fraction(1, 2), Fraction(1, 4))
    assert GaugeSpec.table([2, 1], normalize=False).values == (2, 1)


def test_parse_round_trip(tmp_path):
    assert GaugeSpec.parse("power:a=1.5") == GaugeSpec.power(1.5)
    assert GaugeSpec.parse("powerlog:a=1,b=-2") == GaugeSpec.powerlog(1, -2)
    p = tmp_path / "g.txt"
    p.write_text("1\n0.5  # half\n\n0.25\n")
    assert read_table(p) == [1, Fraction(1, 2), Fraction(1, 4)]
    assert GaugeSpec.parse(f"table:@{p}").values == (1, Fraction(1, 2), Fraction(1, 4))


@pytest.mark.parametrize("text", ["cubic:a=1", "power:a", "power:a=-1", "table:foo"])
def test_parse_rejects(text):
    with pytest.raises(GaugeError):
        GaugeSpec.parse(text)


def test_bad_table_file(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1\nhalf\n")
    with pytest.raises(GaugeError, match="bad.txt:2"):
        read_table(p)


def test_table_too_short():
    with pytest.raises(GaugeError):
        GaugeSpec.table([1, 0.5])(2)


def test_validate_power3_fails_everywhere():
    rep = validate_gauge(GaugeSpec.power(3), 8)
    assert not rep.ok
    assert rep.levels("regul") == list(range(1, 9))
    assert rep.levels("monotone") == []


def test_validate_nonmonotone():
    rep = validate_gauge(GaugeSpec.table([1, 0.5, 0.6]), 2)
    assert rep.levels("monotone") == [2]
    with pytest.raises(GaugeError):
        derive_schedule(GaugeSpec.table([1, 0.5, 0.6]), 2)


def test_non_strict_clamp_warns():
    # phi drops by 1/16 in one step: alpha would jump by 2
    g = GaugeSpec.table([1] + [Fraction(1, 16)] * 20)
    with pytest.warns(ClampWarning):
        s = derive_schedule(g, 20, strict=False)
    assert s.alpha[:4] == (0, 1, 2, 2)
    assert all(s.alpha[n] - s.alpha[n - 1] in (0, 1) for n in range(1, 21))
    # one clamp in 5 levels is over the 10% allowance
    with pytest.raises(GaugeError):
        derive_schedule(g, 5, strict=False)


def test_alpha_boundary_exact():
    # phi = 4^-3 exactly at n = 6, alpha must be 3 not 2
    s = derive_schedule(GaugeSpec.power(1), 6)
    assert s.alpha[6] == 3


@given(valid_tables(32))
def test_alpha_matches_oracle(vals):
    s = derive_schedule(GaugeSpec.table(vals), 32)
    assert list(s.alpha) == alpha_oracle(vals)


@given(valid_tables(32))
def test_schedule_invariants(vals):
    s = derive_schedule(GaugeSpec.table(vals), 32)
    for n in range(1, 33):
        assert s.alpha[n] - s.alpha[n - 1] in (0, 1)
        assert (s.step_kind[n] == DETERMINISTIC) == (s.alpha[n] > s.alpha[n - 1])
    assert all(x <= s.c2 for x in s.lam)
    assert s.gamma == tuple(s.lam[k] for k in s.det_indices)


def test_divergence_linear():
    s = derive_schedule(GaugeSpec.power(1), 64)
    rep = divergence_report(s)
    assert rep.lambda_partial[63] == 96
    assert rep.classification == "diverging-evidence"
    assert not rep.supcon_fails
    assert rep.pruning_possible


def test_divergence_square():
    rep = divergence_report(derive_schedule(GaugeSpec.power(2), 64))
    assert rep.classification == "converging-evidence"
    assert rep.lambda_partial[-1] < 2
    assert not rep.pruning_possible


def test_divergence_supcon_fails_for_constant():
    rep = divergence_report(derive_schedule(GaugeSpec.table([1] * 33), 32))
    assert rep.supcon_fails


def test_regularize_examples():
    # phi*4^n = 1, 4, 2, 8 -> suffix minima 1, 2, 2, 8
    g = GaugeSpec.table([1, 1, Fraction(1, 8), Fraction(1, 8)])
    r = regularize(g, 3)
    assert r.values == (1, Fraction(1, 2), Fraction(1, 8), Fraction(1, 8))


def test_regularize_truncation_warning():
    g = GaugeSpec.table([Fraction(1, 8) ** n for n in range(6)])
    assert infimum_truncated(g, 5)
    with pytest.warns(TruncatedInfimumWarning):
        regularize(g, 5)


def test_regularize_rejects_nonmonotone():
    with pytest.raises(GaugeError):
        regularize(GaugeSpec.table([1, 0.5, 0.6]), 2)


@given(monotone_tables(32))
def test_regularize_properties(vals):
    g = GaugeSpec.table(vals)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncatedInfimumWarning)
        r = regularize(g, 32)
        rr = regularize(r, 32)
    out = r.values
    assert all(out[n] <= vals[n] for n in range(33))
    assert all(out[n + 1] <= out[n] for n in range(32))
    assert all(out[n] * 4 ** n <= out[n + 1] * 4 ** (n + 1) for n in range(32))
    assert rr.values == out
    assert validate_gauge(r, 32).ok


@given(valid_tables(16))
def test_regularize_fixes_regular_gauges(vals):
    assert regularize(GaugeSpec.table(vals), 16).values == GaugeSpec.table(vals).values


@given(st.floats(0.3, 2.0), st.floats(-3, 3))
def test_powerlog_float_alpha_close_to_formula(a, b):
    g = GaugeSpec.powerlog(a, b)
    for n in range(1, 40):
        assert g.log4_inverse(n) == pytest.approx(-math.log(g(n)) / math.log(4), rel=1e-9, abs=1e-9)
