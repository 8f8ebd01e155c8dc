from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from yoshida.halfint import (HalfIntSeries, NotDivisibleBy4, check_thm3_hypotheses, extract_h,
                             extract_h_direct, fundamental_scan, growth_exponent, normalize)
from yoshida.siegel import DepthExceeded, HalfIntMat, fourier_jacobi, prime_anchor


@pytest.fixture(scope="module")
def anchor(table):
    return prime_anchor(table)


@pytest.fixture(scope="module")
def h(table, anchor):
    p, _ = anchor
    return extract_h(fourier_jacobi(table, p), 400, table.weight, table.level)


def test_anchor_and_shape(anchor, h, table):
    p, T = anchor
    assert (p, T) == (5, HalfIntMat(2, 6, 5))
    assert table.get(T) == -16
    assert (h.weight_num, h.level, h.kappa, h.p) == (7, 4 * 5 * 19, 3, 5)


def test_doubling_at_anchor(anchor, h, table):
    # mu and 2p - mu both contribute the same coefficient
    p, T = anchor
    assert h.c[-T.disc] == 2 * table.get(T) == -32


def test_slice_matches_direct_read(h, table):
    assert extract_h_direct(table, 5, 400) == h.c


def test_coefficients_against_unreduced_theta(h, lift):
    """Recompute c(m) from the theta sums at the raw (unreduced) matrices."""
    for m in (4, 11, 19, 24, 35, 39, 55, 79, 120):
        Ts = [HalfIntMat((m + mu * mu) // 20, mu, 5) for mu in range(10) if (mu * mu + m) % 20 == 0]
        raw = lift.coeffs(Ts, reduce=False)
        assert sum((raw[T] for T in Ts), Fraction(0)) == h.c[m]


def test_frozen_coefficients(h):
    nz = [(m, int(v)) for m, v in h.c.items() if m < 60 and v]
    assert nz == [(4, -32), (11, -48), (16, -288), (19, 304), (20, -144), (24, 320),
                  (35, 216), (36, -224), (39, -32), (44, 192), (55, -200)]


def test_plus_space_support(h):
    # -m must be a square mod 4, so only m = 0, 3 mod 4 can carry a coefficient
    assert all(v == 0 for m, v in h.c.items() if m % 4 in (1, 2))


def test_fundamental_scan(h, table):
    rep = fundamental_scan(h, 200, table)
    assert rep.hits == [11, 19, 35, 39, 55, 95, 111, 115, 119, 131, 139, 159, 191, 195, 199]
    for d in rep.hits:
        W = rep.witness[d]
        assert -W.disc == d and table.get(W) != 0
    assert rep.witness[11] == HalfIntMat(1, 3, 5)


def test_scan_needs_depth(h):
    with pytest.raises(DepthExceeded):
        fundamental_scan(h, 401)


def test_extract_rejects_index_dividing_level(table):
    with pytest.raises(ValueError):
        extract_h(fourier_jacobi(table, 19), 100, 4, 19)


def test_extract_depth(table):
    with pytest.raises(DepthExceeded):
        extract_h(fourier_jacobi(table, 5), 401, 4, 19)


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=-20, max_value=20, max_denominator=9))
def test_normalize_is_linear(h, s):
    base = normalize(h)
    sc = normalize(h.scaled(s))
    for n in (4, 11, 19, 35, 199):
        assert sc[n] == pytest.approx(float(s) * base[n], rel=1e-12, abs=1e-12)


def test_normalize_exponent():
    s = HalfIntSeries(7, 380, 5, {1: Fraction(1), 16: Fraction(1)}, 16)
    # kappa = 3, so a(n) n^(1/4 - 3/2) = n^(-5/4)
    assert normalize(s)[16] == pytest.approx(16 ** -1.25)
    assert growth_exponent(s, [1]) is None


@pytest.mark.parametrize("level, cond, ok", [(380, 1, True), (32, 1, False), (36, 1, False),
                                             (36, 3, True), (8, 1, True), (8, 2, False),
                                             (4 * 27, 3, False)])
def test_level_hypotheses(level, cond, ok):
    good, reasons = check_thm3_hypotheses(level, cond)
    assert good is ok
    assert bool(reasons) is not ok


def test_level_not_divisible_by_4():
    with pytest.raises(NotDivisibleBy4):
        check_thm3_hypotheses(190)
