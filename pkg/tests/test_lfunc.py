import mpmath
import numpy as np
import pytest

from oracles import ec_coeffs, kronecker_neg, twisted_central_value
from yoshida.classfield import characters, class_group, kronecker
from yoshida.cyclo import Cyc
from yoshida.lfunc import (Gamma, LData, PrecisionUnreachable, RamifiedOverlap, _parts,
                           central_value, completed, dirichlet_ldata, form_ldata, gamma_conductor,
                           local_factor, rankin_coeffs, rankin_coeffs_naive, rankin_gamma,
                           rankin_ldata, required_terms, residual)


def _chi(d, k):
    return characters(class_group(d))[k]


@pytest.mark.parametrize("d", [4, 7, 15, 23, 56, 71])
def test_euler_product_matches_convolution(series, d):
    for form in series:
        for chi in characters(class_group(d)):
            assert rankin_coeffs(form.a, form.weight, 19, chi, 400) == \
                rankin_coeffs_naive(form.a, form.weight, 19, chi, 400)


def test_first_coefficient_and_inert_primes(series):
    f, _ = series
    for d in (7, 23, 39):
        for chi in characters(class_group(d)):
            B = rankin_coeffs(f.a, 6, 19, chi, 300)
            assert B[1] == Cyc.const(chi.h, 1)
            for p in (2, 3, 5, 7, 11, 13, 17, 23, 29, 31, 37, 41, 43, 47):
                if kronecker(-d, p) == -1:
                    assert B[p].is_zero()


def test_level_prime_local_factor():
    # inert at p | N: 1 - a_p^2 X^2
    chi = _chi(7, 0)
    assert kronecker(-7, 19) == -1
    poly = local_factor(1, 19, 2, 19, chi)
    assert [c.rational() for c in poly] == [1, 0, -1]


def test_ramified_overlap(series):
    f, _ = series
    with pytest.raises(RamifiedOverlap):
        rankin_coeffs(f.a, 6, 19, _chi(19, 0), 50)


def test_real_coefficients_and_inverse_symmetry(series):
    f, g = series
    for form in (f, g):
        chis = characters(class_group(23))
        lds = [form_ldata(form, chi) for chi in chis]
        for ld in lds:
            assert not np.abs(ld.coeffs.imag).any()
        inv = {chi.index: chi.inverse().index for chi in chis}
        vals = [central_value(ld).value for ld in lds]
        for k, j in inv.items():
            assert vals[k] == pytest.approx(vals[j], rel=1e-10)


@pytest.mark.parametrize("which, d, k", [(0, 23, 1), (1, 7, 0), (0, 39, 3)])
def test_functional_equation_residual(series, which, d, k):
    ld = form_ldata(series[which], _chi(d, k))
    for s in (0.6, complex(0.5, 0.3)):
        assert residual(ld, s) < 1e-8


def test_wrong_gamma_shift_is_detected(series):
    """Negative control: a shifted archimedean factor breaks the functional equation."""
    f, _ = series
    good = form_ldata(f, _chi(7, 0))
    long = rankin_ldata(f.a, 6, 19, _chi(7, 0), 8000)
    wrong = LData(long.coeffs, long.conductor, Gamma("CC", good.gamma.shift + 1), sign=1.0)
    assert residual(good, 0.6) < 1e-8
    # fails the 1e-8 gate by orders of magnitude
    assert residual(wrong, 0.6) > 1e-6


def test_wrong_conductor_is_detected(series):
    _, g = series
    long = rankin_ldata(g.a, 2, 19, _chi(7, 0), 6000)
    wrong = LData(long.coeffs, long.conductor * 4, long.gamma, sign=1.0)
    # fails the 1e-8 gate by orders of magnitude
    assert residual(wrong, 0.6) > 1e-6


def test_cutoff_doubling_is_stable(series):
    f, _ = series
    chi = _chi(11, 0)
    gam, Q = rankin_gamma(6, 11, 19)
    n8, n10 = required_terms(gam, Q, 1e-8), required_terms(gam, Q, 1e-10)
    assert n10 > n8
    v8 = central_value(rankin_ldata(f.a, 6, 19, chi, n8, tol=1e-8)).value
    v10 = central_value(rankin_ldata(f.a, 6, 19, chi, n10, tol=1e-10)).value
    assert abs(v8 - v10) < 1e-8
    # doubling the number of terms at a fixed splitting changes nothing visible
    long = rankin_ldata(f.a, 6, 19, chi, 2 * n8, tol=1e-8)
    completed(long, 0.5)
    M = long.needed_terms(1.0)
    A1, B1, _ = _parts(long, 0.5, 1.0, M)
    A2, B2, _ = _parts(long, 0.5, 1.0, 2 * M)
    assert abs((A1 + B1) - (A2 + B2)) < 1e-9 * abs(A1 + B1)
    assert long.sign == 1.0


@pytest.mark.parametrize("q, chars", [(-4, [0, 1, 0, -1]), (-3, [0, 1, -1]),
                                      (5, [0, 1, -1, -1, 1]), (8, [0, 1, 0, -1, 0, -1, 0, 1])])
def test_degree_one_against_mpmath(q, chars):
    ld = dirichlet_ldata(q, 400)
    for s in (0.5, complex(0.5, 0.3), 0.6):
        ref = complex(mpmath.dirichlet(s, chars))
        lam, _ = completed(ld, s)
        assert lam / gamma_conductor(ld, s) == pytest.approx(ref, abs=1e-10)
    assert residual(ld, 0.6) < 1e-10


@pytest.mark.parametrize("d", [7, 11])
def test_class_number_one_factorization(series, d):
    """For h = 1, L(s, f x theta) = L(s, f) L(s, f x chi_-d); both factors from mpmath."""
    f, _ = series
    g_a = ec_coeffs(2000)
    # root numbers: +1 for f and g, and eps(f x chi_D) = eps(f) chi_D(-19)
    tw = -kronecker_neg(d, 19)
    for a, w, form in ((list(f.a[:2001]), 6, f), (g_a, 2, series[1])):
        ref = twisted_central_value(a, w, 19, 1, 1) * twisted_central_value(a, w, 19, -d, tw)
        got = central_value(form_ldata(form, _chi(d, 0)))
        assert got.value.real == pytest.approx(ref, rel=1e-9)
        assert got.sign == 1


def test_oracle_weight2_matches_point_counts(series):
    assert list(series[1].a[:2001]) == ec_coeffs(2000)


FROZEN = [  # (d, chi index, L(1/2, f x chi), L(1/2, g x chi))
    (7, 0, 0.32589728263, 0.70702715295),
    (11, 0, 0.94751618228, 0.56401255346),
    (23, 1, 9.5924320772, 3.5104573774),
    (23, 2, 9.5924320772, 3.5104573774),
    (35, 0, 5.2468450390, 0.31619215519),
    (35, 1, 0.37310898055, 2.84572939669),
    (39, 0, 0.071167925140, 1.1981544381),
    (39, 1, 3.558396257, 5.391694971),
    (39, 3, 3.558396257, 5.391694971),
]


@pytest.mark.parametrize("d, k, lf, lg", FROZEN)
def test_frozen_central_values(series, d, k, lf, lg):
    f, g = series
    vf = central_value(form_ldata(f, _chi(d, k)))
    vg = central_value(form_ldata(g, _chi(d, k)))
    assert vf.value.real == pytest.approx(lf, rel=1e-8)
    assert vg.value.real == pytest.approx(lg, rel=1e-8)
    assert vf.is_nonzero and vg.is_nonzero
    assert vf.error_bound < 1e-8 * max(1, abs(lf))


def test_short_series_is_reported(series):
    f, _ = series
    short = type(f)(f.label, 6, 19, f.a[:500])
    with pytest.raises(PrecisionUnreachable):
        form_ldata(short, _chi(23, 1))
