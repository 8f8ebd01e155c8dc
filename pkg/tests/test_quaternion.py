from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from oracles import ec_ap, eta_product, primes_upto
from yoshida.linalg import mat_mul
from yoshida.quaternion import (EvenRamification, IrrationalEigensystem, LevelNotDivisible,
                                brandt_system, build_algebra, eichler_mass, eichler_order,
                                eigensystems, hecke_series, hilbert_symbol, ramified_primes,
                                select_pair)


@pytest.fixture(scope="module")
def order11():
    return eichler_order(build_algebra(11), 11)


@pytest.fixture(scope="module")
def brandt11(order11):
    return brandt_system(order11, 2, range(1, 13))


def test_algebra_pairs():
    assert build_algebra(2).hilbert_pair == (-1, -1)
    assert build_algebra(11).hilbert_pair == (-1, -11)
    assert build_algebra(19).hilbert_pair == (-1, -19)
    with pytest.raises(EvenRamification):
        build_algebra(15)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60))
def test_hilbert_reciprocity(a, b):
    """prod_v (-a, -b)_v = 1 and the infinite place is ramified for negative a, b."""
    ps = set(primes_upto(61)) | {2}
    s = 1
    for p in ps:
        s *= hilbert_symbol(-a, -b, p)
    assert s == -1       # (-a, -b)_oo = -1
    assert len(ramified_primes(-a, -b)) % 2 == 1


@pytest.mark.parametrize("M1, N, h", [(11, 11, 2), (11, 22, 3), (2, 2, 1), (19, 19, 2), (2, 6, 1)])
def test_mass_certificates(M1, N, h):
    od = eichler_order(build_algebra(M1), N)
    assert od.mass == eichler_mass(M1, N // M1)
    assert od.h == h


def test_masses_exact_values():
    assert eichler_mass(11, 1) == Fraction(5, 12)
    assert eichler_mass(11, 2) == Fraction(5, 4)
    assert eichler_mass(2, 1) == Fraction(1, 24)


def test_level_must_contain_ramification():
    with pytest.raises(LevelNotDivisible):
        eichler_order(build_algebra(11), 13)


def test_brandt_identity_and_row_sums(brandt11):
    B1 = brandt11.matrix(1)
    assert B1 == [[1, 0], [0, 1]]
    for q in (2, 3, 5, 7):
        for row in brandt11.matrix(q):
            assert sum(row) == q + 1


def test_brandt_multiplicative(brandt11):
    for m in range(1, 13):
        for n in range(1, 13):
            if gcd(m, n) == 1 and m * n <= 12:
                assert mat_mul(brandt11.matrix(m), brandt11.matrix(n)) == brandt11.matrix(m * n)


def test_brandt_prime_power_recursion(brandt11):
    """B(p^2) = B(p)^2 - p B(1) for p not dividing the level."""
    for p in (2, 3):
        B = brandt11.matrix(p)
        sq = mat_mul(B, B)
        assert brandt11.matrix(p * p) == [[sq[i][j] - p * (i == j) for j in range(2)] for i in range(2)]


def test_level11_matches_eta_product(order11):
    bs = brandt_system(order11, 2)
    systems = eigensystems(bs, 13)
    eis = [e for e in systems if e.eisenstein]
    cusp = [e for e in systems if not e.eisenstein]
    assert len(eis) == 1 and len(cusp) == 1
    assert all(eis[0].hecke[q] == q + 1 for q in (2, 3, 5, 7))
    f = cusp[0]
    assert (f.hecke[2], f.hecke[3], f.hecke[5]) == (-2, -1, 1)
    eta = eta_product(50)
    a = hecke_series(bs, f, 50)
    assert a[1:] == eta[1:]


def test_level19_weight2_matches_point_counts(flagship):
    a = hecke_series(flagship.g_space, flagship.g, 120)
    for p in primes_upto(120):
        if p != 19:
            assert a[p] == ec_ap(p), p
    assert a[19] == 1


def test_flagship_weight6_eigenvalues(flagship):
    f = flagship.f
    assert {q: int(f.hecke[q]) for q in (2, 3, 5, 7, 11, 13)} == \
        {2: -6, 3: 4, 5: 54, 7: 248, 11: 204, 13: -370}
    assert f.al_signs == {19: -1} and flagship.g.al_signs == {19: -1}


def test_hecke_series_agrees_with_brandt_rows(flagship):
    """Eigenvalues from hecke_series equal those read off the Brandt matrices, for every n."""
    P = flagship
    ns = list(range(1, 30))
    P.f_space.ensure(ns)
    a = hecke_series(P.f_space, P.f, 29)
    v = P.f.eigenvector
    piv = next(i for i, x in enumerate(v) if x)
    for n in ns:
        M = P.f_space.matrix(n)
        assert sum(M[piv][j] * v[j] for j in range(len(v))) == a[n] * v[piv]


def test_hecke_series_multiplicative(series):
    for form in series:
        a, w = form.a, form.weight
        for m in range(2, 60):
            for n in range(2, 3000 // m + 1):
                if gcd(m, n) == 1:
                    assert a[m * n] == a[m] * a[n]
        for p in (2, 3, 5, 7):
            q = p * p
            while q * p <= 3000:
                # a(p^(e+1)) = a(p) a(p^e) - p^(w-1) a(p^(e-1))
                assert a[q * p] == a[p] * a[q] - p ** (w - 1) * a[q // p]
                q *= p


def test_ramanujan_bound(series):
    for form in series:
        for p in primes_upto(3000):
            if form.level % p:
                assert abs(form.a[p]) <= 2 * p ** ((form.weight - 1) / 2)


def test_weight6_level11_irrational():
    bs = brandt_system(eichler_order(build_algebra(11), 11), 6)
    with pytest.raises(IrrationalEigensystem):
        eigensystems(bs, 7)


def test_select_pair_flagship(pairs):
    P = pairs[0]
    assert (P.N1, P.N2, P.M1, P.M) == (19, 19, 19, 19)
    assert all(Q.M > 1 for Q in pairs)
    assert all(Q.f.hecke != Q.g.hecke for Q in pairs)
    for Q in pairs:
        assert all(Q.f.al_signs[p] == Q.g.al_signs[p] for p in Q.g.al_signs)


def test_select_pair_rejects_even_k():
    with pytest.raises(ValueError):
        select_pair((4, 2), 20)
    with pytest.raises(ValueError):
        select_pair((2, 2), 20)


def test_select_pair_relaxed_k1_range():
    # no two distinct rational weight 2 newforms with equal signs up to level 30
    assert select_pair((2, 2), 30, relax=True) == []
