from itertools import product
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from oracles import analytic_class_number, brute_class_numbers, form_reps, sum_of_two_squares
from yoshida.classfield import (NotFundamental, QuadForm, characters, class_group, class_number,
                                compose, ideal_counts_by_class, inverse_form, is_fundamental,
                                kronecker, principal_form, reduce_form, theta_coeffs)
from yoshida.cyclo import Cyc

FUND = [d for d in range(3, 600) if is_fundamental(d)]


@pytest.mark.parametrize("d, expected", [(4, True), (23, True), (12, False), (3, True),
                                         (8, True), (16, False), (15, True), (20, True)])
def test_is_fundamental(d, expected):
    assert is_fundamental(d) is expected


@pytest.mark.parametrize("form, expected", [((1, 0, 1), (1, 0, 1)), ((6, 1, 1), (1, 1, 6)),
                                            ((2, -1, 3), (2, -1, 3)), ((3, 2, 3), (3, 2, 3)),
                                            ((2, -2, 3), (2, 2, 3))])
def test_reduce_examples(form, expected):
    assert reduce_form(QuadForm(*form)).as_tuple() == expected


def test_composition_d23():
    f, fi, one = QuadForm(2, 1, 3), QuadForm(2, -1, 3), QuadForm(1, 1, 6)
    assert compose(f, f).as_tuple() == (2, -1, 3)
    assert compose(f, fi).as_tuple() == (1, 1, 6)
    assert compose(one, f).as_tuple() == (2, 1, 3)


@pytest.mark.parametrize("d, h", [(4, 1), (23, 3), (15, 2), (3, 1), (163, 1), (71, 7), (56, 4)])
def test_class_numbers(d, h):
    assert class_group(d).h == h == class_number(d)


def test_class_number_matches_dirichlet_formula():
    for d in FUND:
        assert class_number(d) == analytic_class_number(d)


def test_class_number_brute_force_small():
    brute = brute_class_numbers(2000)
    for d in range(3, 2001):
        if is_fundamental(d):
            assert class_number(d) == brute[d]


def test_nonfundamental_rejected():
    with pytest.raises(NotFundamental):
        class_group(12)
    assert class_group(12, allow_nonfundamental=True).h == 1


def test_d23_cyclic_and_characters():
    G = class_group(23)
    assert G.invariants() == [3]
    chis = characters(G)
    assert len(chis) == 3 and all(chi.order in (1, 3) for chi in chis)
    assert chis[0].values == (0, 0, 0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FUND))
def test_group_axioms(d):
    G = class_group(d)
    n = G.h
    for i, j, k in product(range(n), repeat=3):
        assert G.mul(G.mul(i, j), k) == G.mul(i, G.mul(j, k))
    for i in range(n):
        assert G.mul(0, i) == i
        assert G.mul(i, G.inv(i)) == 0
        assert G.class_of(inverse_form(G.elements[i])) == G.inv(i)
        for j in range(n):
            assert G.mul(i, j) == G.mul(j, i)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FUND))
def test_character_orthogonality(d):
    G = class_group(d)
    chis = characters(G)
    assert len({c.values for c in chis}) == G.h
    zero = Cyc.const(G.h, 0)
    for a in chis:
        for b in chis:
            s = sum((a(c) * b.inverse()(c) for c in range(G.h)), zero)
            assert s == Cyc.const(G.h, G.h if a.values == b.values else 0)
        for i in range(G.h):
            for j in range(G.h):
                assert a(G.mul(i, j)) == a(i) * a(j)


def test_gaussian_theta():
    th = theta_coeffs(characters(class_group(4))[0], 30)
    assert [th[n].rational() for n in (1, 2, 3, 5)] == [1, 1, 0, 2]
    for n in range(1, 31):
        assert th[n].rational() * 4 == sum_of_two_squares(n)


def test_d23_theta_at_two():
    G = class_group(23)
    chi = next(c for c in characters(G) if c.order == 3)
    assert theta_coeffs(chi, 2)[2] == Cyc.const(3, -1)


def test_ideal_counts_against_box_scan():
    G = class_group(56)
    counts = ideal_counts_by_class(G, 60)
    for i, f in enumerate(G.elements):
        for n in range(1, 61):
            assert counts[i][n] * G.unit_count() == form_reps(f.a, f.b, f.c, n)


@pytest.mark.parametrize("d", [4, 15, 23, 163])
def test_theta_multiplicative(d):
    """r_chi(mn) = r_chi(m) r_chi(n) for coprime m, n, and the prime-power recursion."""
    G = class_group(d)
    nmax = 500
    counts = ideal_counts_by_class(G, nmax)
    for chi in characters(G):
        th = theta_coeffs(chi, nmax, counts)
        for m in range(1, 23):
            for n in range(1, nmax // m + 1):
                if gcd(m, n) == 1:
                    assert th[m * n] == th[m] * th[n]
        for p in (2, 3, 5, 7, 11, 13):
            k = kronecker(-d, p)
            e, q = 2, p * p
            while q <= nmax:
                # r(p^e) = r(p) r(p^(e-1)) - (-d/p) r(p^(e-2))
                assert th[q] == th[p] * th[q // p] - th[q // (p * p)] * k
                e, q = e + 1, q * p


@pytest.mark.parametrize("d", [23, 47, 71])
def test_inert_primes_have_no_ideals(d):
    chi = characters(class_group(d))[1]
    th = theta_coeffs(chi, 200)
    for p in range(3, 200):
        if all(p % q for q in range(2, p)) and kronecker(-d, p) == -1:
            assert th[p].is_zero()


def test_principal_form():
    assert principal_form(23).as_tuple() == (1, 1, 6)
    assert principal_form(4).as_tuple() == (1, 0, 1)
