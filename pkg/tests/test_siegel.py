import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from yoshida.cli import gl2_check, random_unimodular
from yoshida.quaternion import build_algebra, eichler_order, eigensystems, monomials
from yoshida.siegel import (KERNEL_VERSION, AnchorNotFound, AtkinLehnerMismatch, DepthExceeded,
                            HalfIntMat, InsufficientDepth, SiegelCoeffTable, build_yoshida, calibrate_shift,
                            euler_factor, fourier_jacobi, hecke_tq, lemma21_divide, prime_anchor,
                            read_ycf, reduce_T, reduced_keys, theta_pair_coeff, u_p, write_ycf)


def test_reduce_examples():
    assert reduce_T(HalfIntMat(1, 0, 1))[0] == HalfIntMat(1, 0, 1)
    assert reduce_T(HalfIntMat(6, 1, 1))[0] == HalfIntMat(1, 1, 6)
    assert reduce_T(HalfIntMat(2, -1, 3))[0] == HalfIntMat(2, 1, 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40), st.integers(-40, 40), st.integers(1, 40), st.integers(0, 2 ** 32))
def test_reduce_T_invariants(a, b, c, seed):
    T = HalfIntMat(a, b, c)
    if not T.is_positive():
        return
    R, U = reduce_T(T)
    assert R.disc == T.disc
    assert 0 <= R.b <= R.a <= R.c
    assert T.transform(U) == R
    V = random_unimodular(random.Random(seed))
    assert reduce_T(T.transform(V))[0] == R


def test_reduced_keys_complete():
    keys = set(reduced_keys(60))
    for a in range(1, 40):
        for b in range(-40, 41):
            for c in range(1, 40):
                T = HalfIntMat(a, b, c)
                if T.is_positive() and -T.disc <= 60:
                    assert reduce_T(T)[0] in keys


def test_flagship_table_nonzero(table):
    assert table.nonzero()
    assert table.weight == 4 and table.level == 19 and table.bound == 400
    assert table.provenance.isalnum() and len(table.provenance) == 16
    assert set(table.coeffs) == set(reduced_keys(400))


def test_ycf_roundtrip(table, tmp_path):
    p = tmp_path / "t.ycf"
    write_ycf(table, p)
    back = read_ycf(p)
    assert back.coeffs == table.coeffs and back.provenance == table.provenance
    text = p.read_text().splitlines()
    assert text[0] == f"YCF1 weight=4 level=19 bound=400 prov={table.provenance}"
    rows = [tuple(map(int, line.split())) for line in text[1:]]
    assert rows == sorted(rows)
    assert all(Fraction(n, d).denominator == d and d > 0 for *_, n, d in rows)
    assert not list(tmp_path.glob(".ycf-*"))


def test_depth_exceeded_without_source(table):
    bare = SiegelCoeffTable(table.weight, table.level, table.bound, table.coeffs, table.provenance)
    with pytest.raises(DepthExceeded):
        bare.get(HalfIntMat(100, 1, 100))


def test_gl2_invariance_1000(table):
    res = gl2_check(table, 1000, seed=1)
    assert res["ok"] and res["mismatches"] == 0


def test_provenance_depends_on_kernel_version(lift, monkeypatch):
    import yoshida.siegel as siegel
    before = lift.provenance
    monkeypatch.setattr(siegel, "KERNEL_VERSION", KERNEL_VERSION + "-changed")
    assert lift.provenance != before


def test_pair_sums_match_exact_enumeration(flagship, lift):
    """Vectorized per-(i, j) sums against a plain Fraction enumeration."""
    od = flagship.order
    mons = monomials(lift.nu)
    for T in (HalfIntMat(2, 1, 3), HalfIntMat(1, 1, 5), HalfIntMat(2, 2, 3)):
        total = Fraction(0)
        for i in range(od.h):
            co, kd = lift.kernels[i]
            kern = lambda w, co=co, kd=kd: Fraction(
                sum(c * w[0] ** m[0] * w[1] ** m[1] * w[2] ** m[2] for c, m in zip(co, mons)), kd)
            for j in range(od.h):
                total += Fraction(lift.psi[j], lift.w[i] * lift.w[j]) * theta_pair_coeff(od, i, j, kern, T)
        assert total == lift.coeffs([T])[T]


def test_known_coefficient(lift):
    assert lift.coeffs([HalfIntMat(2, 1, 3)])[HalfIntMat(2, 1, 3)] == -192


def test_scalar_kernel_counts_unit_pairs():
    """Constant kernel: pairs of units with prescribed Gram matrix.

    Class 0 of the level 11 order has units +-1, +-i, so (1, 0; 0, 1) is hit by
    (+-1, +-i) and (+-i, +-1): 8 pairs.  Class 1 has six units, and each x1
    has two partners x2 with trd(x1 conj x2) = 1: 12 pairs.
    """
    od = eichler_order(build_algebra(11), 11)
    assert od.unit_counts == (4, 6)
    one = lambda w: 1
    assert theta_pair_coeff(od, 0, 0, one, HalfIntMat(1, 0, 1)) == 8
    assert theta_pair_coeff(od, 1, 1, one, HalfIntMat(1, 1, 1)) == 12
    assert theta_pair_coeff(od, 1, 1, one, HalfIntMat(1, 0, 1)) == 0


def test_below_minimum_is_zero(flagship):
    od = flagship.order
    assert theta_pair_coeff(od, 0, 0, lambda w: 1, HalfIntMat(1, 1, 1)) == 0


def test_atkin_lehner_mismatch(flagship):
    P = flagship
    wrong = next(e for e in eigensystems(P.f_space, 13, allow_irrational=True)
                 if not e.eisenstein and e.al_signs != P.g.al_signs)
    with pytest.raises(AtkinLehnerMismatch):
        build_yoshida(P.order, P.f_space, wrong, P.g, 40)


def test_u_p_eigen(table):
    lam, n = u_p(table, 19, max_base_disc=60)
    assert lam == 361 and n > 0


def test_u_p_table_only_and_scaling(flagship, table):
    # the least |disc| with a nonzero coefficient is 4, so table-only U(19) needs bound 361 * 4
    bare = table.scaled(1)
    assert bare.source is None
    with pytest.raises(InsufficientDepth):
        u_p(bare, 19)
    P = flagship
    deep = build_yoshida(P.order, P.f_space, P.f, P.g, 1500)
    assert u_p(deep.scaled(1), 19)[0] == 361
    assert u_p(deep.scaled(Fraction(-7, 3)), 19)[0] == 361


def test_u_p_all_pairs(pairs):
    """U(p) is exact at every p | N for every admissible pair in range."""
    for P in pairs:
        t = build_yoshida(P.order, P.f_space, P.f, P.g, 120)
        for p in P.f.al_signs:
            lam, n = u_p(t, p, max_base_disc=24)
            assert n > 0
            # observed on every pair: lambda_p = a_p(f) = -eps_p p^(k-1)
            assert lam == P.f.hecke[p] == -P.f.al_signs[p] * p ** 2


def test_hecke_tq_and_euler(flagship, table):
    P = flagship
    s0, used = calibrate_shift(table, P.f, P.g, (2, 3))
    assert s0 == 2 and used == (2, 3)
    for q in (3, 5):
        assert euler_factor(table, P.f, P.g, q, s0).ok
    assert euler_factor(table, P.f, P.g, 3, s0 + 1).ok is False
    # lambda(q) = a_f(q) + q^s0 a_g(q)
    assert [hecke_tq(table, q) for q in (2, 3, 5)] == [-6, -14, 129]
    assert hecke_tq(table.scaled(Fraction(-7, 3)), 3) == -14


def test_fourier_jacobi_slice(table):
    sl = fourier_jacobi(table, 5)
    for (n, r), v in list(sl.cmap.items())[:200]:
        assert v == table.get(HalfIntMat(n, r, 5))
    assert any(sl.cmap.values())


def test_prime_anchor(table):
    p, T = prime_anchor(table)
    assert T.c == p and 19 % p and (-T.disc) % p
    assert table.get(T) != 0
    assert any(fourier_jacobi(table, p).cmap.values())


def test_prime_anchor_keeps_prime_corner():
    coeffs = {T: Fraction(0) for T in reduced_keys(40)}
    coeffs[HalfIntMat(1, 1, 7)] = Fraction(1)
    t = SiegelCoeffTable(4, 19, 40, coeffs, "x")
    p, T = prime_anchor(t)
    assert (p, T) == (7, HalfIntMat(1, 1, 7))


def test_prime_anchor_exhaustion():
    t = SiegelCoeffTable(4, 19, 40, {T: Fraction(0) for T in reduced_keys(40)}, "x")
    with pytest.raises(AnchorNotFound):
        prime_anchor(t)


def test_lemma21_division(table):
    T = HalfIntMat(2 * 19, 19, 3 * 19)
    S = lemma21_divide(table, T, [19])
    assert S == HalfIntMat(2, 1, 3)
    assert table.get(T) == 361 * table.get(S)
