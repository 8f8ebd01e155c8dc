from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from yoshida.bessel import (BadResidue, bessel_sums, density_scan, ptb_verify,
                            s_c_reps, s_matrix, scan_discs)
from yoshida.classfield import class_group, is_fundamental
from yoshida.cyclo import Cyc
from yoshida.lfunc import RamifiedOverlap
from yoshida.siegel import HalfIntMat, SiegelCoeffTable, reduce_T, reduced_keys

FUND = [d for d in range(3, 400) if is_fundamental(d)]


@pytest.mark.parametrize("d, S", [(4, (1, 0, 1)), (3, (1, 1, 1)), (23, (6, 1, 1)), (20, (5, 0, 1))])
def test_s_matrix(d, S):
    assert s_matrix(d) == HalfIntMat(*S)
    assert -s_matrix(d).disc == d


def test_s_matrix_bad_residue():
    with pytest.raises(BadResidue):
        s_matrix(5)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FUND))
def test_s_c_reps_cover_classes(d):
    G = class_group(d)
    reps = s_c_reps(d, G)
    assert [c for c, _ in reps] == list(range(G.h))
    assert all(-S.disc == d for _, S in reps)
    # distinct classes give GL2-inequivalent matrices, except inverse pairs
    red = {reduce_T(S)[0] for _, S in reps}
    assert len(red) == len({frozenset((c, G.inv(c))) for c, _ in reps})
    # the principal class is the standard matrix up to equivalence
    assert reduce_T(reps[0][1])[0] == reduce_T(s_matrix(d))[0]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([d for d in FUND if d <= 400]))
def test_parseval_and_inversion(table, d):
    rep = bessel_sums(table, d)
    assert rep.parseval_ok() and rep.inversion_ok()


def test_parseval_detects_tampering(table):
    rep = bessel_sums(table, 23)
    rep.coeffs[0] += 1
    assert not rep.parseval_ok()


def test_class_number_one_is_single_term(table):
    for d in (3, 4, 7, 8, 11, 19, 43, 67, 163):
        rep = bessel_sums(table, d)
        assert rep.h == 1
        assert rep.per_chi[0] == Cyc.const(1, table.get(s_matrix(d)))


def test_frozen_bessel_support(table):
    got = {d: bessel_sums(table, d).nonzero_chis() for d in scan_discs(40)}
    assert got == {3: [], 7: [0], 11: [0], 15: [], 19: [0], 23: [1, 2], 31: [],
                   35: [0, 1], 39: [0, 1, 3]}


def test_constant_table_has_only_trivial_character():
    coeffs = {T: Fraction(1) for T in reduced_keys(100)}
    t = SiegelCoeffTable(4, 19, 100, coeffs, "x")
    rep = bessel_sums(t, 23)
    assert rep.nonzero_chis() == [0]
    assert rep.per_chi[0] == Cyc.const(3, 3)


def test_ptb_verdicts(table, series):
    f, g = series
    out = ptb_verify(table, f, g, 23)
    assert [v.chi_index for v in out] == [1, 2]
    for v in out:
        assert v.verdict == "PASS" and v.B_nonzero
        assert v.Lf.value.real == pytest.approx(9.5924320772, rel=1e-8)
        assert v.row()["verdict"] == "PASS"


def test_ptb_ramified(table, series):
    f, g = series
    with pytest.raises(RamifiedOverlap):
        ptb_verify(table, f, g, 19)


def test_density_small(table, series):
    f, g = series
    rec = density_scan(table, f, g, 40)
    assert rec.members == [7, 11, 23, 35, 39]
    assert 19 in rec.skipped and not rec.failures
    assert rec.per_d[35]["chi"] == 0
    assert rec.to_json()["count"] == 5 and rec.to_json()["parseval_ok"]
    small = density_scan(table, f, g, 20)
    assert set(small.members) <= set(rec.members)
    assert small.members == [7, 11]


def test_density_threads_agree(table, series):
    f, g = series
    a = density_scan(table, f, g, 40, threads=1)
    b = density_scan(table, f, g, 40, threads=4)
    assert a.to_json() == b.to_json() and a.rows == b.rows


def test_density_delta_range(table, series):
    f, g = series
    with pytest.raises(ValueError):
        density_scan(table, f, g, 40, delta=0.7)
