from fractions import Fraction
from itertools import product

import numpy as np
from hypothesis import given, settings, strategies as st

from yoshida.lattice import iter_batches, short_vectors, theta_counts


def _brute(gram, bound):
    n = len(gram)
    r = 6
    out = set()
    for x in product(range(-r, r + 1), repeat=n):
        v = sum(Fraction(gram[i][j]) * x[i] * x[j] for i in range(n) for j in range(n))
        if 0 < v <= bound:
            out.add(x)
    return out


@st.composite
def pd_gram(draw):
    """Small positive definite Gram matrices L^T L with half-integral entries allowed."""
    n = draw(st.integers(2, 4))
    L = [[draw(st.integers(-2, 2)) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        L[i][i] = draw(st.integers(1, 3)) * (1 if draw(st.booleans()) else -1)
    M = np.array(L)
    if round(abs(np.linalg.det(M))) == 0:
        M = M + 3 * np.eye(n, dtype=int)
    G = M.T @ M
    return [[Fraction(int(G[i][j]), 2) if i != j else Fraction(int(G[i][j])) for j in range(n)]
            for i in range(n)]


@settings(max_examples=25, deadline=None)
@given(pd_gram(), st.integers(1, 6))
def test_short_vectors_match_box_scan(gram, bound):
    if np.linalg.eigvalsh(np.array(gram, dtype=float)).min() <= 1e-9:
        return
    got = {x for x, _ in short_vectors(gram, bound)}
    # box radius 6 covers every vector of norm <= 6 when the least eigenvalue is large enough
    if np.linalg.eigvalsh(np.array(gram, dtype=float)).min() * 36 >= bound:
        assert got == _brute(gram, bound)
    else:
        assert got >= _brute(gram, bound)


@settings(max_examples=25, deadline=None)
@given(pd_gram(), st.integers(1, 12))
def test_half_enumeration_is_one_per_pair(gram, bound):
    if np.linalg.eigvalsh(np.array(gram, dtype=float)).min() <= 1e-9:
        return
    full = {x for x, _ in short_vectors(gram, bound)}
    half = [tuple(x) for c, _ in iter_batches(gram, bound, size=7, half=True) for x in c.tolist()]
    assert len(half) == len(set(half))
    assert {x for x in half} | {tuple(-t for t in x) for x in half} == full
    assert 2 * len(half) == len(full)


def test_theta_counts_sum_of_four_squares():
    I = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    r = theta_counts(I, 30)
    # Jacobi: r_4(n) = 8 sum_{4 not | d | n} d
    for n in range(1, 31):
        assert r[n] == 8 * sum(d for d in range(1, n + 1) if n % d == 0 and d % 4)
