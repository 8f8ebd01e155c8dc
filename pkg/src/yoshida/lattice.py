"""Lattice point enumeration for positive definite quadratic forms.

Bounds come from a float Cholesky factor widened by a safety margin; every
candidate is then filtered with exact integer arithmetic, so the output is
exactly the set of vectors inside the ellipsoid.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor, ceil, sqrt

import numpy as np

from .linalg import common_denominator


def integral_form(gram):
    """(A, den) with A integral symmetric and x^T gram x = x^T A x / den."""
    den = common_denominator(gram)
    a = [[int(Fraction(x) * den) for x in row] for row in gram]
    return a, den


def iter_chunks(gram, bound, nonzero=True, half=False):
    """Yield (coords, values) arrays covering {x : 0 < q(x) <= bound}.

    ``values`` holds q(x) * den as int64, where den is the common denominator
    of the Gram matrix (returned by :func:`integral_form`).  With ``half``
    only one vector of each pair +-x is produced (the zero vector is dropped).
    """
    a, den = integral_form(gram)
    n = len(a)
    A = np.array(a, dtype=np.int64)
    lim = int(Fraction(bound) * den)
    m = np.array(a, dtype=float)
    # q = sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2, in float for bounds only
    d = np.zeros(n)
    u = np.zeros((n, n))
    mm = m.copy()
    for i in range(n):
        d[i] = mm[i, i]
        if d[i] <= 0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            u[i, j] = mm[i, j] / d[i]
        for j in range(i + 1, n):
            for k in range(i + 1, n):
                mm[j, k] -= d[i] * u[i, j] * u[i, k]
    eps = 1e-9 * (1 + lim)

    def rec(level, fixed, rem):
        # coordinates level+1..n-1 are fixed
        top = half and not any(fixed[level + 1:])
        if level == 1:
            # vectorize over x1 (index 1) and x0 (index 0)
            c1 = -sum(u[1, j] * fixed[j] for j in range(2, n))
            r1 = sqrt(max(rem, 0) / d[1]) + 1e-7
            lo1, hi1 = ceil(c1 - r1 - 1e-9), floor(c1 + r1 + 1e-9)
            if hi1 < lo1:
                return
            if top:
                lo1 = max(lo1, 0)
                if hi1 < lo1:
                    return
            x1 = np.arange(lo1, hi1 + 1, dtype=np.int64)
            c0 = -(u[0, 1] * x1 + sum(u[0, j] * fixed[j] for j in range(2, n)))
            rem0 = rem - d[1] * (x1 + sum(u[1, j] * fixed[j] for j in range(2, n))) ** 2
            r0 = np.sqrt(np.maximum(rem0, 0) / d[0]) + 1e-7
            lo0 = np.ceil(c0 - r0 - 1e-9).astype(np.int64)
            hi0 = np.floor(c0 + r0 + 1e-9).astype(np.int64)
            if top:
                lo0 = np.where(x1 == 0, np.maximum(lo0, 1), lo0)
            cnt = np.maximum(hi0 - lo0 + 1, 0)
            tot = int(cnt.sum())
            if tot == 0:
                return
            rep1 = np.repeat(x1, cnt)
            starts = np.repeat(lo0 - np.concatenate(([0], np.cumsum(cnt)[:-1])), cnt)
            x0 = starts + np.arange(tot, dtype=np.int64)
            coords = np.empty((tot, n), dtype=np.int64)
            coords[:, 0] = x0
            coords[:, 1] = rep1
            for j in range(2, n):
                coords[:, j] = fixed[j]
            vals = np.einsum("ij,ij->i", coords @ A, coords)
            keep = vals <= lim
            if nonzero:
                keep &= vals > 0
            if keep.any():
                yield coords[keep], vals[keep]
            return
        c = -sum(u[level, j] * fixed[j] for j in range(level + 1, n))
        r = sqrt(max(rem, 0) / d[level]) + 1e-7
        lo = ceil(c - r - 1e-9)
        if top:
            lo = max(lo, 0)
        for x in range(lo, floor(c + r + 1e-9) + 1):
            fixed[level] = x
            t = x - c
            yield from rec(level - 1, fixed, rem - d[level] * t * t + 0.0)
        fixed[level] = 0

    if n == 1:
        r = int(sqrt(lim / a[0][0])) + 1
        xs = np.arange(1 if half else -r, r + 1, dtype=np.int64).reshape(-1, 1)
        vals = a[0][0] * xs[:, 0] ** 2
        keep = (vals <= lim) & ((vals > 0) if nonzero else True)
        yield xs[keep], vals[keep]
        return
    yield from rec(n - 1, [0] * n, lim + eps)


def short_vectors(gram, bound, nonzero=True):
    """All integer vectors with q(x) <= bound, as (coords, exact Fraction values)."""
    a, den = integral_form(gram)
    out = []
    for coords, vals in iter_chunks(gram, bound, nonzero):
        for x, v in zip(coords.tolist(), vals.tolist()):
            out.append((tuple(x), Fraction(v, den)))
    return out


def vectors_array(gram, bound, nonzero=True):
    """Stacked coordinate array and integer values (q * den), sorted by value."""
    parts = list(iter_chunks(gram, bound, nonzero))
    n = len(gram)
    if not parts:
        return np.zeros((0, n), dtype=np.int64), np.zeros(0, dtype=np.int64)
    coords = np.concatenate([p[0] for p in parts])
    vals = np.concatenate([p[1] for p in parts])
    order = np.lexsort(tuple(coords[:, j] for j in range(n - 1, -1, -1)) + (vals,))
    return coords[order], vals[order]


def theta_counts(gram, nmax):
    """r(n) for n = 0..nmax where q takes integer values."""
    a, den = integral_form(gram)
    counts = np.zeros(nmax * den + 1, dtype=np.int64)
    counts[0] = 1
    for _, vals in iter_chunks(gram, nmax, nonzero=True):
        counts += np.bincount(vals, minlength=len(counts))
    if den != 1:
        assert not counts[np.arange(len(counts)) % den != 0].any()
        counts = counts[::den]
    return counts


def iter_batches(gram, bound, size=1 << 18, nonzero=True, half=False):
    """Like :func:`iter_chunks`, concatenated into batches of about ``size`` rows."""
    buf, vbuf, n = [], [], 0
    for c, v in iter_chunks(gram, bound, nonzero, half):
        buf.append(c)
        vbuf.append(v)
        n += len(v)
        if n >= size:
            yield np.concatenate(buf), np.concatenate(vbuf)
            buf, vbuf, n = [], [], 0
    if buf:
        yield np.concatenate(buf), np.concatenate(vbuf)
