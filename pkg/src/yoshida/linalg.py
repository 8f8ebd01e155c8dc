"""Small exact linear algebra over Q and Z.

Matrices are lists of rows.  Entries are ints or Fractions; nothing here
ever touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm


def frac_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def mat_mul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def vec_mat(v, a):
    return [sum(v[i] * a[i][j] for i in range(len(v))) for j in range(len(a[0]))]


def transpose(a):
    return [list(col) for col in zip(*a)]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def rref(a):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a):
    return len(rref(a)[1]) if a else 0


def nullspace(a, ncols=None):
    """Basis (list of vectors) of {x : a x = 0}."""
    if not a:
        n = ncols
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    m, piv = rref(a)
    n = len(a[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(piv):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


def left_nullspace(a):
    return nullspace(transpose(a))


def inverse(a):
    n = len(a)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    m, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in m[:n]]


def det(a):
    m = [[Fraction(x) for x in row] for row in a]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def solve_left(basis, v):
    """Coefficients c with sum c_i basis_i = v, or None if v is not in the span."""
    k = len(basis)
    aug = [[basis[i][j] for i in range(k)] + [v[j]] for j in range(len(v))]
    m, piv = rref(aug)
    if k in piv:
        return None
    c = [Fraction(0)] * k
    for i, pc in enumerate(piv):
        c[pc] = m[i][k]
    return c


def common_denominator(rows):
    den = 1
    for row in rows:
        for x in row:
            den = lcm(den, Fraction(x).denominator)
    return den


def hnf_int(rows):
    """Row-style Hermite normal form of an integer matrix, zero rows dropped."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return []
    ncols = len(m[0])
    out = []
    r0 = 0
    for c in range(ncols):
        live = [i for i in range(r0, len(m)) if m[i][c] != 0]
        if not live:
            continue
        while True:
            live = [i for i in range(r0, len(m)) if m[i][c] != 0]
            if len(live) <= 1:
                break
            piv = min(live, key=lambda i: abs(m[i][c]))
            for i in live:
                if i != piv:
                    q = m[i][c] // m[piv][c]
                    m[i] = [x - q * y for x, y in zip(m[i], m[piv])]
        live = [i for i in range(r0, len(m)) if m[i][c] != 0]
        if not live:
            continue
        p = live[0]
        m[r0], m[p] = m[p], m[r0]
        if m[r0][c] < 0:
            m[r0] = [-x for x in m[r0]]
        for i in range(r0):
            q = m[i][c] // m[r0][c]
            if q:
                m[i] = [x - q * y for x, y in zip(m[i], m[r0])]
        r0 += 1
    out = [row for row in m[:r0]]
    return out


def lattice_basis(generators):
    """Z-basis (HNF, rational entries) of the lattice spanned by rational vectors."""
    den = common_denominator(generators)
    ints = [[int(Fraction(x) * den) for x in g] for g in generators]
    h = hnf_int(ints)
    return [[Fraction(x, den) for x in row] for row in h]


def dual_basis(basis):
    """Rows of (B^{-1})^T: the dual lattice under the standard dot product."""
    return transpose(inverse(basis))


def smith_invariants(rows):
    """Elementary divisors of an integer matrix (naive Smith normal form)."""
    m = [list(map(int, r)) for r in rows]
    invs = []
    while m and any(any(r) for r in m):
        # move a smallest nonzero entry to (0,0)
        best = min(((abs(x), i, j) for i, r in enumerate(m) for j, x in enumerate(r) if x),)
        _, i, j = best
        m[0], m[i] = m[i], m[0]
        for r in m:
            r[0], r[j] = r[j], r[0]
        done = False
        while not done:
            done = True
            p = m[0][0]
            for i in range(1, len(m)):
                q = m[i][0] // p
                m[i] = [x - q * y for x, y in zip(m[i], m[0])]
                if m[i][0]:
                    done = False
            for j in range(1, len(m[0])):
                q = m[0][j] // p
                for r in m:
                    r[j] -= q * r[0]
                if m[0][j]:
                    done = False
            if not done:
                best = min(((abs(x), i, j) for i, r in enumerate(m) for j, x in enumerate(r) if x),)
                _, i, j = best
                m[0], m[i] = m[i], m[0]
                for r in m:
                    r[0], r[j] = r[j], r[0]
                continue
            bad = next(((i, j) for i in range(1, len(m)) for j in range(1, len(m[0]))
                        if m[i][j] % p), None)
            if bad:
                m[0] = [x + y for x, y in zip(m[0], m[bad[0]])]
                done = False
        invs.append(abs(m[0][0]))
        m = [r[1:] for r in m[1:]]
    return invs


def lll(basis, gram_fn, delta=Fraction(3, 4)):
    """Exact LLL reduction of a lattice basis under a positive definite form.

    ``gram_fn(u, v)`` is the bilinear form.  Small dimensions only.
    """
    b = [list(v) for v in basis]
    n = len(b)

    def gso():
        bstar = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        bn = []
        for i in range(n):
            v = list(b[i])
            for j in range(i):
                mu[i][j] = gram_fn(b[i], bstar[j]) / bn[j]
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
            bn.append(gram_fn(v, v))
        return mu, bn

    k = 1
    mu, bn = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                mu, bn = gso()
        if bn[k] >= (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, bn = gso()
            k = max(k - 1, 1)
    return b


def charpoly_coeffs(a):
    """Characteristic polynomial coefficients (leading first) via Faddeev-LeVerrier."""
    n = len(a)
    coeffs = [Fraction(1)]
    m = [[Fraction(0)] * n for _ in range(n)]
    ident = identity(n)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        m = [[am[i][j] + coeffs[-1] * ident[i][j] for j in range(n)] for i in range(n)]
        am = mat_mul(a, m)
        c = -sum(am[i][i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def nullspace_mod_p(a, p, ncols=None):
    """Basis of {x : a x = 0} over F_p, entries in [0, p)."""
    n = len(a[0]) if a else ncols
    m = [[x % p for x in row] for row in a]
    piv = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        piv.append(c)
        r += 1
    basis = []
    for fc in (c for c in range(n) if c not in piv):
        v = [0] * n
        v[fc] = 1
        for i, pc in enumerate(piv):
            v[pc] = -m[i][fc] % p
        basis.append(v)
    return basis
