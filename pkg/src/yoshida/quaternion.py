"""Definite quaternion algebras over Q, Eichler orders and Brandt matrices.

The algebra (a, b) has basis 1, i, j, k with i^2 = a, j^2 = b, k = ij.
Elements are 4-tuples of Fractions; lattices are stored as Hermite-normal
rational row bases.  Weight 2 Brandt matrices count connecting elements;
higher weight 2 + 2v works on vector-valued forms with values in harmonic
polynomials of degree v on the pure quaternions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd, lcm, prod

import numpy as np
from sympy import Poly, Rational, factor_list, factorint, primerange, symbols

from .lattice import iter_batches, iter_chunks, short_vectors, theta_counts
from .linalg import (common_denominator, det, inverse, lattice_basis, lll,
                     mat_mul, nullspace, nullspace_mod_p, solve_left)


class EvenRamification(ValueError):
    pass


class LevelNotDivisible(ValueError):
    pass


class IncompleteClassSet(RuntimeError):
    pass


class IrrationalEigensystem(ValueError):
    def __init__(self, message, factors=()):
        super().__init__(message)
        self.factors = tuple(factors)


# ---------------------------------------------------------------- algebra

def _split(x: int, p: int):
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v, x


def hilbert_symbol(a: int, b: int, p: int) -> int:
    """Local Hilbert symbol (a, b)_p; p = 0 means the real place."""
    if p == 0:
        return -1 if a < 0 and b < 0 else 1
    al, u = _split(a, p)
    be, v = _split(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        om = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + al * om(v) + be * om(u)
        return -1 if e % 2 else 1
    leg = lambda t: 1 if pow(t % p, (p - 1) // 2, p) == 1 else -1
    s = -1 if (al * be * ((p - 1) // 2)) % 2 else 1
    if be % 2:
        s *= leg(u)
    if al % 2:
        s *= leg(v)
    return s


def ramified_primes(a: int, b: int) -> tuple[int, ...]:
    cands = set(factorint(2 * a * b))
    return tuple(sorted(p for p in cands if hilbert_symbol(a, b, p) == -1))


@dataclass(frozen=True)
class QuatAlgebra:
    a: int
    b: int
    ramified: tuple

    @property
    def hilbert_pair(self):
        return (self.a, self.b)

    @property
    def disc(self) -> int:
        return prod(self.ramified)

    def mul(self, x, y):
        a, b = self.a, self.b
        x0, x1, x2, x3 = x
        y0, y1, y2, y3 = y
        return (x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
                x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
                x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
                x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1)

    @staticmethod
    def conj(x):
        return (x[0], -x[1], -x[2], -x[3])

    def nrd(self, x):
        a, b = self.a, self.b
        return x[0] ** 2 - a * x[1] ** 2 - b * x[2] ** 2 + a * b * x[3] ** 2

    @staticmethod
    def trd(x):
        return 2 * x[0]

    def pair(self, x, y):
        """trd(x conj(y)), the bilinear form with pair(x, x) = 2 nrd(x)."""
        a, b = self.a, self.b
        return 2 * (x[0] * y[0] - a * x[1] * y[1] - b * x[2] * y[2] + a * b * x[3] * y[3])

    def mul_np(self, x, y):
        """Row-wise product of integer arrays of shape (n, 4)."""
        a, b = self.a, self.b
        x0, x1, x2, x3 = x.T
        y0, y1, y2, y3 = y.T
        return np.stack([x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
                         x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
                         x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
                         x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1], axis=1)


def build_algebra(M1: int) -> QuatAlgebra:
    """Smallest pair (-a, -b), a <= b, ramified exactly at the primes of M1 and at infinity."""
    fac = factorint(M1)
    if any(e > 1 for e in fac.values()):
        raise ValueError(f"M1={M1} is not squarefree")
    if len(fac) % 2 == 0:
        raise EvenRamification(f"M1={M1} has {len(fac)} prime factors")
    target = tuple(sorted(fac))
    bb = 1
    while True:
        for aa in range(1, bb + 1):
            if ramified_primes(-aa, -bb) == target:
                return QuatAlgebra(-aa, -bb, target)
        bb += 1


# ---------------------------------------------------------------- lattices

def _key(basis):
    return tuple(tuple(row) for row in basis)


def lat(gens):
    return _key(lattice_basis([list(g) for g in gens]))


def lat_mul(A: QuatAlgebra, L1, L2):
    return lat([A.mul(x, y) for x in L1 for y in L2])


def lat_conj(A: QuatAlgebra, L):
    return lat([A.conj(x) for x in L])


def lat_scale(L, c):
    c = Fraction(c)
    return _key([[c * x for x in row] for row in L])


def _qgcd(values):
    values = [Fraction(v) for v in values if v != 0]
    den = reduce(lcm, (v.denominator for v in values), 1)
    return Fraction(reduce(gcd, (int(v * den) for v in values), 0), den)


def lat_norm(A: QuatAlgebra, L) -> Fraction:
    """Reduced norm n(L): the gcd of nrd over L."""
    vals = [A.nrd(x) for x in L]
    vals += [A.pair(L[i], L[j]) for i in range(4) for j in range(i + 1, 4)]
    return _qgcd(vals)


def coords(L, x):
    c = solve_left([list(r) for r in L], list(x))
    return c


def contains(L, x) -> bool:
    c = coords(L, x)
    return c is not None and all(v.denominator == 1 for v in c)


def nrd_gram(A: QuatAlgebra, L, scale=1):
    """Gram matrix G with x^T G x = nrd(sum x_i L_i) / scale."""
    s = Fraction(scale)
    return [[A.pair(L[i], L[j]) / (2 * s) for j in range(len(L))] for i in range(len(L))]


def reduced_basis(A: QuatAlgebra, L):
    return _key(lll([list(r) for r in L], lambda u, v: A.pair(u, v)))


def reduced_disc(A: QuatAlgebra, O) -> int:
    d = det([[A.pair(x, y) for y in O] for x in O])
    r = Fraction(int(round(float(d) ** 0.5)))
    assert r * r == d, "discriminant is not a square"
    return int(r)


def is_integral_lattice(A: QuatAlgebra, L) -> bool:
    if any(Fraction(A.nrd(x)).denominator != 1 or Fraction(A.trd(x)).denominator != 1 for x in L):
        return False
    return all(Fraction(A.pair(x, y)).denominator == 1 for x in L for y in L)


def is_order(A: QuatAlgebra, L) -> bool:
    one = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    return contains(L, one) and all(contains(L, A.mul(x, y)) for x in L for y in L)


# ---------------------------------------------------------------- orders

def _closure(A, gens, limit=12):
    L = lat(gens)
    for _ in range(limit):
        if not is_integral_lattice(A, L):
            return None
        L2 = lat(list(L) + [A.mul(x, y) for x in L for y in L])
        if L2 == L:
            return L
        L = L2
    return None


def maximal_order(A: QuatAlgebra):
    one = Fraction(1)
    O = _key([[one if i == j else Fraction(0) for j in range(4)] for i in range(4)])
    while True:
        dO = reduced_disc(A, O)
        if dO == A.disc:
            return O
        for ell in sorted(factorint(dO // A.disc)):
            bigger = None
            for c in product(range(ell), repeat=4):
                if not any(c):
                    continue
                x = tuple(sum(Fraction(ci, ell) * o[t] for ci, o in zip(c, O)) for t in range(4))
                if Fraction(A.nrd(x)).denominator != 1 or Fraction(A.trd(x)).denominator != 1:
                    continue
                bigger = _closure(A, list(O) + [x])
                if bigger is not None:
                    break
            if bigger is not None:
                O = bigger
                break
        else:
            raise RuntimeError("order saturation failed")


def _eichler_at(A, O, p):
    """Sub-order of O that is Eichler of level p at p."""
    Oi = inverse([list(r) for r in O])

    def cvec(x):
        return [sum(x[t] * Oi[t][s] for t in range(4)) for s in range(4)]

    alpha = None
    for c in product(range(p), repeat=4):
        if not any(c):
            continue
        x = tuple(sum(ci * o[t] for ci, o in zip(c, O)) for t in range(4))
        if A.nrd(x) % p == 0:
            alpha = x
            break
    W = [[int(v) % p for v in cvec(A.mul(alpha, o))] for o in O]
    phis = nullspace_mod_p(W, p)
    V = [[int(v) % p for v in cvec(A.mul(o, alpha))] for o in O]
    C = [[sum(ph[s] * V[i][s] for s in range(4)) % p for i in range(4)] for ph in phis]
    K = nullspace_mod_p(C, p)
    gens = [tuple(sum(k[i] * O[i][t] for i in range(4)) for t in range(4)) for k in K]
    gens += [tuple(p * x for x in o) for o in O]
    return lat(gens)


def eichler_basis(A: QuatAlgebra, level_prime: int):
    """Basis of an Eichler order of the given squarefree level (coprime to disc)."""
    O = maximal_order(A)
    for p in sorted(factorint(level_prime)):
        O = _eichler_at(A, O, p)
    assert is_order(A, O)
    assert reduced_disc(A, O) == A.disc * level_prime
    return O


# ---------------------------------------------------------------- ideals

def left_order(A, I, nI=None):
    nI = lat_norm(A, I) if nI is None else nI
    return lat_scale(lat_mul(A, I, lat_conj(A, I)), 1 / nI)


def units(A, O):
    """All elements of reduced norm 1 in the order O."""
    out = []
    for c, _ in short_vectors(nrd_gram(A, O), 1):
        out.append(tuple(sum(ci * o[t] for ci, o in zip(c, O)) for t in range(4)))
    return out


def is_isomorphic(A, J, K, nJ=None, nK=None):
    """True iff the right ideals J and K are in the same class."""
    nJ = lat_norm(A, J) if nJ is None else nJ
    nK = lat_norm(A, K) if nK is None else nK
    L = lat_mul(A, J, lat_conj(A, K))
    return bool(short_vectors(nrd_gram(A, L, nJ * nK), 1))


def neighbors(A, O, I, ell):
    """The ell + 1 right O-ideals J with ell I < J < I of index ell^2."""
    nI = lat_norm(A, I)
    out = {}
    sI = [tuple(ell * x for x in v) for v in I]
    for c in product(range(ell), repeat=4):
        if not any(c):
            continue
        x = tuple(sum(ci * v[t] for ci, v in zip(c, I)) for t in range(4))
        if (Fraction(A.nrd(x)) / (ell * nI)).denominator != 1:
            continue
        J = lat([A.mul(x, o) for o in O] + sI)
        out.setdefault(J, None)
    return list(out)


def _shrink(A, J):
    """An ideal in the class of J with smallest possible norm."""
    nJ = lat_norm(A, J)
    G = nrd_gram(A, J, nJ)
    bound = 1
    while True:
        vs = short_vectors(G, bound)
        if vs:
            break
        bound *= 2
    c, _ = min(vs, key=lambda t: (t[1], t[0]))
    y = tuple(sum(ci * v[t] for ci, v in zip(c, J)) for t in range(4))
    yb = A.conj(y)
    return lat([tuple(x / nJ for x in A.mul(yb, v)) for v in J])


def eichler_mass(disc: int, level: int) -> Fraction:
    m = Fraction(1, 24)
    for p in factorint(disc):
        m *= p - 1
    for p in factorint(level):
        m *= p + 1
    return m


# ---------------------------------------------------------------- order data

@dataclass(frozen=True)
class EichlerOrderData:
    algebra: QuatAlgebra
    level: int
    basis: tuple
    ideal_classes: tuple
    norms: tuple
    left_orders: tuple
    unit_groups: tuple
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def h(self) -> int:
        return len(self.ideal_classes)

    @property
    def unit_counts(self) -> tuple:
        return tuple(len(u) for u in self.unit_groups)

    @property
    def unit_halves(self) -> tuple:
        return tuple(len(u) // 2 for u in self.unit_groups)

    @property
    def mass(self) -> Fraction:
        return sum(Fraction(1, w) for w in self.unit_counts)

    @property
    def eichler_level(self) -> int:
        return self.level // self.algebra.disc

    def connecting(self, i: int, j: int):
        """(LLL basis of I_i I_j^{-1}, nu_ij = n(I_i)/n(I_j), denominator of the basis)."""
        key = ("conn", i, j)
        if key not in self._cache:
            A = self.algebra
            Ii, Ij = self.ideal_classes[i], self.ideal_classes[j]
            L = lat_scale(lat_mul(A, Ii, lat_conj(A, Ij)), 1 / self.norms[j])
            L = reduced_basis(A, L)
            nu = self.norms[i] / self.norms[j]
            self._cache[key] = (L, nu, common_denominator(L))
        return self._cache[key]

    def connecting_gram(self, i: int, j: int):
        L, nu, _ = self.connecting(i, j)
        return nrd_gram(self.algebra, L, nu)


def eichler_order(A: QuatAlgebra, N: int) -> EichlerOrderData:
    """Eichler order of level N together with a certified set of right ideal classes."""
    if N % A.disc:
        raise LevelNotDivisible(f"{A.disc} does not divide {N}")
    if any(e > 1 for e in factorint(N).values()):
        raise ValueError("level must be squarefree")
    Nprime = N // A.disc
    O = eichler_basis(A, Nprime)
    target = eichler_mass(A.disc, Nprime)
    ell = next(q for q in primerange(2, 1000) if N % q)
    classes = [O]
    norms = [Fraction(1)]
    lorders = [O]
    ugroups = [units(A, O)]
    mass = Fraction(1, len(ugroups[0]))
    queue = [O]
    while queue and mass < target:
        I = queue.pop(0)
        for J in neighbors(A, O, I, ell):
            J = _shrink(A, J)
            nJ = lat_norm(A, J)
            if any(is_isomorphic(A, J, K, nJ, nK) for K, nK in zip(classes, norms)):
                continue
            Ol = left_order(A, J, nJ)
            us = units(A, Ol)
            classes.append(J)
            norms.append(nJ)
            lorders.append(Ol)
            ugroups.append(us)
            mass += Fraction(1, len(us))
            queue.append(J)
            if mass >= target:
                break
    if mass != target:
        raise IncompleteClassSet(f"mass {mass} != {target}")
    return EichlerOrderData(A, N, O, tuple(classes), tuple(norms), tuple(lorders),
                            tuple(tuple(u) for u in ugroups))


# ---------------------------------------------------------------- weight 2

def _connecting_counts(od: EichlerOrderData, nmax: int):
    key = ("counts", nmax)
    if key not in od._cache:
        h = od.h
        c = [[theta_counts(od.connecting_gram(i, j), nmax) for j in range(h)] for i in range(h)]
        od._cache[key] = c
    return od._cache[key]


def brandt_scalar(od: EichlerOrderData, n: int):
    counts = _connecting_counts(od, max(n, 1))
    w = od.unit_counts
    out = []
    for i in range(od.h):
        row = []
        for j in range(od.h):
            c = int(counts[i][j][n])
            assert c % w[j] == 0
            row.append(c // w[j])
        out.append(row)
    return out


# ---------------------------------------------------------------- harmonic polynomials

def monomials(deg: int):
    return [(e1, e2, deg - e1 - e2) for e1 in range(deg, -1, -1) for e2 in range(deg - e1, -1, -1)]


@dataclass(frozen=True)
class HarmonicSpace:
    """Harmonic polynomials of degree nu on the pure quaternions w1 i + w2 j + w3 k."""

    algebra: QuatAlgebra
    nu: int

    @property
    def mons(self):
        return monomials(self.nu)

    def laplacian(self):
        a, b = self.algebra.a, self.algebra.b
        # inverse Gram of nrd on pure quaternions: diag(-1/a, -1/b, 1/(ab))
        g = [Fraction(-1, a), Fraction(-1, b), Fraction(1, a * b)]
        src = self.mons
        dst = monomials(self.nu - 2) if self.nu >= 2 else []
        idx = {m: i for i, m in enumerate(dst)}
        mat = [[Fraction(0)] * len(src) for _ in dst]
        for c, m in enumerate(src):
            for k in range(3):
                if m[k] >= 2:
                    m2 = list(m)
                    m2[k] -= 2
                    mat[idx[tuple(m2)]][c] += g[k] * m[k] * (m[k] - 1)
        return mat

    def basis(self):
        """Columns (as lists) spanning the harmonic subspace of the monomial coefficients."""
        n = len(self.mons)
        if self.nu < 2:
            return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
        return nullspace(self.laplacian(), n)


def subst_matrix(A3, nu):
    """S with coeffs(h(A w)) = S coeffs(h) for a 3x3 matrix A (exact)."""
    mons = monomials(nu)
    idx = {m: i for i, m in enumerate(mons)}
    S = [[Fraction(0)] * len(mons) for _ in mons]
    for ai, alpha in enumerate(mons):
        poly = {(0, 0, 0): Fraction(1)}
        for k in range(3):
            for _ in range(alpha[k]):
                new = {}
                for mono, coef in poly.items():
                    for l in range(3):
                        if A3[k][l]:
                            m2 = list(mono)
                            m2[l] += 1
                            m2 = tuple(m2)
                            new[m2] = new.get(m2, 0) + coef * A3[k][l]
                poly = new
        for mono, coef in poly.items():
            S[idx[mono]][ai] += coef
    return S


def subst_np(A3, nu):
    """Vectorised subst_matrix over a stack of integer matrices (n, 3, 3)."""
    mons = monomials(nu)
    idx = {m: i for i, m in enumerate(mons)}
    n = A3.shape[0]
    out = np.zeros((n, len(mons), len(mons)), dtype=A3.dtype)
    for ai, alpha in enumerate(mons):
        poly = {(0, 0, 0): np.ones(n, dtype=A3.dtype)}
        for k in range(3):
            for _ in range(alpha[k]):
                new = {}
                for mono, coef in poly.items():
                    for l in range(3):
                        m2 = list(mono)
                        m2[l] += 1
                        m2 = tuple(m2)
                        t = coef * A3[:, k, l]
                        new[m2] = new[m2] + t if m2 in new else t
                poly = new
        for mono, coef in poly.items():
            out[:, idx[mono], ai] += coef
    return out


def conj_action(A: QuatAlgebra, b):
    """3x3 matrix of w -> conj(b) w b on pure quaternion coordinates."""
    bb = A.conj(b)
    cols = []
    for k in range(1, 4):
        e = [0, 0, 0, 0]
        e[k] = 1
        v = A.mul(A.mul(bb, tuple(e)), b)
        cols.append(v[1:])
    return [[cols[c][r] for c in range(3)] for r in range(3)]


def conj_action_np(A: QuatAlgebra, B):
    """Stack of conj_action matrices for integer rows B of shape (n, 4)."""
    n = B.shape[0]
    Bc = B * np.array([1, -1, -1, -1], dtype=B.dtype)
    out = np.zeros((n, 3, 3), dtype=B.dtype)
    for k in range(1, 4):
        e = np.zeros((n, 4), dtype=B.dtype)
        e[:, k] = 1
        v = A.mul_np(A.mul_np(Bc, e), B)
        out[:, :, k - 1] = v[:, 1:]
    return out


# ---------------------------------------------------------------- Brandt systems

@dataclass
class BrandtSystem:
    order: EichlerOrderData
    weight: int
    matrices: dict = field(default_factory=dict)
    # per class: list of harmonic invariant polynomials (monomial coefficient lists)
    blocks: list = field(default_factory=list)

    @property
    def nu(self) -> int:
        return (self.weight - 2) // 2

    @property
    def dim(self) -> int:
        return sum(len(b) for b in self.blocks)

    def offsets(self):
        out, s = [], 0
        for b in self.blocks:
            out.append(s)
            s += len(b)
        return out

    def matrix(self, n: int):
        if n not in self.matrices:
            self.ensure([n])
        return self.matrices[n]

    def ensure(self, ns):
        need = sorted(set(n for n in ns if n not in self.matrices))
        if not need:
            return
        if self.nu == 0:
            for n in need:
                self.matrices[n] = [[Fraction(x) for x in row] for row in brandt_scalar(self.order, n)]
        else:
            self.matrices.update(_harmonic_matrices(self, need))


def _invariant_blocks(od: EichlerOrderData, nu: int):
    A = od.algebra
    H = HarmonicSpace(A, nu).basis()
    blocks = []
    for us in od.unit_groups:
        rows = []
        for u in us:
            S = subst_matrix(conj_action(A, u), nu)
            SH = [[sum(S[r][t] * h[t] for t in range(len(h))) - h[r] for r in range(len(h))] for h in H]
            # SH[c][r]: column c of (S - 1) H; the constraint is sum_c x_c SH[c][r] = 0
            for r in range(len(H[0])):
                rows.append([SH[c][r] for c in range(len(H))])
        ker = nullspace(rows, len(H)) if rows else [[Fraction(int(i == j)) for i in range(len(H))] for j in range(len(H))]
        polys = []
        for x in ker:
            p = [sum(x[c] * H[c][r] for c in range(len(H))) for r in range(len(H[0]))]
            den = common_denominator([p])
            p = [v * den for v in p]
            g = _qgcd(p)
            polys.append([v / g for v in p])
        blocks.append(polys)
    return blocks


def _sum_subst_by_norm(od, i, j, nu, ns):
    """{m: sum over b in L_ij with nrd(b) = m nu_ij of S(conj_action(b))} as exact Fractions."""
    A = od.algebra
    L, nuij, den = od.connecting(i, j)
    Bint = np.array([[int(x * den) for x in row] for row in L], dtype=np.int64)
    G = od.connecting_gram(i, j)
    want = set(ns)
    acc = {m: None for m in ns}
    gden = common_denominator(G)
    for coords, vals in iter_chunks(G, max(ns)):
        ms = vals // gden
        mask = np.isin(ms, list(want))
        if not mask.any():
            continue
        c = coords[mask]
        ms = ms[mask]
        bvec = c @ Bint
        S = subst_np(conj_action_np(A, bvec), nu)
        for m in np.unique(ms):
            tot = S[ms == m].sum(axis=0)
            acc[int(m)] = tot if acc[int(m)] is None else acc[int(m)] + tot
    scale = Fraction(1, den ** (2 * nu)) / nuij ** nu
    out = {}
    size = len(monomials(nu))
    for m in ns:
        t = acc[m]
        out[m] = [[Fraction(int(t[r][c])) * scale if t is not None else Fraction(0)
                   for c in range(size)] for r in range(size)]
    return out


def _harmonic_matrices(bs: BrandtSystem, ns):
    od, nu = bs.order, bs.nu
    if not bs.blocks:
        bs.blocks = _invariant_blocks(od, nu)
    offs = bs.offsets()
    dim = bs.dim
    mats = {n: [[Fraction(0)] * dim for _ in range(dim)] for n in ns}
    w = od.unit_counts
    for i in range(od.h):
        if not bs.blocks[i]:
            continue
        for j in range(od.h):
            if not bs.blocks[j]:
                continue
            sums = _sum_subst_by_norm(od, i, j, nu, ns)
            for n in ns:
                S = sums[n]
                for c, hj in enumerate(bs.blocks[j]):
                    img = [sum(S[r][t] * hj[t] for t in range(len(hj))) / w[j] for r in range(len(hj))]
                    x = solve_left(bs.blocks[i], img)
                    assert x is not None, "image left the invariant space"
                    for r, v in enumerate(x):
                        mats[n][offs[i] + r][offs[j] + c] = v
    return mats


def brandt_system(od: EichlerOrderData, weight: int, ns=()) -> BrandtSystem:
    if weight < 2 or weight % 2:
        raise ValueError("weight must be even and at least 2")
    bs = BrandtSystem(od, weight)
    if bs.nu == 0:
        bs.blocks = [[[Fraction(1)]] for _ in range(od.h)]
    else:
        bs.blocks = _invariant_blocks(od, bs.nu)
    bs.ensure(list(ns) or [1])
    return bs


def brandt(od: EichlerOrderData, n: int, w: int):
    return brandt_system(od, w, [n]).matrix(n)


# ---------------------------------------------------------------- eigensystems

@dataclass(frozen=True)
class EigenSystem:
    label: tuple
    eigenvector: tuple
    hecke: dict
    al_signs: dict
    eisenstein: bool = False

    @property
    def weight(self) -> int:
        return self.label[0]

    @property
    def level(self) -> int:
        return self.label[1]


def _apply(M, v):
    return [sum(r[t] * v[t] for t in range(len(v))) for r in M]


def _restrict(M, basis):
    """Matrix of M on the invariant subspace spanned by basis (list of vectors)."""
    cols = []
    for v in basis:
        x = solve_left(basis, _apply(M, v))
        assert x is not None
        cols.append(x)
    return [[cols[c][r] for c in range(len(basis))] for r in range(len(basis))]


def _poly_eval_matrix(coeffs, M):
    n = len(M)
    acc = [[Fraction(0)] * n for _ in range(n)]
    for c in coeffs:
        acc = mat_mul(acc, M)
        for i in range(n):
            acc[i][i] += c
    return acc


def _primitive(v):
    den = common_denominator([v])
    v = [x * den for x in v]
    g = _qgcd(v)
    v = [x / g for x in v]
    first = next(x for x in v if x != 0)
    if first < 0:
        v = [-x for x in v]
    return tuple(v)


def eigensystems(bs: BrandtSystem, qmax: int, allow_irrational: bool = False):
    """Simultaneous rational eigenvectors of the Brandt matrices at primes q <= qmax."""
    od = bs.order
    N = od.level
    good = [q for q in primerange(2, qmax + 1) if N % q]
    bad = sorted(factorint(N))
    bs.ensure(good + bad)
    x = symbols("x")
    dim = bs.dim
    pieces = [[[Fraction(int(i == j)) for i in range(dim)] for j in range(dim)]]
    irrational = []
    for q in good:
        M = bs.matrix(q)
        new = []
        for sub in pieces:
            if len(sub) == 1:
                new.append(sub)
                continue
            R = _restrict(M, sub)
            cp = Poly(_charpoly_sym(R, x), x)
            _, facs = factor_list(cp)
            for f, _e in facs:
                coeffs = [Fraction(int(c.p), int(c.q)) for c in Poly(f, x).all_coeffs()]
                K = nullspace(_poly_eval_matrix(coeffs, R), len(R))
                vecs = [[sum(k[c] * sub[c][t] for c in range(len(sub))) for t in range(dim)] for k in K]
                if Poly(f, x).degree() == 1:
                    new.append(vecs)
                else:
                    irrational.append((q, str(f.as_expr()), vecs))
        pieces = new
    if irrational and not allow_irrational:
        raise IrrationalEigensystem("cuspidal space does not split over Q",
                                    [f for _, f, _ in irrational])
    out = []
    for idx, sub in enumerate(p for p in pieces if len(p) == 1):
        v = _primitive(sub[0])
        piv = next(t for t in range(dim) if v[t] != 0)
        hecke = {}
        for q in good + bad:
            Mv = _apply(bs.matrix(q), v)
            hecke[q] = Mv[piv] / v[piv]
        nu = bs.nu
        eis = nu == 0 and all(hecke[q] == q + 1 for q in good)
        al = {}
        if not eis:
            for p in bad:
                al[p] = int(-hecke[p] / Fraction(p) ** nu)
        out.append(EigenSystem((bs.weight, N, idx), v, hecke, al, eis))
    return out


def _charpoly_sym(R, x):
    from sympy import Matrix
    return Matrix([[Rational(v.numerator, v.denominator) for v in row] for row in R]).charpoly(x).as_expr()


# ---------------------------------------------------------------- long eigenvalue series

def _row_point(poly, nu, search=3):
    """A small integer point where the polynomial does not vanish."""
    mons = monomials(nu)
    for w in product(range(-search, search + 1), repeat=3):
        v = sum(c * w[0] ** m[0] * w[1] ** m[1] * w[2] ** m[2] for c, m in zip(poly, mons))
        if v != 0:
            return w, v
    raise ValueError("polynomial vanishes on the search box")


def hecke_series(bs: BrandtSystem, es: EigenSystem, nmax: int):
    """[a(0)=0, a(1), ..., a(nmax)]: eigenvalues of B(n) on es for every n <= nmax.

    One row of the Brandt operators is evaluated at a single point w0, so one
    lattice enumeration per class pair yields all n at once.  Sums are kept
    twice: exactly modulo 2^64 (wrapping int64) and approximately in float64;
    together they pin down the exact integer while the float error stays
    far below 2^63.
    """
    od, nu = bs.order, bs.nu
    A = od.algebra
    mons = monomials(nu)
    offs = bs.offsets()
    polys = []
    for i, blk in enumerate(bs.blocks):
        poly = [Fraction(0)] * len(mons)
        for r, hpoly in enumerate(blk):
            x = es.eigenvector[offs[i] + r]
            poly = [p + x * t for p, t in zip(poly, hpoly)]
        polys.append(poly)
    r = next(i for i, p in enumerate(polys) if any(p))
    w0, base = _row_point(polys[r], nu)
    w0q = (0, *w0)
    e = [tuple(int(i == k) for k in range(4)) for i in range(4)]

    def W(x):
        return A.mul(A.mul(A.conj(x), w0q), x)[1:]

    # b -> conj(b) w0 b is quadratic: component k equals b^T P[k] b, P upper triangular
    P = np.zeros((3, 4, 4), dtype=np.int64)
    for i in range(4):
        for l in range(i, 4):
            if i == l:
                P[:, i, i] = W(e[i])
            else:
                s2 = tuple(x + y for x, y in zip(e[i], e[l]))
                P[:, i, l] = [u - v - t for u, v, t in zip(W(s2), W(e[i]), W(e[l]))]
    Pf = P.astype(float)
    exact = [Fraction(0)] * (nmax + 1)
    for j, poly in enumerate(polys):
        if not any(poly):
            continue
        kden = common_denominator([poly])
        coeffs = [int(p * kden) for p in poly]
        csum = float(sum(abs(c) for c in coeffs))
        L, nurj, den = od.connecting(r, j)
        Bint = np.array([[int(x * den) for x in row] for row in L], dtype=np.int64)
        G = od.connecting_gram(r, j)
        gden = common_denominator(G)
        acc = np.zeros(nmax + 1, dtype=np.int64)
        approx = np.zeros(nmax + 1, dtype=float)
        mag = np.zeros(nmax + 1, dtype=float)
        for coords, vals in iter_batches(G, nmax, half=True):
            ms = vals // gden
            b = coords @ Bint
            if nu and float(np.abs(b).max()) ** 2 * float(np.abs(P).max()) * 16 > 2.0 ** 52:
                raise OverflowError("vectors too long for exact float evaluation")
            if nu == 0:
                vals_j = np.full(len(b), coeffs[0], dtype=np.int64)
                fl = vals_j.astype(float)
            else:
                # entries stay far below 2^53, so float BLAS is exact here
                bf = b.astype(float)
                Wk = [np.rint(np.einsum('ij,ij->i', bf @ Pf[k], bf)).astype(np.int64) for k in range(3)]
                pw = [[np.ones(len(b), dtype=np.int64)] for _ in range(3)]
                for k in range(3):
                    for _ in range(nu):
                        pw[k].append(pw[k][-1] * Wk[k])
                vals_j = np.zeros(len(b), dtype=np.int64)
                fl = np.zeros(len(b))
                pf = [[x.astype(float) for x in row] for row in pw]
                for c, (e1, e2, e3) in zip(coeffs, mons):
                    if c:
                        vals_j += c * pw[0][e1] * pw[1][e2] * pw[2][e3]
                        fl += c * pf[0][e1] * pf[1][e2] * pf[2][e3]
                wmax = max(float(np.abs(w).max()) for w in Wk)
                if csum * wmax ** nu >= 2.0 ** 62:
                    raise OverflowError("single terms exceed the float-exact range; lower nmax")
            np.add.at(acc, ms, vals_j)
            np.add.at(approx, ms, fl)
            np.add.at(mag, ms, np.abs(fl))
        if mag.max(initial=0) * 1e-12 >= 2.0 ** 61:
            raise OverflowError("row sums too large to reconstruct; lower nmax")
        # half enumeration: the summand is even in b
        factor = Fraction(2, od.unit_counts[j] * kden) / (nurj ** nu * den ** (2 * nu))
        for m in range(1, nmax + 1):
            low = int(acc[m])
            total = low + (1 << 64) * round((float(approx[m]) - low) / 2.0 ** 64)
            if total:
                exact[m] += factor * total
    out = [0] * (nmax + 1)
    for m in range(1, nmax + 1):
        v = exact[m] / base
        if v.denominator != 1:
            raise ArithmeticError(f"non-integral eigenvalue at n={m}: {v}")
        out[m] = int(v)
    return out


# ---------------------------------------------------------------- admissible pairs

@dataclass(frozen=True)
class AdmissiblePair:
    f: EigenSystem
    g: EigenSystem
    N1: int
    N2: int
    M1: int                       # ramification used for the construction
    M1_options: tuple             # every M1 | M with an odd number of prime factors
    order: EichlerOrderData = field(compare=False, repr=False)
    f_space: BrandtSystem = field(compare=False, repr=False)
    g_space: BrandtSystem = field(compare=False, repr=False)

    @property
    def M(self) -> int:
        return gcd(self.N1, self.N2)


def _odd_omega_divisors(N: int):
    ps = sorted(factorint(N))
    out = []
    for mask in range(1, 1 << len(ps)):
        sub = [p for k, p in enumerate(ps) if mask >> k & 1]
        if len(sub) % 2:
            out.append(prod(sub))
    return tuple(sorted(out))


def _same_system(f: EigenSystem, g: EigenSystem) -> bool:
    return f.weight == g.weight and f.hecke == g.hecke


def select_pair(weights=(6, 2), level_bound: int = 50, relax: bool = False,
                qmax: int = 13, prefer_good=(2, 3, 5), levels=None,
                ramified: int | None = None) -> list[AdmissiblePair]:
    """Admissible (f, g) pairs with N1 = N2 = N squarefree, N <= level_bound.

    Both forms come from the Brandt spaces of one Eichler order of level N
    (so they are new at the ramified primes); only one-dimensional rational
    eigenspaces are kept, and Atkin-Lehner signs must agree at every p | N.
    Pairs whose level avoids ``prefer_good`` come first, then by level; an
    empty list means no admissible pair exists in range.  ``ramified`` fixes
    M1 (levels where it is not an option are skipped); by default the
    smallest option is used.
    """
    wf, wg = weights
    k = wf // 2
    if wg != 2 or wf % 2:
        raise ValueError("weights must be (2k, 2)")
    if not (k > 1 and k % 2 == 1) and not (relax and k == 1):
        raise ValueError(f"k={k} must be odd and > 1 (k=1 needs relax=True)")
    out = []
    cands = levels if levels is not None else range(2, level_bound + 1)
    for N in cands:
        fac = factorint(N)
        if N < 2 or any(e > 1 for e in fac.values()):
            continue
        opts = _odd_omega_divisors(N)
        if ramified is not None and ramified not in opts:
            continue
        M1 = opts[0] if ramified is None else ramified
        od = eichler_order(build_algebra(M1), N)
        fs = brandt_system(od, wf)
        gs = fs if wf == wg else brandt_system(od, wg)
        fsys = [e for e in eigensystems(fs, qmax, allow_irrational=True) if not e.eisenstein]
        gsys = [e for e in eigensystems(gs, qmax, allow_irrational=True) if not e.eisenstein]
        for f in fsys:
            for g in gsys:
                if _same_system(f, g):
                    continue
                if all(f.al_signs[p] == g.al_signs[p] for p in fac):
                    out.append(AdmissiblePair(f, g, N, N, M1, opts, od, fs, gs))
    out.sort(key=lambda P: (any(P.N1 % q == 0 for q in prefer_good), P.N1))
    return out
