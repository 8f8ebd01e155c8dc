"""Fourier coefficients of Yoshida lifts of degree two.

For right ideal classes I_1..I_h of an Eichler order, set
L_ij = I_i I_j^{-1} and nu_ij = n(I_i)/n(I_j).  The lift of an eigenform
f of weight 2v + 2 (vector-valued, components h_i) and an eigenform g of
weight 2 (components psi_j) has

    a(F, T) = sum_ij psi_j / (|O_i^x| |O_j^x|)
              * sum over (y1, y2) in L_ij^2 with Gram(y)/nu_ij = T of
                h_i((y1 conj(y2) - y2 conj(y1)) / nu_ij)

where Gram(y) = (n(y1), tr(y1 conj y2)/2; ., n(y2)).  The weight is v + 2.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
from sympy import factorint, isprime

from .classfield import QuadForm, is_fundamental, reduce_form, NotPositiveDefinite
from .lattice import iter_chunks, short_vectors
from .linalg import common_denominator
from .quaternion import BrandtSystem, EigenSystem, EichlerOrderData, monomials

KERNEL_VERSION = "pure-harmonic-1"


class NotEigen(RuntimeError):
    pass


class InsufficientDepth(RuntimeError):
    pass


class AtkinLehnerMismatch(ValueError):
    pass


class ZeroLift(RuntimeError):
    pass


class AnchorNotFound(RuntimeError):
    pass


class DepthExceeded(LookupError):
    pass


@dataclass(frozen=True, order=True)
class HalfIntMat:
    """The matrix (a, b/2; b/2, c) in Lambda_2."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_positive(self) -> bool:
        return self.a > 0 and self.disc < 0

    @property
    def content(self) -> int:
        return gcd(gcd(self.a, self.b), self.c)

    @property
    def primitive(self) -> bool:
        return self.content == 1

    @property
    def fundamental(self) -> bool:
        return is_fundamental(-self.disc)

    def scaled(self, m: int) -> "HalfIntMat":
        return HalfIntMat(m * self.a, m * self.b, m * self.c)

    def transform(self, U) -> "HalfIntMat":
        """U^T T U for an integral 2x2 matrix U = ((p, q), (r, s))."""
        (p, q), (r, s) = U
        f = QuadForm(self.a, self.b, self.c)
        return HalfIntMat(f(p, r), 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s,
                          f(q, s))

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def as_tuple(self):
        return (self.a, self.b, self.c)


def reduce_T(T: HalfIntMat):
    """GL_2(Z)-reduced form (0 <= b <= a <= c) and U with U^T T U = reduced."""
    if not T.is_positive():
        raise NotPositiveDefinite(f"{T} is not positive definite")
    g, M = reduce_form(QuadForm(T.a, T.b, T.c), with_transform=True)
    if g.b < 0:
        M = ((M[0][0], -M[0][1]), (M[1][0], -M[1][1]))
        g = QuadForm(g.a, -g.b, g.c)
    return HalfIntMat(g.a, g.b, g.c), M


def reduced_keys(bound: int):
    """All reduced positive T with |disc| <= bound, sorted."""
    out = []
    a = 1
    while 3 * a * a <= bound:
        for b in range(0, a + 1):
            c = a
            while 4 * a * c - b * b <= bound:
                out.append(HalfIntMat(a, b, c))
                c += 1
        a += 1
    return sorted(out)


# ---------------------------------------------------------------- coefficient tables

@dataclass
class SiegelCoeffTable:
    weight: int
    level: int
    bound: int
    coeffs: dict
    provenance: str
    source: object = field(default=None, compare=False, repr=False)

    def get(self, T: HalfIntMat) -> Fraction:
        R, _ = reduce_T(T)
        if -R.disc <= self.bound:
            return self.coeffs[R]
        if self.source is None:
            raise DepthExceeded(f"{T} lies beyond disc bound {self.bound}")
        return self.source.coeffs([R])[R]

    def get_many(self, Ts) -> dict:
        red = {T: reduce_T(T)[0] for T in Ts}
        out, missing = {}, set()
        for T, R in red.items():
            if -R.disc <= self.bound:
                out[T] = self.coeffs[R]
            else:
                missing.add(R)
        if missing:
            if self.source is None:
                raise DepthExceeded(f"{len(missing)} matrices beyond disc bound {self.bound}")
            extra = self.source.coeffs(sorted(missing))
            for T, R in red.items():
                if R in extra:
                    out[T] = extra[R]
        return out

    def nonzero(self) -> bool:
        return any(v != 0 for v in self.coeffs.values())

    def scaled(self, c) -> "SiegelCoeffTable":
        c = Fraction(c)
        return SiegelCoeffTable(self.weight, self.level, self.bound,
                                {k: v * c for k, v in self.coeffs.items()}, self.provenance)

    def header(self) -> str:
        return f"YCF1 weight={self.weight} level={self.level} bound={self.bound} prov={self.provenance}"

    def to_text(self) -> str:
        lines = [self.header()]
        for T in sorted(self.coeffs):
            v = Fraction(self.coeffs[T])
            lines.append(f"{T.a} {T.b} {T.c} {v.numerator} {v.denominator}")
        return "\n".join(lines) + "\n"


def write_ycf(table: SiegelCoeffTable, path) -> None:
    """Write atomically: temporary file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".ycf-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(table.to_text())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_ycf(path) -> SiegelCoeffTable:
    with open(path) as fh:
        head = fh.readline().split()
        if not head or head[0] != "YCF1":
            raise ValueError(f"{path}: not a YCF1 file")
        meta = dict(kv.split("=", 1) for kv in head[1:])
        coeffs = {}
        for line in fh:
            if not line.strip():
                continue
            a, b, c, num, den = map(int, line.split())
            coeffs[HalfIntMat(a, b, c)] = Fraction(num, den)
    return SiegelCoeffTable(int(meta["weight"]), int(meta["level"]), int(meta["bound"]),
                            coeffs, meta["prov"])


# ---------------------------------------------------------------- the lift

def _eval_poly(coeffs, mons, W):
    """Evaluate an integer polynomial at rows of W, exactly."""
    if len(W) == 0:
        return np.zeros(0, dtype=np.int64)
    deg = sum(mons[0])
    mx = int(np.abs(W).max()) if W.size else 0
    est = (mx ** deg) * sum(abs(c) for c in coeffs) * len(W)
    Wd = W if est < 2 ** 62 else W.astype(object)
    out = np.zeros(len(W), dtype=Wd.dtype)
    for c, (e1, e2, e3) in zip(coeffs, mons):
        if c:
            out = out + c * (Wd[:, 0] ** e1) * (Wd[:, 1] ** e2) * (Wd[:, 2] ** e3)
    return out


def _pure_twice(A, Y1, Y2):
    """Pure coordinates of y1 conj(y2) - y2 conj(y1) = 2 pure(y1 conj(y2))."""
    Y2c = Y2 * np.array([1, -1, -1, -1], dtype=Y2.dtype)
    P = A.mul_np(Y1, Y2c)
    return 2 * P[:, 1:]


@dataclass
class YoshidaLift:
    """Theta-series realization of the lift attached to (f, g)."""

    order: EichlerOrderData
    f_space: BrandtSystem
    f: EigenSystem
    g: EigenSystem
    threads: int = 1
    _vecs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        od = self.order
        self.nu = self.f_space.nu
        self.weight = self.nu + 2
        self.mons = monomials(self.nu)
        offs = self.f_space.offsets()
        self.kernels = []
        for i, blk in enumerate(self.f_space.blocks):
            poly = [Fraction(0)] * len(self.mons)
            for r, h in enumerate(blk):
                x = self.f.eigenvector[offs[i] + r]
                poly = [p + x * t for p, t in zip(poly, h)]
            den = common_denominator([poly]) if any(poly) else 1
            self.kernels.append(([int(p * den) for p in poly], den))
        self.psi = list(self.g.eigenvector)
        self.w = od.unit_counts

    @property
    def provenance(self) -> str:
        od = self.order
        blob = repr((sorted(self.f.hecke.items()), sorted(self.g.hecke.items()),
                     self.f.eigenvector, self.g.eigenvector, od.algebra.hilbert_pair,
                     od.algebra.disc, od.level, KERNEL_VERSION))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def _vectors(self, i, j, norms):
        """{m: integer algebra coordinates (scaled by den) of y in L_ij with nrd(y) = m nu_ij}."""
        key = (i, j)
        have_max, store = self._vecs.get(key, (0, {}))
        need = max(norms)
        if need > have_max:
            od = self.order
            L, _, den = od.connecting(i, j)
            Bint = np.array([[int(x * den) for x in row] for row in L], dtype=np.int64)
            G = od.connecting_gram(i, j)
            gden = common_denominator(G)
            parts = {}
            for coords, vals in iter_chunks(G, need):
                ms = vals // gden
                for m in np.unique(ms):
                    parts.setdefault(int(m), []).append(coords[ms == m] @ Bint)
            store = {m: np.concatenate(v) for m, v in parts.items()}
            have_max = need
            self._vecs[key] = (have_max, store)
        return {m: store.get(m, np.zeros((0, 4), dtype=np.int64)) for m in norms}

    def _pair_sums(self, i, j, targets):
        """Raw kernel sums per (a, b, c) over pairs in L_ij; targets: {(a, c): set of b}."""
        od = self.order
        A = od.algebra
        _, nuij, den = od.connecting(i, j)
        coeffs, _ = self.kernels[i]
        norms = sorted({a for a, _ in targets} | {c for _, c in targets})
        vecs = self._vectors(i, j, norms)
        gmat = np.diag(np.array([2, -2 * A.a, -2 * A.b, 2 * A.a * A.b], dtype=np.int64))
        scale = den * den * nuij
        assert scale.denominator == 1
        scale = int(scale)
        out = {}
        for (a, c), bs in sorted(targets.items()):
            V1, V2 = vecs[a], vecs[c]
            if len(V1) == 0 or len(V2) == 0:
                continue
            P = (V1 @ gmat) @ V2.T
            assert not (P % scale).any()
            P //= scale
            mask = np.isin(P, np.array(sorted(bs), dtype=np.int64))
            if not mask.any():
                continue
            r1, r2 = np.nonzero(mask)
            bvals = P[r1, r2]
            W = _pure_twice(A, V1[r1], V2[r2])
            vals = _eval_poly(coeffs, self.mons, W)
            order = np.argsort(bvals, kind="stable")
            bvals, vals = bvals[order], vals[order]
            ub, starts = np.unique(bvals, return_index=True)
            sums = np.add.reduceat(vals, starts)
            for b, s in zip(ub.tolist(), sums.tolist()):
                out[(a, b, c)] = int(s)
        return out

    def coeffs(self, Ts, reduce: bool = True) -> dict:
        """Exact a(F, T).  With reduce=False every T is summed over as given,
        which is how GL2 invariance is tested independently of reduce_T."""
        Ts = list(dict.fromkeys(reduce_T(T)[0] for T in Ts) if reduce else dict.fromkeys(Ts))
        targets = {}
        for T in Ts:
            targets.setdefault((T.a, T.c), set()).add(T.b)
        od = self.order
        jobs = [(i, j) for i in range(od.h) for j in range(od.h)
                if self.psi[j] != 0 and any(self.kernels[i][0])]

        if self.threads > 1:
            # vectors are cached per class pair; fill the cache before fanning out
            norms = sorted({a for a, _ in targets} | {c for _, c in targets})
            for i, j in jobs:
                self._vectors(i, j, norms)
            # split the (a, c) blocks round-robin so every thread gets a share of each pair
            items = sorted(targets.items())
            n = max(1, min(len(items), 4 * self.threads))
            chunks = [dict(items[k::n]) for k in range(n)]
            work = [(ij, ch) for ij in jobs for ch in chunks]
            with ThreadPoolExecutor(self.threads) as ex:
                parts = list(ex.map(lambda w: (w[0], self._pair_sums(w[0][0], w[0][1], w[1])), work))
            merged = {ij: {} for ij in jobs}
            for ij, sums in parts:
                merged[ij].update(sums)
            results = list(merged.items())
        else:
            results = [(ij, self._pair_sums(ij[0], ij[1], targets)) for ij in jobs]
        out = {T: Fraction(0) for T in Ts}
        for (i, j), sums in results:
            _, nuij, den = od.connecting(i, j)
            kden = self.kernels[i][1]
            factor = Fraction(self.psi[j]) / (self.w[i] * self.w[j] * kden * (den * den * nuij) ** self.nu)
            for T in Ts:
                s = sums.get((T.a, T.b, T.c))
                if s:
                    out[T] += factor * s
        return out

    def table(self, bound: int) -> SiegelCoeffTable:
        keys = reduced_keys(bound)
        vals = self.coeffs(keys)
        return SiegelCoeffTable(self.weight, self.order.level, bound,
                                {T: vals[T] for T in keys}, self.provenance, source=self)


def theta_pair_coeff(order: EichlerOrderData, i: int, j: int, kernel, T: HalfIntMat) -> Fraction:
    """Sum of kernel((x1 conj x2 - x2 conj x1) / nu_ij) over pairs in L_ij^2 with Gram / nu_ij = T.

    ``kernel`` maps a pure quaternion (three Fractions) to a number.  This is
    a plain exact enumeration, used as a reference for the vectorized sums.
    """
    A = order.algebra
    L, nuij, _ = order.connecting(i, j)
    G = order.connecting_gram(i, j)
    vecs = {}
    for x, v in short_vectors(G, max(T.a, T.c)):
        if v in (T.a, T.c):
            y = tuple(sum(x[k] * L[k][t] for k in range(4)) for t in range(4))
            vecs.setdefault(v, []).append(y)
    total = Fraction(0)
    for y1 in vecs.get(T.a, []):
        for y2 in vecs.get(T.c, []):
            if Fraction(A.pair(y1, y2)) / nuij != T.b:
                continue
            p = A.mul(y1, A.conj(y2))
            total += kernel(tuple(2 * Fraction(x) / nuij for x in p[1:]))
    return total


def build_yoshida(order: EichlerOrderData, f_space: BrandtSystem, f: EigenSystem,
                  g: EigenSystem, bound: int, threads: int = 1,
                  check_al: bool = True) -> SiegelCoeffTable:
    """Coefficient table of the Yoshida lift of (f, g) up to |disc| <= bound."""
    if check_al:
        for p in sorted(set(f.al_signs) & set(g.al_signs)):
            if f.al_signs[p] != g.al_signs[p]:
                raise AtkinLehnerMismatch(
                    f"Atkin-Lehner signs differ at {p}: {f.al_signs[p]} vs {g.al_signs[p]}")
    if g.weight != 2:
        raise ValueError("second form must have weight 2")
    if (f.weight // 2) % 2 == 0:
        raise ValueError("scalar table needs an even Siegel weight")
    lift = YoshidaLift(order, f_space, f, g, threads=threads)
    table = lift.table(bound)
    if not table.nonzero():
        raise ZeroLift("all coefficients vanish up to the bound")
    return table


# ---------------------------------------------------------------- Hecke checks

def u_p(table: SiegelCoeffTable, p: int, max_base_disc: int | None = None):
    """Eigenvalue of U(p): a(F, pT) = lambda a(F, T) for every testable stored T.

    Only T with |disc(pT)| <= bound are testable from the table alone; with a
    coefficient source attached, T up to ``max_base_disc`` are tested too.
    """
    if table.level % p:
        raise ValueError(f"{p} does not divide the level")
    limit = table.bound // (p * p)
    if table.source is not None and max_base_disc is not None:
        limit = max(limit, max_base_disc)
    base = [T for T in sorted(table.coeffs) if -T.disc <= limit]
    if not any(table.coeffs[T] != 0 for T in base):
        raise InsufficientDepth(f"no stored T with nonzero coefficient and |disc(pT)| in range")
    images = table.get_many([T.scaled(p) for T in base])
    lam = None
    for T in base:
        v, w = table.coeffs[T], images[T.scaled(p)]
        if v == 0:
            if w != 0:
                raise NotEigen(f"a(F,T)=0 but a(F,{p}T)={w} at T={T}")
            continue
        r = w / v
        if lam is None:
            lam = r
        elif r != lam:
            raise NotEigen(f"ratio {r} at {T} differs from {lam}")
    return lam, len(base)


def _hnf_list(n: int):
    out = []
    for a in range(1, n + 1):
        if n % a:
            continue
        for d in range(1, n + 1):
            if n % d:
                continue
            for b in range(d):
                if (n * b) % (a * d) == 0:
                    out.append((a, b, d))
    return out


def _sigma_count(D, M, n):
    """#{Sigma sym mod 1, Sigma D integral} if tr(M Sigma) is always integral, else 0."""
    a, b, d = D
    s = np.arange(n)
    s11, s12, s22 = np.meshgrid(s, s, s, indexing="ij")
    # S D with D = ((a, b), (0, d)), S = ((s11, s12), (s12, s22))
    ok = ((s11 * a) % n == 0) & ((s11 * b + s12 * d) % n == 0) & \
         ((s12 * a) % n == 0) & ((s12 * b + s22 * d) % n == 0)
    m11, m12x2, m22 = M
    tr = m11 * s11 + m12x2 * s12 + m22 * s22
    if ((tr[ok]) % n).any():
        return 0
    return int(ok.sum())


def _hecke_terms(kappa: int, n: int, T: HalfIntMat):
    """[(coefficient, matrix)] with a(F|T(n), T) = sum coefficient * a(F, matrix)."""
    terms = []
    for (a, b, d) in _hnf_list(n):
        # M = D T D^T / n with T = ((A, B/2), (B/2, C))
        A, B, C = T.a, T.b, T.c
        m11 = Fraction(a * a * A + a * b * B + b * b * C, n)
        m12x2 = Fraction(a * d * B + 2 * b * d * C, n)
        m22 = Fraction(d * d * C, n)
        if m11.denominator != 1 or m12x2.denominator != 1 or m22.denominator != 1:
            continue
        M = (int(m11), int(m12x2), int(m22))
        cnt = _sigma_count((a, b, d), M, n)
        if cnt == 0:
            continue
        coef = Fraction(n) ** (2 * kappa - 3) * Fraction(1, (a * d) ** kappa) * cnt
        terms.append((coef, HalfIntMat(*M)))
    return terms


def hecke_image(table: SiegelCoeffTable, n: int, T: HalfIntMat) -> Fraction:
    terms = _hecke_terms(table.weight, n, T)
    vals = table.get_many([M for _, M in terms])
    return sum((c * vals[M] for c, M in terms), Fraction(0))


def hecke_tq(table: SiegelCoeffTable, q: int, n: int | None = None, count: int = 4):
    """Eigenvalue of T(n) (default n = q) from the first few nonzero coefficients."""
    if table.level % q == 0:
        raise ValueError(f"{q} divides the level")
    n = q if n is None else n
    base = [T for T in sorted(table.coeffs, key=lambda T: (-T.disc, T)) if table.coeffs[T] != 0][:count]
    if len(base) < 2:
        raise InsufficientDepth("need at least two nonzero coefficients")
    terms = {T: _hecke_terms(table.weight, n, T) for T in base}
    needed = {M for ts in terms.values() for _, M in ts}
    vals = table.get_many(sorted(needed))
    lam = None
    for T in base:
        img = sum((c * vals[M] for c, M in terms[T]), Fraction(0))
        r = img / table.coeffs[T]
        if lam is None:
            lam = r
        elif r != lam:
            raise NotEigen(f"T({n}) ratio {r} at {T} differs from {lam}")
    return lam


def spin_factor(lam_q, lam_q2, q: int, kappa: int):
    """Coefficients (constant first) of the degree 4 spinor Euler polynomial."""
    return [Fraction(1), -lam_q, lam_q ** 2 - lam_q2 - Fraction(q) ** (2 * kappa - 4),
            -Fraction(q) ** (2 * kappa - 3) * lam_q, Fraction(q) ** (4 * kappa - 6)]


def _polymul(p, r):
    out = [Fraction(0)] * (len(p) + len(r) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(r):
            out[i + j] += x * y
    return out


def product_factor(af, ag, q: int, kappa: int, shift: int):
    """(1 - a_f X + q^{2k-3} X^2)(1 - q^shift a_g X + q^{2k-3} X^2)."""
    c = Fraction(q) ** (2 * kappa - 3)
    return _polymul([Fraction(1), -Fraction(af), c],
                    [Fraction(1), -Fraction(q) ** shift * Fraction(ag), c])


@dataclass
class EulerCheck:
    q: int
    lam_q: Fraction
    lam_q2: Fraction
    spin: list
    product: list

    @property
    def ok(self) -> bool:
        return self.spin == self.product


def euler_factor(table, f: EigenSystem, g: EigenSystem, q: int, shift: int) -> EulerCheck:
    lq = hecke_tq(table, q)
    lq2 = hecke_tq(table, q, n=q * q)
    sp = spin_factor(lq, lq2, q, table.weight)
    pr = product_factor(f.hecke[q], g.hecke[q], q, table.weight, shift)
    return EulerCheck(q, lq, lq2, sp, pr)


def admissible_shifts(table, f: EigenSystem, g: EigenSystem, q: int):
    """All s in [0, 2k) for which the spin factor at q splits as f times shifted g."""
    sp = spin_factor(hecke_tq(table, q), hecke_tq(table, q, n=q * q), q, table.weight)
    return [s for s in range(0, 2 * table.weight)
            if product_factor(f.hecke[q], g.hecke[q], q, table.weight, s) == sp]


def calibrate_shift(table, f: EigenSystem, g: EigenSystem, primes=(2, 3, 5)):
    """(s0, primes used).  Starts at the first prime and narrows with the next
    ones only while the shift is still ambiguous (e.g. when a_g(q) = 0)."""
    cands = None
    used = []
    for q in primes:
        hits = set(admissible_shifts(table, f, g, q))
        cands = hits if cands is None else cands & hits
        used.append(q)
        if len(cands) <= 1:
            break
    if cands is None or len(cands) != 1:
        return None, tuple(used)
    return cands.pop(), tuple(used)


# ---------------------------------------------------------------- Fourier-Jacobi

@dataclass(frozen=True)
class JacobiSlice:
    index: int
    cmap: dict
    bound: int

    def c(self, n: int, r: int) -> Fraction:
        m = self.index
        # (n, r) ~ (n + r l + m l^2, r + 2 m l); bring r into [-m, m]
        l = -((r + m) // (2 * m))
        return self.cmap[(n + r * l + m * l * l, r + 2 * m * l)]


def fourier_jacobi(table: SiegelCoeffTable, m: int) -> JacobiSlice:
    cmap = {}
    for r in range(-m, m + 1):
        n = r * r // (4 * m) + 1
        while 4 * n * m - r * r <= table.bound:
            cmap[(n, r)] = table.get(HalfIntMat(n, r, m))
            n += 1
    return JacobiSlice(m, cmap, table.bound)


def _complete_basis(x: int, y: int):
    """U in SL_2(Z) whose second column is (x, y)."""
    g, s, t = _xgcd(y, x)
    assert g == 1
    # s y + t x = 1; U = ((s, x), (-t, y)) has det s y + t x = 1
    return ((s, x), (-t, y))


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lemma21_divide(table: SiegelCoeffTable, T: HalfIntMat, primes):
    """Divide out level primes from an imprimitive T with a(F, T) != 0 via U(p)."""
    for p in primes:
        while T.content % p == 0:
            try:
                lam, _ = u_p(table, p)
            except InsufficientDepth:
                lam, _ = u_p(table, p, max_base_disc=60)
            if lam == 0:
                break
            T = HalfIntMat(T.a // p, T.b // p, T.c // p)
    return T


def prime_anchor(table: SiegelCoeffTable, search: int = 50):
    """(p, T') with p prime not dividing the level, T' = (n', r'/2; r'/2, p), a(F, T') != 0."""
    N = table.level
    keys = sorted(table.coeffs, key=lambda T: (-T.disc, T))
    prims = [T for T in keys if table.coeffs[T] != 0 and T.primitive]
    if not prims:
        imprim = [T for T in keys if table.coeffs[T] != 0]
        prims = []
        for T in imprim:
            S = lemma21_divide(table, T, sorted(factorint(N)))
            if S.primitive and table.get(S) != 0:
                prims.append(S)
        if not prims:
            raise AnchorNotFound("no primitive matrix with nonzero coefficient")
    for T in prims:
        if isprime(T.c) and N % T.c and (-T.disc) % T.c:
            return T.c, T
        best = None
        for x in range(-search, search + 1):
            for y in range(0, search + 1):
                if gcd(x, y) != 1 or (y == 0 and x != 1):
                    continue
                v = T.value(x, y)
                if isprime(v) and N % v and (-T.disc) % v:
                    if best is None or v < best[0]:
                        best = (v, x, y)
        if best is not None:
            p, x, y = best
            U = _complete_basis(x, y)
            Tp = T.transform(U)
            assert Tp.c == p and Tp.disc == T.disc
            return p, Tp
    raise AnchorNotFound(f"no prime value within |x|,|y| <= {search}")
