"""Central values of L(s, f x theta_chi) by a smoothed functional equation.

Coefficients are assembled exactly (cyclotomic arithmetic) from local Euler
factors and only flattened to floats for the numerical evaluation.  The
completed function is

    Lambda(s) = Q^(s/2) gamma(s) L(s) = eps * conj-Lambda(1 - s)

and is evaluated by splitting its Mellin integral at t, which writes Lambda
as two rapidly convergent sums of incomplete Mellin transforms G(y, s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.integrate import quad_vec
from sympy import factorint, primerange, sqrt_mod

from .classfield import ClassCharacter, QuadForm, kronecker, theta_coeffs
from .cyclo import Cyc


class RamifiedOverlap(ValueError):
    pass


class PrecisionUnreachable(RuntimeError):
    pass


# ---------------------------------------------------------------- coefficients

def _series_inverse(poly, deg):
    """Power series 1/poly up to X^deg; poly[0] must be 1."""
    out = [poly[0] * 0 + 1]
    for n in range(1, deg + 1):
        acc = out[0] * 0
        for k in range(1, min(n, len(poly) - 1) + 1):
            acc = acc + poly[k] * out[n - k]
        out.append(-acc)
    return out


def _pmul(p, q):
    out = [p[0] * 0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def prime_ideal_class(chi: ClassCharacter, p: int) -> int | None:
    """Class of a prime ideal above p (split or ramified), None if p is inert."""
    d = chi.group.d
    k = kronecker(-d, p)
    if k == -1:
        return None
    if p == 2:
        b = d % 2
        while (b * b + d) % 8:
            b += 2
    else:
        s = sqrt_mod(-d % p, p) if d % p else 0
        b = s if (s - d) % 2 == 0 else s + p
    return chi.group.class_of(QuadForm(p, b, (b * b + d) // (4 * p)))


def local_factor(ap: int, p: int, weight: int, level: int, chi: ClassCharacter):
    """Reciprocal Euler polynomial at p (arithmetic normalization), as Cyc coefficients."""
    h = chi.h
    one = Cyc.const(h, 1)
    w = weight - 1
    c = prime_ideal_class(chi, p)
    d = chi.group.d
    if level % p == 0:
        if c is None:
            return [one, one * 0, one * (-ap * ap)]
        u = chi(c)
        if d % p == 0:
            return [one, -(u * ap)]
        ub = chi(chi.group.inv(c))
        return _pmul([one, -(u * ap)], [one, -(ub * ap)])
    if c is None:
        return [one, one * 0, one * (2 * p ** w - ap * ap), one * 0, one * p ** (2 * w)]
    u = chi(c)
    quad = lambda t: [one, -(t * ap), t * t * p ** w]
    if d % p == 0:
        return quad(u)
    ub = chi(chi.group.inv(c))
    return _pmul(quad(u), quad(ub))


def rankin_coeffs(af, weight: int, level: int, chi: ClassCharacter, nmax: int):
    """Exact B(1..nmax) of L(s, f x theta_chi); B[0] is unused.

    ``af`` lists a_f(n) (index n) for at least every prime up to nmax.
    """
    d = chi.group.d
    if math.gcd(d, level) != 1:
        raise RamifiedOverlap(f"gcd(d={d}, N={level}) > 1")
    if len(af) <= nmax and nmax > 1:
        raise PrecisionUnreachable(f"need a_f(n) up to {nmax}, have {len(af) - 1}")
    h = chi.h
    zero = Cyc.const(h, 0)
    B = [zero] * (nmax + 1)
    B[1] = Cyc.const(h, 1)
    spf = list(range(nmax + 1))
    for p in primerange(2, math.isqrt(nmax) + 1):
        for m in range(p * p, nmax + 1, p):
            if spf[m] == m:
                spf[m] = p
    local = {}
    for p in primerange(2, nmax + 1):
        e = int(math.log(nmax, p)) + 1
        local[p] = _series_inverse(local_factor(int(af[p]), p, weight, level, chi), e)
    for n in range(2, nmax + 1):
        p = spf[n]
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        B[n] = local[p][e] * B[m] if m > 1 else local[p][e]
    return B


def rankin_coeffs_naive(af, weight: int, level: int, chi: ClassCharacter, nmax: int):
    """Same coefficients by the Dirichlet convolution

        B(n) = sum_{l m^2 = n, (m, N) = 1} a_f(l) r_chi(l) chi_{-d}(m) m^(weight - 1).
    """
    th = theta_coeffs(chi, nmax)
    h = chi.h
    d = chi.group.d
    B = [Cyc.const(h, 0)] * (nmax + 1)
    for m in range(1, math.isqrt(nmax) + 1):
        if math.gcd(m, level) != 1:
            continue
        k = kronecker(-d, m)
        if k == 0:
            continue
        w = k * m ** (weight - 1)
        for l in range(1, nmax // (m * m) + 1):
            if af[l]:
                B[l * m * m] = B[l * m * m] + th[l] * (af[l] * w)
    return B


# ---------------------------------------------------------------- gamma kernels

@dataclass(frozen=True)
class Gamma:
    """Archimedean factor: 'R' = Gamma_R(s + a), 'C' = Gamma_C(s + a), 'CC' = Gamma_C(s + a)^2."""

    kind: str
    shift: float

    def __call__(self, s):
        a = s + self.shift
        if self.kind == "R":
            return np.pi ** (-a / 2) * special.gamma(a / 2)
        g = 2 * (2 * np.pi) ** (-a) * special.gamma(a)
        return g if self.kind == "C" else g * g

    def kernel(self, y):
        """Inverse Mellin transform of the factor."""
        y = np.asarray(y, dtype=float)
        a = self.shift
        if self.kind == "R":
            return 2 * y ** a * np.exp(-np.pi * y * y)
        if self.kind == "C":
            return 2 * y ** a * np.exp(-2 * np.pi * y)
        return 8 * y ** a * special.k0(4 * np.pi * np.sqrt(y))

    @property
    def degree(self) -> int:
        return {"R": 1, "C": 2, "CC": 4}[self.kind]

    def majorant(self, y, sigma: float):
        """Upper bound for G(y, sigma), valid where the returned value is finite.

        With kernel(y t) <= kernel(y) t^a exp(-c(y) (phi(t) - 1)) for t >= 1 the
        remaining integral is bounded in closed form (for CC this uses that
        K0(x) e^x decreases).
        """
        y = np.asarray(y, dtype=float)
        a = self.shift + sigma - 1
        if self.kind == "CC":
            rate = 4 * np.pi * np.sqrt(y) - max(2 * a + 1, 0)
            fac = 2 / rate
        elif self.kind == "C":
            rate = 2 * np.pi * y - max(a, 0)
            fac = 1 / rate
        else:
            rate = 2 * np.pi * y * y - max(a, 0)
            fac = 1 / rate
        return np.where(rate > 0, self.kernel(y) * fac, np.inf)

    def cutoff(self, rel=1e-13) -> float:
        """y beyond which the kernel is below rel times the factor's value at 1/2."""
        ref = abs(self(0.5))
        y = 1.0
        while self.kernel(y) * max(y, 1) > rel * ref:
            y *= 1.1
        return y


def incomplete_mellin(gam: Gamma, ys, s, tol=1e-15):
    """G(y, s) = int_1^oo kernel(y t) t^(s-1) dt for each y, with an error estimate."""
    ys = np.asarray(ys, dtype=float)
    if len(ys) == 0:
        return np.zeros(0, dtype=complex), 0.0
    ymax = gam.cutoff(1e-22)
    umax = max(math.log(ymax / ys.min()), 0.0) + 1.0
    s = complex(s)

    order = np.argsort(ys)
    ysort = ys[order]

    def f(u):
        t = math.exp(u)
        live = int(np.searchsorted(ysort, ymax / t, side="right"))
        k = np.zeros(len(ys))
        k[order[:live]] = gam.kernel(ysort[:live] * t)
        ph = np.exp(s * u)
        return np.concatenate([k * ph.real, k * ph.imag])

    val, err = quad_vec(f, 0.0, umax, epsabs=tol, epsrel=1e-13, limit=400)
    n = len(ys)
    return val[:n] + 1j * val[n:], float(err)


# ---------------------------------------------------------------- L-data and evaluation

SIGMA_MAX = 0.6       # truncation bounds are taken at this real part (covers the test points)


_TAU = np.zeros(1)


def _tau(nmax: int) -> np.ndarray:
    """Divisor counts tau(0..nmax) from a sieve that grows by doubling."""
    global _TAU
    if len(_TAU) <= nmax:
        size = max(2 * len(_TAU), nmax + 1, 1 << 12)
        t = np.zeros(size)
        for k in range(1, size):
            t[k::k] += 1
        _TAU = t
    return _TAU[:nmax + 1]


@dataclass
class LData:
    """Unitary-normalized Dirichlet coefficients b(n) with their functional equation data."""

    coeffs: np.ndarray          # b[0] unused
    conductor: int
    gamma: Gamma
    sign: complex | None = None
    self_dual: bool = False
    label: str = ""
    exact: list | None = field(default=None, repr=False)
    tol: float = 1e-8

    @property
    def nmax(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        return self.gamma.degree

    @property
    def gamma_shifts(self):
        return (self.gamma.kind, self.gamma.shift)

    def _scale(self) -> float:
        return abs(gamma_conductor(self, 0.5))

    def tail_bound(self, M: int, t: float = 1.0) -> float:
        return _tail_bound(self.gamma, self.conductor, M, t)

    def needed_terms(self, t: float = 1.0, tol: float | None = None) -> int:
        return _needed_terms(self.gamma, self.conductor, t, self.tol if tol is None else tol)


@lru_cache(maxsize=256)
def _tail_bound(gam: Gamma, Q: int, M: int, t: float) -> float:
    """Bound (in units of L) for the terms n > M of both sums, via |b(n)| <= tau(n)^(deg-1).

    Terms beyond 3M are dropped from the bound; the kernel decays like
    exp(-c sqrt(y)) there, many orders of magnitude below the retained part.
    """
    rq = math.sqrt(Q)
    n = np.arange(M + 1, 3 * M + 1)
    w = _tau(3 * M)[M + 1:] ** (gam.degree - 1)
    ga = gam.majorant(n * t / rq, SIGMA_MAX)
    gb = gam.majorant(n / (t * rq), SIGMA_MAX)
    tot = t ** SIGMA_MAX * float(w @ np.abs(ga)) + max(t ** (SIGMA_MAX - 1), 1.0) * float(w @ np.abs(gb))
    return tot / abs(Q ** 0.25 * gam(0.5))


@lru_cache(maxsize=256)
def _needed_terms(gam: Gamma, Q: int, t: float, tol: float) -> int:
    """Smallest tried M whose tail bound is below tol / 10."""
    M = int(math.ceil(gam.cutoff(1e-6) * math.sqrt(Q) * max(t, 1 / t)))
    while _tail_bound(gam, Q, M, t) > tol / 10:
        M = int(math.ceil(M * 1.15))
    return M


@lru_cache(maxsize=64)
def _kernel_sums(gam: Gamma, Q: int, s: complex, t: float, M: int):
    """G(n t / sqrt Q, s) and G(n / (t sqrt Q), 1 - s) for n <= M, shared by all characters."""
    rq = math.sqrt(Q)
    n = np.arange(1, M + 1)
    ga, ea = incomplete_mellin(gam, n * t / rq, s)
    gb, eb = incomplete_mellin(gam, n / (t * rq), 1 - s)
    return ga, gb, ea, eb


def gamma_conductor(ld: LData, s):
    """Q^(s/2) gamma(s), the factor completing L(s)."""
    s = complex(s)
    return ld.conductor ** (s / 2) * ld.gamma(s)


def rankin_gamma(weight: int, d: int, level: int):
    """(Gamma, Q) for f of weight `weight` and level N times a weight one theta series of disc -d."""
    return Gamma("CC", (weight - 1) / 2), (level * d) ** 2


def rankin_ldata(af, weight: int, level: int, chi: ClassCharacter, nmax: int,
                 label: str = "", tol: float = 1e-8) -> LData:
    """L(s, f x theta_chi) for f of even weight and squarefree level, chi a class group character."""
    B = rankin_coeffs(af, weight, level, chi, nmax)
    half = (weight - 1) / 2
    b = np.zeros(nmax + 1, dtype=complex)
    for n in range(1, nmax + 1):
        b[n] = complex(B[n]) / n ** half
    gam, Q = rankin_gamma(weight, chi.group.d, level)
    # r_chi(n) is fixed by ideal conjugation, so the coefficients are real for every chi
    b = b.real.astype(complex)
    return LData(b, Q, gam, None, True, label, B, tol)


def dirichlet_ldata(q: int, nmax: int) -> LData:
    """L(s, chi_q) for the real primitive character attached to a fundamental discriminant q."""
    b = np.array([0.0] + [float(kronecker(q, n)) for n in range(1, nmax + 1)], dtype=complex)
    return LData(b, abs(q), Gamma("R", 0.0 if q > 0 else 1.0), 1.0, True, f"chi_{q}")


def _parts(ld: LData, s, t, M):
    """(A, B, quadrature error) with Lambda(s) = A + eps * B for the splitting point t."""
    if M > ld.nmax:
        raise PrecisionUnreachable(f"{ld.label}: needs {M} coefficients, {ld.nmax} available")
    b = ld.coeffs[1:M + 1]
    ga, gb, ea, eb = _kernel_sums(ld.gamma, ld.conductor, complex(s), float(t), M)
    A = t ** s * _blocksum(b * ga)
    Bv = t ** (s - 1) * _blocksum(np.conj(b) * gb)
    # quad_vec reports the 2-norm of the error vector, so Cauchy-Schwarz uses |b|_2
    normb = float(np.sqrt(np.sum(np.abs(b) ** 2)))
    return A, Bv, (ea * abs(t ** s) + eb * abs(t ** (s - 1))) * normb


def _blocksum(x, block=4096):
    """Fixed-block tree sum, independent of how the terms were produced."""
    parts = [x[i:i + block].sum() for i in range(0, len(x), block)]
    while len(parts) > 1:
        parts = [sum(parts[i:i + 2]) for i in range(0, len(parts), 2)]
    return parts[0] if parts else 0j


SIGN_POINTS = (complex(0.55, 0.07), complex(0.45, 0.19))
SPLITS = (1.0, 1.17)


def solve_sign(ld: LData) -> complex:
    """Root number from two splittings of Lambda at two auxiliary points.

    Lambda(s) = A(t) + eps B(t) for every t, so two values of t determine eps.
    The two points must agree; self-dual data are rounded to +-1.
    """
    t0, t1 = SPLITS
    M = ld.needed_terms(max(t0, t1))
    sols = []
    for s in SIGN_POINTS:
        A0, B0, _ = _parts(ld, s, t0, M)
        A1, B1, _ = _parts(ld, s, t1, M)
        sols.append((A0 - A1) / (B1 - B0))
    if abs(sols[0] - sols[1]) > 1e-6:
        raise PrecisionUnreachable(f"{ld.label}: sign estimates disagree: {sols}")
    eps = sols[0]
    if ld.self_dual:
        eps = complex(1.0 if eps.real > 0 else -1.0, 0.0)
    return eps


def completed(ld: LData, s, t: float = 1.0, tol: float | None = None):
    """(Lambda(s), error estimate in Lambda units) via the splitting at t."""
    if ld.sign is None:
        ld.sign = solve_sign(ld)
    M = ld.needed_terms(t, tol)
    A, Bv, eq = _parts(ld, s, t, M)
    err = eq + ld.tail_bound(M, t) * ld._scale()
    return A + ld.sign * Bv, err


def residual(ld: LData, s, t0: float = 1.0, t1: float = 1.21) -> float:
    """Functional equation residual: relative mismatch of Lambda(s) from two splittings."""
    L0, _ = completed(ld, s, t0)
    L1, _ = completed(ld, s, t1)
    M = ld.needed_terms(t0)
    g, h, _, _ = _kernel_sums(ld.gamma, ld.conductor, complex(complex(s).real), float(t0), M)
    scale = float(np.abs(ld.coeffs[1:M + 1]) @ (np.abs(g) + np.abs(h)))
    return abs(L0 - L1) / scale


@dataclass(frozen=True)
class CentralValue:
    label: str
    value: complex
    error_bound: float
    params: dict

    FLOOR = 1e-6

    @property
    def is_nonzero(self) -> bool:
        return abs(self.value) > self.error_bound + self.FLOOR

    @property
    def verdict(self) -> str:
        return "NONZERO" if self.is_nonzero else "INCONCLUSIVE"

    @property
    def sign(self) -> complex:
        return self.params["sign"]


def afe_eval(ld: LData, s=0.5, tol: float | None = None) -> CentralValue:
    """L(s) with a certified error bound.

    The bound adds the quadrature estimate, the truncation tail and the
    disagreement between two splittings of the Mellin integral.
    """
    tol = ld.tol if tol is None else tol
    solved = ld.sign is None
    lam, err = completed(ld, s, 1.0, tol)
    lam1, _ = completed(ld, s, 1.13, tol)
    err = err + abs(lam - lam1)
    gc = gamma_conductor(ld, s)
    val, e = lam / gc, err / abs(gc)
    if e > tol * max(1.0, abs(val)):
        raise PrecisionUnreachable(f"{ld.label}: error {e:.2e} exceeds tolerance {tol:.1e}")
    params = {"s": complex(s), "tol": tol, "terms": ld.needed_terms(1.13, tol),
              "splits": (1.0, 1.13), "sign": ld.sign, "sign_solved": solved,
              "sign_points": SIGN_POINTS if solved else ()}
    return CentralValue(ld.label, val, e, params)


def central_value(ld: LData, tol: float | None = None) -> CentralValue:
    return afe_eval(ld, 0.5, tol)


def required_terms(gam: Gamma, Q: int, tol: float = 1e-8) -> int:
    """Coefficients needed to evaluate an L-function with these data to tolerance tol."""
    probe = LData(np.zeros(2, dtype=complex), Q, gam, tol=tol)
    return max(probe.needed_terms(t) for t in (1.0, 1.13, 1.21) + SPLITS)


@dataclass(frozen=True)
class FormCoeffs:
    """Fourier coefficients a(0..nmax) of a newform (arithmetic normalization)."""

    label: str
    weight: int
    level: int
    a: tuple = field(repr=False)

    @property
    def nmax(self) -> int:
        return len(self.a) - 1


def form_ldata(form: FormCoeffs, chi: ClassCharacter, tol: float = 1e-8) -> LData:
    """Rankin-Selberg L-data of form x theta_chi with just enough coefficients for tol."""
    gam, Q = rankin_gamma(form.weight, chi.group.d, form.level)
    need = required_terms(gam, Q, tol)
    if need > form.nmax:
        raise PrecisionUnreachable(
            f"{form.label} x chi (d={chi.group.d}): needs {need} coefficients, {form.nmax} available")
    return rankin_ldata(form.a, form.weight, form.level, chi, need,
                        f"{form.label} x chi{chi.index} (d={chi.group.d})", tol)
