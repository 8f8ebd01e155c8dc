"""Exact arithmetic in cyclotomic fields Q(zeta_n).

An element is stored as its coefficient vector modulo the n-th cyclotomic
polynomial, so equality and zero tests are exact.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    # x^n - 1 = prod_{d | n} Phi_d(x)
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _poly_divexact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _poly_divexact(a, b):
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(out) - 1, -1, -1):
        q = a[i + len(b) - 1] // lead
        out[i] = q
        for j, c in enumerate(b):
            a[i + j] -= q * c
    assert not any(a), "inexact division"
    return out


def _reduce(coeffs, n):
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    c = list(coeffs)
    for i in range(len(c) - 1, deg - 1, -1):
        q = c[i]
        if q:
            for j in range(deg + 1):
                c[i - deg + j] -= q * phi[j]
    c = c[:deg] + [0] * (deg - len(c))
    return tuple(c)


class Cyc:
    """Element of Q(zeta_n) with exact rational coefficients."""

    __slots__ = ("n", "c")

    def __init__(self, n: int, coeffs=()):
        self.n = n
        self.c = _reduce([Fraction(x) if isinstance(x, Fraction) else x for x in coeffs], n)

    @classmethod
    def _raw(cls, n, c):
        obj = cls.__new__(cls)
        obj.n = n
        obj.c = c
        return obj

    @classmethod
    def zeta(cls, n: int, e: int = 1) -> "Cyc":
        e %= n
        coeffs = [0] * (e + 1)
        coeffs[e] = 1
        return cls(n, coeffs)

    @classmethod
    def const(cls, n: int, x) -> "Cyc":
        return cls(n, [x])

    def lift(self, m: int) -> "Cyc":
        """Same element viewed in Q(zeta_m) for n | m."""
        if m == self.n:
            return self
        assert m % self.n == 0
        s = m // self.n
        coeffs = [0] * (s * len(self.c) + 1)
        for i, x in enumerate(self.c):
            coeffs[s * i] = x
        return Cyc(m, coeffs)

    def _common(self, other):
        if isinstance(other, Cyc):
            if other.n == self.n:
                return self, other
            m = lcm(self.n, other.n)
            return self.lift(m), other.lift(m)
        return self, Cyc.const(self.n, other)

    def __add__(self, other):
        a, b = self._common(other)
        return Cyc._raw(a.n, tuple(x + y for x, y in zip(a.c, b.c)))

    __radd__ = __add__

    def __neg__(self):
        return Cyc._raw(self.n, tuple(-x for x in self.c))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Cyc):
            return Cyc._raw(self.n, tuple(x * other for x in self.c))
        a, b = self._common(other)
        prod = [0] * (len(a.c) + len(b.c))
        for i, x in enumerate(a.c):
            if x:
                for j, y in enumerate(b.c):
                    if y:
                        prod[i + j] += x * y
        return Cyc._raw(a.n, _reduce(prod, a.n))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = Cyc.const(self.n, 1)
        base = self
        if e < 0:
            raise ValueError("negative powers not supported")
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conj(self) -> "Cyc":
        coeffs = [0] * (self.n + 1)
        for i, x in enumerate(self.c):
            coeffs[(-i) % self.n] += x
        return Cyc(self.n, coeffs)

    def is_zero(self) -> bool:
        return not any(self.c)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyc.const(self.n, other)
        if not isinstance(other, Cyc):
            return NotImplemented
        a, b = self._common(other)
        return a.c == b.c

    def __hash__(self):
        return hash(self.c) if self.n <= 2 else hash((self.n, self.c))

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not rational")
        return Fraction(self.c[0]) if self.c else Fraction(0)

    def __complex__(self):
        z = cmath.exp(2j * cmath.pi / self.n)
        return complex(sum(float(x) * z ** i for i, x in enumerate(self.c)))

    def __repr__(self):
        terms = [f"{x}*z^{i}" for i, x in enumerate(self.c) if x]
        return f"Cyc{self.n}(" + (" + ".join(terms) or "0") + ")"


def root_of_unity_sum(n: int, exponents) -> Cyc:
    """sum of zeta_n^e over the given exponents, exactly."""
    coeffs = [0] * n
    for e in exponents:
        coeffs[e % n] += 1
    return Cyc(n, coeffs)
