"""Half-integral weight forms cut out of an index-p Fourier-Jacobi coefficient.

For a prime p not dividing the level, the coefficients

    c(m) = sum over 0 <= mu < 2p with mu^2 = -m (mod 4p) of c_p((m + mu^2)/4p, mu)

form a cusp form of weight (Siegel weight) - 1/2 and level 4pN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sympy import factorint

from .siegel import DepthExceeded, HalfIntMat, JacobiSlice, SiegelCoeffTable, reduce_T


class NotDivisibleBy4(ValueError):
    pass


@dataclass(frozen=True)
class HalfIntSeries:
    weight_num: int          # weight is weight_num / 2
    level: int
    p: int
    c: dict
    xmax: int

    @property
    def kappa(self) -> int:
        """Integer part of the weight: the form has weight kappa + 1/2."""
        return (self.weight_num - 1) // 2

    def scaled(self, s) -> "HalfIntSeries":
        s = Fraction(s)
        return HalfIntSeries(self.weight_num, self.level, self.p,
                             {m: v * s for m, v in self.c.items()}, self.xmax)


def _mus(m: int, p: int):
    return [mu for mu in range(2 * p) if (mu * mu + m) % (4 * p) == 0]


def extract_h(slice_: JacobiSlice, xmax: int, weight: int, level: int) -> HalfIntSeries:
    """c(m) for 1 <= m <= xmax from the index-p slice of a weight `weight` form."""
    p = slice_.index
    if level % p == 0:
        raise ValueError(f"index {p} divides the level")
    if xmax > slice_.bound:
        raise DepthExceeded(f"xmax={xmax} exceeds slice depth {slice_.bound}")
    c = {}
    for m in range(1, xmax + 1):
        c[m] = sum((slice_.c((m + mu * mu) // (4 * p), mu) for mu in _mus(m, p)), Fraction(0))
    return HalfIntSeries(2 * weight - 1, 4 * p * level, p, c, xmax)


def extract_h_direct(table: SiegelCoeffTable, p: int, xmax: int) -> dict:
    """The same coefficients read straight from the Siegel table."""
    out = {}
    for m in range(1, xmax + 1):
        out[m] = sum((table.get(HalfIntMat((m + mu * mu) // (4 * p), mu, p)) for mu in _mus(m, p)),
                     Fraction(0))
    return out


def normalize(s: HalfIntSeries) -> dict:
    """Normalized coefficients a(n) n^(1/4 - kappa/2), as floats (diagnostic only)."""
    e = 0.25 - s.kappa / 2
    return {n: float(v) * n ** e if v else 0.0 for n, v in s.c.items()}


def growth_exponent(s: HalfIntSeries, ds) -> float | None:
    """Least-squares slope of log|normalized a(d)|^2 against log d (compare with 3/8)."""
    na = normalize(s)
    pts = [(math.log(d), 2 * math.log(abs(na[d]))) for d in ds if na.get(d)]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _odd_squarefree(d: int) -> bool:
    return d % 2 == 1 and all(e == 1 for e in factorint(d).values())


@dataclass
class ScanReport:
    X: int
    hits: list
    witness: dict = field(default_factory=dict)


def fundamental_scan(s: HalfIntSeries, X: int, table: SiegelCoeffTable | None = None) -> ScanReport:
    """Odd squarefree d <= X with c(d) != 0, each with a witness S, -disc(S) = d."""
    if X > s.xmax:
        raise DepthExceeded(f"X={X} exceeds xmax={s.xmax}")
    hits, wit = [], {}
    p = s.p
    for d in range(1, X + 1):
        if not _odd_squarefree(d) or s.c.get(d, 0) == 0:
            continue
        hits.append(d)
        W = None
        if table is not None:
            for mu in _mus(d, p):
                S = HalfIntMat((d + mu * mu) // (4 * p), mu, p)
                if table.get(S) != 0:
                    W = S
                    break
            if W is None:
                # cancellation-free recovery failed: search the table directly
                W = next(T for T, v in sorted(table.coeffs.items()) if v != 0 and -T.disc == d)
        wit[d] = W
    return ScanReport(X, hits, wit)


def check_thm3_hypotheses(level: int, chi_conductor: int = 1):
    """Check the level/character conditions; chi_p is nontrivial iff p | chi_conductor."""
    if level % 4:
        raise NotDivisibleBy4(f"{level} is not divisible by 4")
    fac = factorint(level)
    reasons = []
    if fac.get(2, 0) >= 4:
        reasons.append("16 divides the level")
    elif fac.get(2, 0) == 3 and chi_conductor % 2 == 0:
        reasons.append("8 divides the level but chi_2 is nontrivial")
    for p, e in sorted(fac.items()):
        if p == 2:
            continue
        if e >= 3:
            reasons.append(f"{p}^3 divides the level")
        elif e == 2 and chi_conductor % p:
            reasons.append(f"{p}^2 divides the level but chi_{p} is trivial")
    return not reasons, reasons
