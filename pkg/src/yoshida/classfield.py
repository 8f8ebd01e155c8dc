"""Imaginary quadratic class groups via binary quadratic forms.

Forms (a, b, c) stand for a x^2 + b x y + c y^2 of discriminant
b^2 - 4ac = -d.  The form (a, b, c) is identified with the ideal class
of [a, (-b + sqrt(-d))/2].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, isqrt

from .cyclo import Cyc


class NotPositiveDefinite(ValueError):
    pass


class DiscMismatch(ValueError):
    pass


class NotPrimitive(ValueError):
    pass


class NotFundamental(ValueError):
    pass


def _squarefree(n: int) -> bool:
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
        p += 1
    return True


def is_fundamental(d: int) -> bool:
    """True iff -d is a fundamental discriminant."""
    if d < 3:
        return False
    if d % 4 == 3:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (1, 2) and _squarefree(m)
    return False


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 1."""
    if n == 1:
        return 1
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def as_tuple(self):
        return (self.a, self.b, self.c)


def reduce_form(f: QuadForm, with_transform: bool = False):
    """Gauss-reduce a positive definite form.

    With ``with_transform`` also returns M in SL_2(Z) (as ((p, q), (r, s)))
    such that f(p x + q y, r x + s y) equals the reduced form.
    """
    a, b, c = f.a, f.b, f.c
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise NotPositiveDefinite(f"{f} is not positive definite")
    m = [[1, 0], [0, 1]]
    while True:
        if c < a:
            # (x, y) -> (-y, x)
            a, b, c = c, -b, a
            m = [[m[0][1], -m[0][0]], [m[1][1], -m[1][0]]]
            continue
        if b > a or b <= -a:
            # (x, y) -> (x + t y, y), chosen to bring b into (-a, a]
            t = (a - b) // (2 * a)
            b, c = b + 2 * a * t, a * t * t + b * t + c
            m = [[m[0][0], m[0][0] * t + m[0][1]], [m[1][0], m[1][0] * t + m[1][1]]]
            continue
        if a == c and b < 0:
            a, b, c = c, -b, a
            m = [[m[0][1], -m[0][0]], [m[1][1], -m[1][0]]]
            continue
        break
    g = QuadForm(a, b, c)
    if with_transform:
        return g, ((m[0][0], m[0][1]), (m[1][0], m[1][1]))
    return g


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def compose(f1: QuadForm, f2: QuadForm) -> QuadForm:
    """Gauss composition (Cohen, Alg. 5.4.7), returned reduced."""
    if f1.disc != f2.disc:
        raise DiscMismatch(f"{f1} and {f2} have different discriminants")
    if not (f1.primitive and f2.primitive):
        raise NotPrimitive("composition needs primitive forms")
    if f1.a > f2.a:
        f1, f2 = f2, f1
    a1, b1, _ = f1.a, f1.b, f1.c
    a2, b2, c2 = f2.a, f2.b, f2.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, y2 = _xgcd(s, d)
        y2 = -y2
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return reduce_form(QuadForm(a3, b3, c3))


def inverse_form(f: QuadForm) -> QuadForm:
    return reduce_form(QuadForm(f.a, -f.b, f.c))


def principal_form(d: int) -> QuadForm:
    if d % 4 == 0:
        return QuadForm(1, 0, d // 4)
    return QuadForm(1, 1, (d + 1) // 4)


def reduced_forms(d: int, primitive_only: bool = True) -> list[QuadForm]:
    """All reduced forms of discriminant -d, in a fixed order."""
    out = []
    amax = isqrt(d // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b + d) % (4 * a):
                continue
            c = (b * b + d) // (4 * a)
            if c < a:
                continue
            f = QuadForm(a, b, c)
            if not f.is_reduced():
                continue
            if primitive_only and not f.primitive:
                continue
            out.append(f)
    return out


def _sort_key(f: QuadForm):
    return (f.a, abs(f.b), -f.b, f.c)


@dataclass(frozen=True)
class ClassGroup:
    d: int
    elements: tuple
    cayley: tuple
    index: dict = field(compare=False, hash=False)

    @property
    def h(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> int:
        return 0

    def mul(self, i: int, j: int) -> int:
        return self.cayley[i][j]

    def inv(self, i: int) -> int:
        row = self.cayley[i]
        return row.index(0)

    def order_of(self, i: int) -> int:
        k, x = 1, i
        while x != 0:
            x = self.mul(x, i)
            k += 1
        return k

    def class_of(self, f: QuadForm) -> int:
        return self.index[reduce_form(f)]

    def unit_count(self) -> int:
        return {3: 6, 4: 4}.get(self.d, 2)

    def invariants(self) -> list[int]:
        """Elementary divisor orders of the group."""
        from .linalg import smith_invariants

        gens = _generators(self)
        rel = _relations(self, gens)
        return [x for x in smith_invariants(rel) if x != 1]


def class_number(d: int) -> int:
    """h(-d) by counting reduced primitive forms, without building the group law."""
    if not is_fundamental(d):
        raise NotFundamental(f"-{d} is not a fundamental discriminant")
    return len(reduced_forms(d))


def class_group(d: int, allow_nonfundamental: bool = False) -> ClassGroup:
    if not allow_nonfundamental and not is_fundamental(d):
        raise NotFundamental(f"-{d} is not a fundamental discriminant")
    if (-d) % 4 not in (0, 1):
        raise NotFundamental(f"-{d} is not a discriminant")
    forms = sorted(reduced_forms(d), key=_sort_key)
    index = {f: i for i, f in enumerate(forms)}
    cayley = tuple(tuple(index[compose(f, g)] for g in forms) for f in forms)
    return ClassGroup(d, tuple(forms), cayley, index)


def _generators(g: ClassGroup) -> list[int]:
    gens = []
    span = {0}
    for i in range(g.h):
        if i in span:
            continue
        gens.append(i)
        span = _closure(g, gens)
    return gens


def _closure(g: ClassGroup, gens) -> set:
    span = {0}
    frontier = [0]
    while frontier:
        x = frontier.pop()
        for s in gens:
            y = g.mul(x, s)
            if y not in span:
                span.add(y)
                frontier.append(y)
    return span


def _relations(g: ClassGroup, gens) -> list[list[int]]:
    """Integer relations among gens generating the relation lattice."""
    import itertools

    orders = [g.order_of(s) for s in gens]
    rels = []
    for i, o in enumerate(orders):
        r = [0] * len(gens)
        r[i] = o
        rels.append(r)
    # each generator's first power landing in the span of the previous ones
    for i in range(1, len(gens)):
        prev = gens[:i]
        ranges = [range(o) for o in orders[:i]]
        table = {}
        for exps in itertools.product(*ranges):
            x = 0
            for s, e in zip(prev, exps):
                for _ in range(e):
                    x = g.mul(x, s)
            table.setdefault(x, exps)
        x, m = gens[i], 1
        while x not in table:
            x = g.mul(x, gens[i])
            m += 1
        r = [-e for e in table[x]] + [m] + [0] * (len(gens) - i - 1)
        rels.append(r)
    return rels


@dataclass(frozen=True)
class ClassCharacter:
    """chi(element i) = zeta_h ** values[i]."""

    group: ClassGroup = field(repr=False)
    values: tuple
    index: int = 0

    @property
    def h(self) -> int:
        return self.group.h

    @property
    def order(self) -> int:
        e = 1
        while any((e * v) % self.h for v in self.values):
            e += 1
        return e

    def __call__(self, i: int) -> Cyc:
        return Cyc.zeta(self.h, self.values[i]) if self.h > 1 else Cyc.const(1, 1)

    def inverse(self) -> "ClassCharacter":
        vals = tuple((-v) % self.h for v in self.values)
        for chi in characters(self.group):
            if chi.values == vals:
                return chi
        raise AssertionError("inverse character missing")

    def is_real(self) -> bool:
        return all((2 * v) % self.h == 0 for v in self.values)


def characters(g: ClassGroup) -> list[ClassCharacter]:
    """All h characters, exponents relative to zeta_h; trivial first."""
    h = g.h
    partial = [{0: 0}]
    for s in _generators(g):
        # smallest m with s^m in the subgroup already covered
        x, m = s, 1
        while x not in partial[0]:
            x = g.mul(x, s)
            m += 1
        items_by_chi = [list(chi.items()) for chi in partial]
        new_partial = []
        for chi, items in zip(partial, items_by_chi):
            for v in range(h):
                if (m * v - chi[x]) % h:
                    continue
                ext = {}
                cur_s, cur_v = 0, 0
                for _ in range(m):
                    for e, ev in items:
                        ext[g.mul(e, cur_s)] = (ev + cur_v) % h
                    cur_s = g.mul(cur_s, s)
                    cur_v = (cur_v + v) % h
                new_partial.append(ext)
        partial = new_partial
    chars = sorted((tuple(chi[i] for i in range(h)) for chi in partial),
                   key=lambda vals: (any(vals), vals))
    return [ClassCharacter(g, vals, idx) for idx, vals in enumerate(chars)]


def representation_counts(f: QuadForm, nmax: int) -> list[int]:
    """r_f(n) = #{(x, y) in Z^2 : f(x, y) = n} for 0 <= n <= nmax."""
    counts = [0] * (nmax + 1)
    a, b, c = f.a, f.b, f.c
    d = 4 * a * c - b * b
    # f(x,y) >= d y^2 / (4a)
    ymax = isqrt(4 * a * nmax // d) + 1
    for y in range(-ymax, ymax + 1):
        # a x^2 + b y x + c y^2 <= nmax
        disc = b * b * y * y - 4 * a * (c * y * y - nmax)
        if disc < 0:
            continue
        r = isqrt(disc)
        lo = (-b * y - r) // (2 * a) - 1
        hi = (-b * y + r) // (2 * a) + 1
        for x in range(lo, hi + 1):
            v = a * x * x + b * x * y + c * y * y
            if 0 <= v <= nmax:
                counts[v] += 1
    return counts


@dataclass(frozen=True)
class ThetaSeries:
    character: ClassCharacter
    nmax: int
    r: tuple  # r[n] for 0..nmax; r[0] unused

    def __getitem__(self, n: int) -> Cyc:
        return self.r[n]


def ideal_counts_by_class(g: ClassGroup, nmax: int) -> list[list[int]]:
    """counts[i][n] = number of ideals of norm n in class i."""
    w = g.unit_count()
    out = []
    for f in g.elements:
        rc = representation_counts(f, nmax)
        assert all(x % w == 0 for x in rc[1:])
        out.append([x // w for x in rc])
    return out


def theta_coeffs(chi: ClassCharacter, nmax: int, counts=None) -> ThetaSeries:
    g = chi.group
    if counts is None:
        counts = ideal_counts_by_class(g, nmax)
    h = g.h
    r = [Cyc.const(max(h, 1), 0)]
    for n in range(1, nmax + 1):
        coeffs = [0] * max(h, 1)
        for i in range(h):
            if counts[i][n]:
                coeffs[chi.values[i] % h] += counts[i][n]
        r.append(Cyc(max(h, 1), coeffs))
    return ThetaSeries(chi, nmax, tuple(r))


def class_table_json(g: ClassGroup) -> dict:
    return {
        "d": g.d,
        "h": g.h,
        "forms": [list(f.as_tuple()) for f in g.elements],
        "cayley": [list(row) for row in g.cayley],
        "characters": [list(chi.values) for chi in characters(g)],
    }
