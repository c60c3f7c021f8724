"""Exact arithmetic kernel: rank-2 lattice algebra, finite series in rational
powers of t, and truncated sparse Laurent polynomials.

Lattice vectors live in N = Z^2 and are plain int 2-tuples; covectors in the
dual lattice M are also int 2-tuples, paired with N by the dot product.  All
coefficient arithmetic is done with `fractions.Fraction`; floats only appear
when a caller evaluates a series at a numeric t.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator

Vec = tuple[int, int]
QQ = Fraction


def wedge(u: Vec, v: Vec) -> int:
    """Determinant pairing u_x v_y - u_y v_x on N (antisymmetric, bilinear)."""
    return u[0] * v[1] - u[1] * v[0]


def dot(m, v) -> object:
    """Pairing <m, v> between an M-covector and an N-vector (or two rationals)."""
    return m[0] * v[0] + m[1] * v[1]


def vadd(u, v):
    return (u[0] + v[0], u[1] + v[1])


def vsub(u, v):
    return (u[0] - v[0], u[1] - v[1])


def vneg(u):
    return (-u[0], -u[1])


def vscale(c, u):
    return (c * u[0], c * u[1])


def primitive(v: Vec) -> Vec:
    """The primitive lattice vector on the ray through v.  v must be nonzero."""
    if v == (0, 0):
        raise ValueError("zero vector has no primitive representative")
    g = gcd(abs(v[0]), abs(v[1]))
    return (v[0] // g, v[1] // g)


def dual_of(n: Vec) -> Vec:
    """The covector n^vee in M with <n^vee, v> = wedge(n, v) for all v."""
    if n == (0, 0):
        raise ValueError("dual_of requires a nonzero vector")
    return (-n[1], n[0])


def perp_against(direction: Vec, travel) -> Vec:
    """Primitive m in M with <m, direction> = 0 and <m, travel> < 0.

    `travel` must be transverse to `direction`.
    """
    d = primitive(direction)
    m = (-d[1], d[0])
    s = dot(m, travel)
    if s == 0:
        raise ValueError("travel direction is parallel to the wall")
    return m if s < 0 else (-m[0], -m[1])


def complement_basis(n: Vec) -> Vec:
    """A lattice vector g with wedge(n, g) = 1, for primitive n.

    Deterministic: the solution of n_x*y - n_y*x = 1 produced by the extended
    Euclidean algorithm, reduced so |g| is small.
    """
    if primitive(n) != n:
        raise ValueError("complement_basis requires a primitive vector")
    a, b = n
    # solve a*y - b*x = 1 via a*y + (-b)*x = 1
    g, x0, y0 = _ext_gcd(a, -b)
    if g < 0:
        g, x0, y0 = -g, -x0, -y0
    assert g == 1
    # a*x0 + (-b)*y0 = 1, so wedge(n, (y0, x0)) = a*x0 - b*y0 = 1
    x, y = y0, x0
    # subtract the nearest multiple of n to keep coordinates small
    num = a * x + b * y
    den = a * a + b * b
    k = round(num / den)
    x, y = x - k * a, y - k * b
    assert a * y - b * x == 1
    return (x, y)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _ext_gcd_check() -> None:
    g, x, y = _ext_gcd(12, 7)
    assert 12 * x + 7 * y == g == 1, (g, x, y)


class TExponentSeries:
    """A finite sum  sum_e mu_e * t^e  with rational exponents and coefficients.

    This is the image on a one-parameter mirror fiber of the curve-class
    coefficients: every class contributes a single rational power of t, so
    finite support suffices.  Instances are immutable by convention.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | Iterable = ()):  # exponent -> coefficient
        d: dict[Fraction, Fraction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for e, c in items:
            e = Fraction(e)
            c = Fraction(c)
            if c:
                d[e] = d.get(e, Fraction(0)) + c
                if not d[e]:
                    del d[e]
        self.terms = d

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "TExponentSeries":
        return cls()

    @classmethod
    def one(cls) -> "TExponentSeries":
        return cls({Fraction(0): Fraction(1)})

    @classmethod
    def t_power(cls, e, coeff=1) -> "TExponentSeries":
        return cls({Fraction(e): Fraction(coeff)})

    # -- structure ---------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, TExponentSeries) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def items(self) -> list[tuple[Fraction, Fraction]]:
        return sorted(self.terms.items())

    def valuation(self) -> Fraction | None:
        """Smallest exponent with nonzero coefficient; None for the zero series."""
        if not self.terms:
            return None
        return min(self.terms)

    def coefficient(self, e) -> Fraction:
        return self.terms.get(Fraction(e), Fraction(0))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "TExponentSeries") -> "TExponentSeries":
        d = dict(self.terms)
        for e, c in other.terms.items():
            c2 = d.get(e, Fraction(0)) + c
            if c2:
                d[e] = c2
            else:
                d.pop(e, None)
        out = TExponentSeries.zero()
        out.terms = d
        return out

    def __neg__(self) -> "TExponentSeries":
        out = TExponentSeries.zero()
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other: "TExponentSeries") -> "TExponentSeries":
        return self + (-other)

    def __mul__(self, other: "TExponentSeries") -> "TExponentSeries":
        d: dict[Fraction, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                c = d.get(e, Fraction(0)) + c1 * c2
                if c:
                    d[e] = c
                else:
                    d.pop(e, None)
        out = TExponentSeries.zero()
        out.terms = d
        return out

    def scale(self, c) -> "TExponentSeries":
        c = Fraction(c)
        out = TExponentSeries.zero()
        if c:
            out.terms = {e: c0 * c for e, c0 in self.terms.items()}
        return out

    def shift(self, e) -> "TExponentSeries":
        """Multiply by t^e."""
        e = Fraction(e)
        out = TExponentSeries.zero()
        out.terms = {e0 + e: c for e0, c in self.terms.items()}
        return out

    def truncate(self, theta) -> "TExponentSeries":
        """Drop all terms with exponent strictly above theta (None = keep all)."""
        if theta is None:
            return self
        theta = Fraction(theta)
        out = TExponentSeries.zero()
        out.terms = {e: c for e, c in self.terms.items() if e <= theta}
        return out

    def eval(self, t: float) -> float:
        """Numeric value at 0 < t < 1 (or any positive t)."""
        return sum(float(c) * t ** float(e) for e, c in self.terms.items())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for e, c in self.items():
            if e == 0:
                bits.append(f"{c}")
            else:
                bits.append(f"{c}*t^{e}")
        return " + ".join(bits)


TES = TExponentSeries


class LaurentPoly:
    """Sparse Laurent polynomial over TExponentSeries coefficients.

    Keys are exponents in N = Z^2; `trunc` is the truncation order Theta:
    coefficient terms with t-valuation strictly greater than Theta are dropped
    (valuation exactly Theta is kept).  trunc=None means no truncation.
    """

    __slots__ = ("terms", "trunc")

    def __init__(self, terms: dict | Iterable = (), trunc=None):
        self.trunc = None if trunc is None else Fraction(trunc)
        d: dict[Vec, TExponentSeries] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for p, s in items:
            p = (int(p[0]), int(p[1]))
            if not isinstance(s, TExponentSeries):
                s = TExponentSeries.t_power(0, s) if not isinstance(s, dict) else TExponentSeries(s)
            s = s.truncate(self.trunc)
            if s:
                cur = d.get(p)
                s = cur + s if cur is not None else s
                if s:
                    d[p] = s
                else:
                    d.pop(p, None)
        self.terms = d

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, trunc=None) -> "LaurentPoly":
        return cls((), trunc)

    @classmethod
    def one(cls, trunc=None) -> "LaurentPoly":
        return cls({(0, 0): TES.one()}, trunc)

    @classmethod
    def monomial(cls, p: Vec, coeff: TExponentSeries, trunc=None) -> "LaurentPoly":
        return cls({tuple(p): coeff}, trunc)

    # -- structure ---------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPoly) and self.terms == other.terms

    def items(self) -> list[tuple[Vec, TExponentSeries]]:
        return sorted(self.terms.items())

    def __iter__(self) -> Iterator[tuple[Vec, TExponentSeries]]:
        return iter(self.items())

    def coefficient(self, p: Vec) -> TExponentSeries:
        return self.terms.get(tuple(p), TES.zero())

    def with_trunc(self, theta) -> "LaurentPoly":
        return LaurentPoly(self.terms, theta)

    def min_valuation(self) -> Fraction | None:
        vals = [s.valuation() for s in self.terms.values() if s]
        return min(vals) if vals else None

    # -- arithmetic ---------------------------------------------------------

    def _join_trunc(self, other) -> Fraction | None:
        a, b = self.trunc, getattr(other, "trunc", None)
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = LaurentPoly(self.terms, self._join_trunc(other))
        d = out.terms
        for p, s in other.terms.items():
            s = s.truncate(out.trunc)
            if not s:
                continue
            cur = d.get(p)
            s2 = cur + s if cur is not None else s
            if s2:
                d[p] = s2
            else:
                d.pop(p, None)
        return out

    def __neg__(self) -> "LaurentPoly":
        out = LaurentPoly.zero(self.trunc)
        out.terms = {p: -s for p, s in self.terms.items()}
        return out

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        trunc = self._join_trunc(other)
        d: dict[Vec, TExponentSeries] = {}
        for p1, s1 in self.terms.items():
            for p2, s2 in other.terms.items():
                p = (p1[0] + p2[0], p1[1] + p2[1])
                s = (s1 * s2).truncate(trunc)
                if not s:
                    continue
                cur = d.get(p)
                s = cur + s if cur is not None else s
                if s:
                    d[p] = s
                else:
                    d.pop(p, None)
        out = LaurentPoly.zero(trunc)
        out.terms = d
        return out

    def scale_series(self, s: TExponentSeries) -> "LaurentPoly":
        out = LaurentPoly.zero(self.trunc)
        for p, s0 in self.terms.items():
            s1 = (s0 * s).truncate(self.trunc)
            if s1:
                out.terms[p] = s1
        return out

    def shift_exponent(self, q: Vec) -> "LaurentPoly":
        out = LaurentPoly.zero(self.trunc)
        out.terms = {(p[0] + q[0], p[1] + q[1]): s for p, s in self.terms.items()}
        return out

    def eval(self, t: float, x: complex, y: complex) -> complex:
        """Numeric value at z = (x, y), coefficients evaluated at t."""
        total = 0j
        for (a, b), s in self.terms.items():
            total += s.eval(t) * (x ** a) * (y ** b)
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = [f"({s})*z^{p}" for p, s in self.items()]
        return " + ".join(bits)


def unit_part_is_one(f: LaurentPoly) -> bool:
    """True when f = 1 + (terms of strictly positive t-valuation)."""
    for p, s in f.terms.items():
        if p == (0, 0):
            if s.coefficient(0) != 1:
                return False
            rest = [e for e in s.terms if e <= 0 and e != 0]
            if rest:
                return False
        else:
            v = s.valuation()
            if v is not None and v <= 0:
                return False
    return f.coefficient((0, 0)).coefficient(0) == 1


def laurent_pow(f: LaurentPoly, e: int, theta) -> LaurentPoly:
    """f**e modulo t^theta, for integer e of either sign.

    Requires f = 1 + g with g of strictly positive valuation; negative powers
    expand the truncated geometric series of 1/f, which terminates because
    every power of g gains valuation.
    """
    if not unit_part_is_one(f):
        raise ValueError("laurent_pow requires unit part 1 (f = 1 + higher order)")
    theta = None if theta is None else Fraction(theta)
    f = f.with_trunc(theta)
    if e == 0:
        return LaurentPoly.one(theta)
    if e < 0:
        if theta is None:
            raise ValueError("negative powers require a finite truncation order")
        g = f - LaurentPoly.one(theta)
        gval = g.min_valuation()
        inv = LaurentPoly.one(theta)
        if gval is not None:
            assert gval > 0
            power = LaurentPoly.one(theta)
            k = 1
            while gval * k <= theta:
                power = power * g
                if not power:
                    break
                inv = inv + (power if k % 2 == 0 else -power)
                k += 1
        return laurent_pow_positive(inv, -e, theta)
    return laurent_pow_positive(f, e, theta)


def laurent_pow_positive(f: LaurentPoly, e: int, theta) -> LaurentPoly:
    """f**e for e >= 0 by binary exponentiation with truncation."""
    result = LaurentPoly.one(theta)
    base = f.with_trunc(theta)
    n = e
    while n > 0:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


_ext_gcd_check()
