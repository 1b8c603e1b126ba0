"""Dense univariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


def _trim(coeffs: list) -> tuple:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class Polynomial:
    """Polynomial with coefficients stored constant term first.

    The zero polynomial has an empty coefficient tuple and degree 0.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        self.coeffs = _trim([Fraction(c) for c in coeffs])

    @classmethod
    def _raw(cls, coeffs: tuple) -> "Polynomial":
        p = cls.__new__(cls)
        p.coeffs = coeffs
        return p

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls([c])

    @classmethod
    def linear(cls, c0: Number, c1: Number) -> "Polynomial":
        return cls([c0, c1])

    @classmethod
    def from_roots(cls, roots: Iterable[Number]) -> "Polynomial":
        p = cls([1])
        for r in roots:
            p = p * cls([-Fraction(r), 1])
        return p

    @property
    def degree(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, t: Number) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def naive_eval(self, t: Number) -> Fraction:
        return sum((c * Fraction(t) ** k for k, c in enumerate(self.coeffs)), Fraction(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Polynomial({[str(c) for c in self.coeffs]})"

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(tuple(-c for c in self.coeffs))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial._raw(_trim(out))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            k = Fraction(other)
            return Polynomial._raw(_trim([c * k for c in self.coeffs]))
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial._raw(())
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return Polynomial._raw(_trim(out))

    __rmul__ = __mul__

    def derivative(self) -> "Polynomial":
        return Polynomial._raw(_trim([k * c for k, c in enumerate(self.coeffs)][1:]))

    def monic(self) -> "Polynomial":
        if not self.coeffs:
            return self
        lc = self.coeffs[-1]
        return Polynomial._raw(tuple(c / lc for c in self.coeffs))

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = len(other.coeffs) - 1
        lc = other.coeffs[-1]
        if len(rem) - 1 < db:
            return Polynomial._raw(()), self
        quot = [Fraction(0)] * (len(rem) - db)
        for k in range(len(rem) - 1, db - 1, -1):
            c = rem[k]
            if c == 0:
                continue
            f = c / lc
            quot[k - db] = f
            for j, oc in enumerate(other.coeffs):
                rem[k - db + j] -= f * oc
        return Polynomial._raw(_trim(quot)), Polynomial._raw(_trim(rem[:db]))

    def __mod__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "Polynomial") -> "Polynomial":
        return self.divmod(other)[0]

    def gcd(self, other: "Polynomial") -> "Polynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def squarefree_factors(self) -> list[tuple["Polynomial", int]]:
        """Yun's decomposition: list of (factor, multiplicity), factors monic and coprime."""
        if self.degree == 0:
            return []
        f = self.monic()
        fp = f.derivative()
        a = f.gcd(fp)
        b = f // a
        c = fp // a
        d = c - b.derivative()
        out = []
        i = 1
        while b.degree > 0:
            a = b.gcd(d)
            if a.degree > 0:
                out.append((a, i))
            b = b // a
            c = d // a
            d = c - b.derivative()
            i += 1
        return out

    def squarefree_part(self) -> "Polynomial":
        if self.degree == 0:
            return self.monic()
        return (self // self.gcd(self.derivative())).monic()

    def shift(self, h: Number) -> "Polynomial":
        """p(t + h) via repeated synthetic division (Taylor shift)."""
        c = list(self.coeffs)
        n = len(c)
        h = Fraction(h)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                c[j] += h * c[j + 1]
        return Polynomial._raw(_trim(c))

    def sign_variations(self) -> int:
        signs = [c > 0 for c in self.coeffs if c != 0]
        return sum(1 for x, y in zip(signs, signs[1:]) if x != y)

    def integer_primitive(self) -> tuple:
        """Integer coefficient tuple with the same roots, positive leading coefficient, content 1."""
        return int_primitive(self.coeffs)


def int_primitive(coeffs: Sequence[Number]) -> tuple:
    coeffs = [Fraction(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        return ()
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if ints[-1] < 0:
        g = -g
    return tuple(v // g for v in ints)


# Integer coefficient tuples (constant term first) are used on the hot path.

def ipoly_trim(c: list) -> tuple:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def ipoly_add(a: Sequence[int], b: Sequence[int]) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, v in enumerate(b):
        out[i] += v
    return ipoly_trim(out)


def ipoly_sub(a: Sequence[int], b: Sequence[int]) -> tuple:
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, v in enumerate(b):
        out[i] -= v
    return ipoly_trim(out)


def ipoly_mul(a: Sequence[int], b: Sequence[int]) -> tuple:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return ipoly_trim(out)


def ipoly_scale(a: Sequence[int], k: int) -> tuple:
    return ipoly_trim([v * k for v in a])


def ipoly_derivative(a: Sequence[int]) -> tuple:
    return ipoly_trim([k * v for k, v in enumerate(a)][1:])
