"""Exact predicates and event-time arithmetic.

Event times are real algebraic numbers: a rational, or a root of a square-free
integer polynomial together with an isolating rational interval.  All
predicates are evaluated exactly; evaluation "just after" a time uses the sign
of the first non-vanishing derivative.
"""

from __future__ import annotations

from enum import IntEnum
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence, Union

from .motion import SENT_L, SENT_R, DegeneracyError, Scenario, Trajectory
from .poly import (Polynomial, int_primitive, ipoly_add, ipoly_derivative, ipoly_mul, ipoly_scale,
                   ipoly_sub, ipoly_trim)

LT, EQ, GT = -1, 0, 1


class Sign(IntEnum):
    NEG = -1
    ZERO = 0
    POS = 1


class ZeroPolynomialError(ValueError):
    pass


class DegenerateMotionError(DegeneracyError):
    """Three points stay collinear, or two points share x, over a whole interval."""


def _sgn(v) -> int:
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------- static orientation

def orient(a, b, c) -> Sign:
    """Sign of the orientation determinant; POS iff c lies left of the directed line ab.

    Sentinels SENT_L = (-inf, -inf) and SENT_R = (+inf, -inf) lie below every
    non-vertical line.
    """
    pts = (a, b, c)
    sent = [isinstance(p, int) and p in (SENT_L, SENT_R) for p in pts]
    if not any(sent):
        (ax, ay), (bx, by), (cx, cy) = a, b, c
        return Sign(_sgn((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)))
    # rotate so that the arguments read (real..., sentinel...) with a sign fix
    if sum(sent) == 3:
        return Sign.ZERO
    for k in range(3):
        rot = pts[k:] + pts[:k]
        s = [isinstance(p, int) and p in (SENT_L, SENT_R) for p in rot]
        if s == [False, False, True]:
            (ax, _), (bx, _) = rot[0], rot[1]
            if ax == bx:
                return Sign.ZERO
            # a point far below: right of a->b when a->b points rightwards
            return Sign.NEG if ax < bx else Sign.POS
        if s == [True, True, False]:
            # line through both sentinels runs at y = -inf from left to right
            if rot[0] == rot[1]:
                return Sign.ZERO
            return Sign.POS if rot[0] == SENT_L else Sign.NEG
    raise AssertionError("unreachable")


# ---------------------------------------------------------------- integer polynomial helpers

def _ieval_rational_exact(g: Sequence[int], q: Fraction) -> int:
    p, d = q.numerator, q.denominator
    m = len(g) - 1
    acc = 0
    for k, c in enumerate(g):
        acc += c * p**k * d ** (m - k)
    return acc


def _sign_sqrt_form(a: int, b: int, disc: int) -> int:
    """Sign of a + b*sqrt(disc) for disc > 0."""
    if b == 0:
        return _sgn(a)
    if a == 0:
        return _sgn(b)
    if (a > 0) == (b > 0):
        return _sgn(a)
    lhs = a * a
    rhs = b * b * disc
    if lhs == rhs:
        return 0
    return _sgn(a) if lhs > rhs else _sgn(b)


def _descartes_bound(p: Polynomial, a: Fraction, b: Fraction) -> int:
    """Sign variations bounding the number of roots of p in the open interval (a, b)."""
    q = p.shift(a)
    w = b - a
    scaled = Polynomial._raw(tuple(c * w**k for k, c in enumerate(q.coeffs)))
    rev = Polynomial._raw(tuple(reversed(scaled.coeffs)))
    return rev.shift(1).sign_variations()


def _sign_poly(p: Polynomial, t: Fraction) -> int:
    return _sgn(p(t))


# ---------------------------------------------------------------- event times

class EventTime:
    """A real algebraic time.

    ``ipoly`` is a primitive square-free integer polynomial (constant term first)
    with exactly one root in the closed interval [lo, hi]; for a rational time
    lo == hi.  ``parity`` records the multiplicity parity of the root in the
    polynomial it was extracted from.
    """

    __slots__ = ("ipoly", "lo", "hi", "parity", "_slo", "_fpoly")

    def __init__(self, ipoly: Sequence[int], lo: Fraction, hi: Fraction, parity: str = "odd"):
        self.ipoly = tuple(ipoly)
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        self.parity = parity
        self._slo = None if self.lo == self.hi else _sgn(_ieval_rational_exact(self.ipoly, self.lo))
        self._fpoly = None

    @classmethod
    def rational(cls, q, parity: str = "odd") -> "EventTime":
        q = Fraction(q)
        return cls((-q.numerator, q.denominator), q, q, parity)

    @property
    def is_rational(self) -> bool:
        return self.lo == self.hi

    @property
    def exact(self) -> Optional[Fraction]:
        return self.lo if self.lo == self.hi else None

    @property
    def poly(self) -> Polynomial:
        if self._fpoly is None:
            self._fpoly = Polynomial(self.ipoly)
        return self._fpoly

    def __float__(self) -> float:
        if self.is_rational:
            return float(self.lo)
        if len(self.ipoly) == 3:
            c0, c1, c2 = self.ipoly
            disc = c1 * c1 - 4 * c2 * c0
            s = 1 if self._root_sign() > 0 else -1
            return (-c1 + s * disc**0.5) / (2 * c2)
        while self.hi - self.lo > abs(self.hi) * Fraction(1, 1 << 56) + Fraction(1, 1 << 1000):
            self.refine()
        return float((self.lo + self.hi) / 2)

    def __repr__(self) -> str:
        if self.is_rational:
            return f"EventTime({self.lo})"
        return f"EventTime(~{float(self):.12g}, root of {list(self.ipoly)} in [{float(self.lo):.6g}, {float(self.hi):.6g}])"

    def decimal(self, digits: int = 12) -> str:
        return f"{float(self):.{digits}g}"

    def _root_sign(self) -> int:
        """For a quadratic: +1 if this is the larger root, -1 if the smaller."""
        c0, c1, c2 = self.ipoly
        centre = Fraction(-c1, 2 * c2)
        return 1 if self.lo >= centre else -1

    def refine(self) -> None:
        if self.is_rational:
            return
        m = (self.lo + self.hi) / 2
        s = _sgn(_ieval_rational_exact(self.ipoly, m))
        if s == 0:
            self.lo = self.hi = m
            self.ipoly = (-m.numerator, m.denominator)
            self._fpoly = None
        elif s == self._slo:
            self.lo = m
        else:
            self.hi = m

    # sign of g at this time -------------------------------------------------
    def sign_of(self, g: Sequence[int]) -> int:
        if not g:
            return 0
        if self.is_rational:
            return _sgn(_ieval_rational_exact(g, self.lo))
        if len(self.ipoly) == 3:
            return self._sign_quadratic(g)
        return self._sign_general(g)

    def _sign_quadratic(self, g: Sequence[int]) -> int:
        c0, c1, c2 = self.ipoly
        disc = c1 * c1 - 4 * c2 * c0
        s = self._root_sign()
        w = 2 * c2
        m = len(g) - 1
        # beta = w * alpha = -c1 + s sqrt(disc); value = sum g_k beta^k w^(m-k)
        a, b = g[m], 0
        wpow = 1
        for k in range(m - 1, -1, -1):
            wpow *= w
            a, b = a * (-c1) + b * s * disc, a * s + b * (-c1)
            a += g[k] * wpow
        return _sign_sqrt_form(a, b, disc)

    def _sign_general(self, g: Sequence[int]) -> int:
        gp = Polynomial(g)
        h = self.poly.gcd(gp)
        if h.degree >= 1:
            sl, sh = _sign_poly(h, self.lo), _sign_poly(h, self.hi)
            if sl == 0 or sh == 0 or sl != sh:
                return 0
        while _descartes_bound(gp, self.lo, self.hi) > 0 or gp(self.lo) == 0 or gp(self.hi) == 0:
            self.refine()
            if self.is_rational:
                return _sgn(gp(self.lo))
        return _sign_poly(gp, (self.lo + self.hi) / 2)

    def sign_after(self, g: Sequence[int]) -> int:
        """Sign of g on (t, t + eps) for small eps."""
        while g:
            s = self.sign_of(g)
            if s:
                return s
            g = ipoly_derivative(g)
        return 0

    def sign_before(self, g: Sequence[int]) -> int:
        k = 0
        while g:
            s = self.sign_of(g)
            if s:
                return s if k % 2 == 0 else -s
            g = ipoly_derivative(g)
            k += 1
        return 0

    # ordering ----------------------------------------------------------------
    def __lt__(self, other: "EventTime") -> bool:
        return compare_times(self, other) == LT

    def __le__(self, other: "EventTime") -> bool:
        return compare_times(self, other) != GT

    def __gt__(self, other: "EventTime") -> bool:
        return compare_times(self, other) == GT

    def __ge__(self, other: "EventTime") -> bool:
        return compare_times(self, other) != LT

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventTime):
            return NotImplemented
        return compare_times(self, other) == EQ

    __hash__ = None

    def compare_rational(self, q: Fraction) -> int:
        return compare_times(self, EventTime.rational(q))


def as_time(t) -> EventTime:
    return t if isinstance(t, EventTime) else EventTime.rational(t)


def compare_times(e1: EventTime, e2: EventTime) -> int:
    """Exact three-way comparison of two event times (LT, EQ or GT)."""
    e1, e2 = as_time(e1), as_time(e2)
    if e1.is_rational and e2.is_rational:
        return _sgn(e1.lo - e2.lo)
    checked_gcd = False
    while True:
        if e1.hi < e2.lo:
            return LT
        if e2.hi < e1.lo:
            return GT
        if e1.is_rational and e2.is_rational:
            return _sgn(e1.lo - e2.lo)
        if not checked_gcd:
            checked_gcd = True
            if e1.ipoly == e2.ipoly and len(e1.ipoly) == 3:
                if e1._root_sign() == e2._root_sign():
                    return EQ
            else:
                h = e1.poly.gcd(e2.poly)
                if h.degree >= 1:
                    lo, hi = max(e1.lo, e2.lo), min(e1.hi, e2.hi)
                    sl, sh = _sign_poly(h, lo), _sign_poly(h, hi)
                    if sl == 0 or sh == 0 or sl != sh:
                        return EQ
        if e1.is_rational:
            e2.refine()
        elif e2.is_rational:
            e1.refine()
        elif (e1.hi - e1.lo) >= (e2.hi - e2.lo):
            e1.refine()
        else:
            e2.refine()
        if e1.is_rational and e2.is_rational:
            return _sgn(e1.lo - e2.lo)


def rational_between(e1: EventTime, e2: EventTime) -> Fraction:
    """A rational strictly between two distinct times (e1 < e2)."""
    e1, e2 = as_time(e1), as_time(e2)
    if compare_times(e1, e2) != LT:
        raise ValueError("times not strictly increasing")
    while not e1.hi < e2.lo:
        (e1 if (e1.hi - e1.lo) >= (e2.hi - e2.lo) else e2).refine()
    return (e1.hi + e2.lo) / 2


# ---------------------------------------------------------------- root isolation

def _quadratic_times(ip: tuple, parity: str) -> list[EventTime]:
    c0, c1, c2 = ip
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return []
    r = isqrt(disc)
    if r * r == disc:
        roots = sorted({Fraction(-c1 - r, 2 * c2), Fraction(-c1 + r, 2 * c2)})
        par = "even" if disc == 0 else parity
        return [EventTime.rational(q, par) for q in roots]
    k = 64
    while True:
        rr = isqrt(disc << (2 * k))
        scale = 1 << k
        lo_s, hi_s = Fraction(rr, scale), Fraction(rr + 1, scale)
        out = [EventTime(ip, (-c1 - hi_s) / (2 * c2), (-c1 - lo_s) / (2 * c2), parity),
               EventTime(ip, (-c1 + lo_s) / (2 * c2), (-c1 + hi_s) / (2 * c2), parity)]
        if out[0].hi < out[1].lo:
            return out
        k *= 2


def _isolate_squarefree(f: Polynomial, a: Fraction, b: Fraction, parity: str) -> list[EventTime]:
    ip = int_primitive(f.coeffs)
    deg = len(ip) - 1
    if deg <= 0:
        return []
    if deg == 1:
        q = Fraction(-ip[0], ip[1])
        return [EventTime.rational(q, parity)] if a <= q <= b else []
    if deg == 2:
        return [e for e in _quadratic_times(ip, parity)
                if compare_times(e, EventTime.rational(a)) != LT
                and compare_times(e, EventTime.rational(b)) != GT]
    out = []
    for end in (a, b):
        if f(end) == 0:
            out.append(EventTime.rational(end, parity))
    stack = [(a, b)]
    while stack:
        lo, hi = stack.pop()
        v = _descartes_bound(f, lo, hi)
        if v == 0:
            continue
        if v == 1:
            out.append(EventTime(ip, lo, hi, parity))
            continue
        m = (lo + hi) / 2
        if f(m) == 0:
            out.append(EventTime.rational(m, parity))
        stack.append((lo, m))
        stack.append((m, hi))
    if a == b:
        out = out[:1]
    return out


def isolate_roots(p: Polynomial, interval) -> list[EventTime]:
    """All real roots of p in the closed interval, isolated and sorted.

    Square-free decomposition first; each root carries the parity of its multiplicity.
    """
    if p.is_zero():
        raise ZeroPolynomialError("cannot isolate the roots of the zero polynomial")
    a, b = Fraction(interval[0]), Fraction(interval[1])
    out = []
    for f, mult in p.squarefree_factors():
        out.extend(_isolate_squarefree(f, a, b, "odd" if mult % 2 else "even"))
    _sort_times(out)
    return out


def _sort_times(ts: list) -> None:
    from functools import cmp_to_key
    ts.sort(key=cmp_to_key(compare_times))


def ipoly_roots(g: Sequence[int], lo: Fraction, hi: Fraction) -> list[EventTime]:
    """Roots of an integer polynomial in [lo, hi] (fast paths for degree <= 2)."""
    g = ipoly_trim(list(g))
    if not g:
        raise ZeroPolynomialError("zero polynomial")
    deg = len(g) - 1
    if deg == 0:
        return []
    if deg == 1:
        q = Fraction(-g[0], g[1])
        return [EventTime.rational(q)] if lo <= q <= hi else []
    if deg == 2:
        ip = int_primitive(g)
        lo_t, hi_t = EventTime.rational(lo), EventTime.rational(hi)
        return [e for e in _quadratic_times(ip, "odd")
                if compare_times(e, lo_t) != LT and compare_times(e, hi_t) != GT]
    return isolate_roots(Polynomial(g), (lo, hi))


# ---------------------------------------------------------------- trajectory polynomials

def piece_index_after(traj: Trajectory, t: EventTime) -> int:
    """Piece governing the motion on (t, t + eps)."""
    pieces = traj.pieces
    for i, p in enumerate(pieces[:-1]):
        if t.compare_rational(p.hi) == LT:
            return i
    return len(pieces) - 1


def orient_ipoly(ha, hb, hc) -> tuple:
    """Integer polynomial with the sign of the orientation of three homogeneous moving points."""
    da, xa, ya = ha
    db, xb, yb = hb
    dc, xc, yc = hc
    t1 = ipoly_sub(ipoly_mul(xb, yc), ipoly_mul(xc, yb))
    t2 = ipoly_sub(ipoly_mul(xa, yc), ipoly_mul(xc, ya))
    t3 = ipoly_sub(ipoly_mul(xa, yb), ipoly_mul(xb, ya))
    out = ipoly_sub(ipoly_scale(t1, da), ipoly_scale(t2, db))
    return ipoly_add(out, ipoly_scale(t3, dc))


def xdiff_ipoly(ha, hb) -> tuple:
    """Integer polynomial with the sign of x(b) - x(a)."""
    da, xa, _ = ha
    db, xb, _ = hb
    return ipoly_sub(ipoly_scale(xb, da), ipoly_scale(xa, db))


def _segments(trajs: Sequence[Trajectory], window) -> list[tuple[Fraction, Fraction, list]]:
    lo, hi = Fraction(window[0]), Fraction(window[1])
    cuts = {lo, hi}
    for tr in trajs:
        cuts.update(b for b in tr.breakpoints() if lo < b < hi)
    cuts = sorted(cuts)
    out = []
    for a, b in zip(cuts, cuts[1:]):
        mid = (a + b) / 2
        out.append((a, b, [tr.pieces[tr.piece_index(mid)].homogeneous for tr in trajs]))
    return out


def _roots_with_parity(g: tuple, a: Fraction, b: Fraction) -> list[EventTime]:
    return isolate_roots(Polynomial(g), (a, b))


def collinearity_times(a: Trajectory, b: Trajectory, c: Trajectory, window) -> list[EventTime]:
    """Times in the window where the three moving points are collinear, sorted."""
    out = []
    for lo, hi, hs in _segments((a, b, c), window):
        g = orient_ipoly(*hs)
        if not g:
            raise DegenerateMotionError(f"points stay collinear on [{lo}, {hi}]")
        for e in _roots_with_parity(g, lo, hi):
            if not out or compare_times(out[-1], e) != EQ:
                out.append(e)
    return out


def x_swap_times(a: Trajectory, b: Trajectory, window) -> list[EventTime]:
    """Times in the window where the two moving points share an x-coordinate, sorted."""
    out = []
    for lo, hi, hs in _segments((a, b), window):
        g = xdiff_ipoly(*hs)
        if not g:
            raise DegenerateMotionError(f"points share x on [{lo}, {hi}]")
        for e in _roots_with_parity(g, lo, hi):
            if not out or compare_times(out[-1], e) != EQ:
                out.append(e)
    return out


# ---------------------------------------------------------------- frames

class Frame:
    """Exact geometric predicates on a scenario at one time instant.

    With ``after`` set, signs are those holding on (t, t + eps), which is how the
    kinetic structure sees the configuration right after an event.  ``mirror``
    reflects y, turning the lower structure into an upper one.
    """

    def __init__(self, scenario: Scenario, t, after: bool = True, mirror: bool = False):
        self.scenario = scenario
        self.time = as_time(t)
        self.after = after
        self.mirror = mirror
        self.count = 0
        self._homog: dict[int, tuple] = {}
        self._cache: dict[tuple, int] = {}

    def mirrored(self) -> "Frame":
        f = Frame(self.scenario, self.time, self.after, not self.mirror)
        f._homog = self._homog
        f._cache = self._cache  # keys carry the unmirrored sign
        return f

    def homog(self, pid: int) -> tuple:
        h = self._homog.get(pid)
        if h is None:
            tr = self.scenario.points[pid]
            idx = piece_index_after(tr, self.time) if len(tr.pieces) > 1 else 0
            h = self._homog[pid] = tr.pieces[idx].homogeneous
        return h

    def sign(self, g: Sequence[int]) -> int:
        return self.time.sign_after(g) if self.after else self.time.sign_of(g)

    def xcmp(self, a: int, b: int) -> int:
        """-1 if x(a) < x(b), +1 if greater."""
        self.count += 1
        s = self.sign(xdiff_ipoly(self.homog(a), self.homog(b)))
        if s == 0:
            raise DegenerateMotionError(f"points {a} and {b} share x at {self.time!r}")
        return -s

    def orient(self, a: int, b: int, c: int) -> int:
        self.count += 1
        key, par = _triple_key(a, b, c)
        s = self._cache.get(key)
        if s is None:
            s = self.sign(orient_ipoly(self.homog(key[0]), self.homog(key[1]), self.homog(key[2])))
            if s == 0:
                raise DegeneracyError(f"points {key} collinear at {self.time!r}")
            self._cache[key] = s
        s *= par
        return -s if self.mirror else s

    def orient_at(self, a: int, b: int, c: int) -> int:
        """Orientation sign at the instant itself; zero is a legitimate answer."""
        s = self.time.sign_of(orient_ipoly(self.homog(a), self.homog(b), self.homog(c)))
        return -s if self.mirror else s

    def position(self, pid: int) -> tuple[Fraction, Fraction]:
        t = self.time.exact
        if t is None:
            raise ValueError("positions are only available at rational times")
        d, x, y = self.homog(pid)
        px = Polynomial(x)(t) / d
        py = Polynomial(y)(t) / d
        return (px, -py) if self.mirror else (px, py)


def _triple_key(a: int, b: int, c: int) -> tuple[tuple, int]:
    # sort the triple, tracking the permutation parity
    par = 1
    if a > b:
        a, b = b, a
        par = -par
    if b > c:
        b, c = c, b
        par = -par
    if a > b:
        a, b = b, a
        par = -par
    return (a, b, c), par
