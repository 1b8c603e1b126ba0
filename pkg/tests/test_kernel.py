import math
import random
from fractions import Fraction as F
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kinetri.kernel import (EQ, GT, LT, DegenerateMotionError, EventTime, Frame, Sign,
                            ZeroPolynomialError, collinearity_times, compare_times, isolate_roots,
                            orient, orient_ipoly, rational_between, x_swap_times)
from kinetri.motion import SENT_L, SENT_R, Piece, Trajectory, gen_random_scenario
from kinetri.poly import Polynomial

W = (0, 10)


def test_orient_examples():
    assert orient((0, 0), (1, 0), (0, 1)) == Sign.POS
    assert orient((0, 0), (1, 0), (2, 0)) == Sign.ZERO
    assert orient((0, 0), (0, 1), (1, 0)) == Sign.NEG


def test_orient_sentinels_lie_below():
    a, b = (0, 0), (1, 5)
    assert orient(a, b, SENT_L) == Sign.NEG
    assert orient(b, a, SENT_R) == Sign.POS
    assert orient(SENT_L, SENT_R, a) == Sign.POS


pt = st.tuples(st.integers(-20, 20), st.integers(-20, 20))
pt_or_sent = st.one_of(pt, st.sampled_from([SENT_L, SENT_R]))


@given(pt_or_sent, pt_or_sent, pt_or_sent)
def test_orient_antisymmetric(a, b, c):
    s = orient(a, b, c)
    assert orient(b, a, c) == -s
    assert orient(a, c, b) == -s
    assert orient(b, c, a) == s


@given(pt, pt, pt)
def test_orient_zero_iff_collinear(a, b, c):
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    assert (orient(a, b, c) == Sign.ZERO) == (det == 0)


def test_collinearity_static_empty():
    tr = [Trajectory.static(0, 0, W), Trajectory.static(1, 0, W), Trajectory.static(0, 1, W)]
    assert collinearity_times(*tr, W) == []


def test_collinearity_linear_root():
    a, b = Trajectory.static(0, 0, W), Trajectory.static(1, 0, W)
    c = Trajectory.linear(2, 1, 0, -1, W)
    ts = collinearity_times(a, b, c, W)
    assert len(ts) == 1 and ts[0].exact == 1


def test_collinearity_identically_zero():
    a, b, c = (Trajectory.linear(i, i, 1, 1, W) for i in range(3))
    with pytest.raises(DegenerateMotionError):
        collinearity_times(a, b, c, W)


def test_x_swap_examples():
    a, b = Trajectory.linear(0, 0, 1, 0, W), Trajectory.linear(1, 3, -1, 0, W)
    ts = x_swap_times(a, b, W)
    assert [t.exact for t in ts] == [F(1, 2)]
    assert x_swap_times(Trajectory.linear(0, 0, 1, 1, W), Trajectory.linear(1, 0, 1, 0, W), W) == []


def test_x_swap_quadratic_two_roots():
    a = Trajectory((Piece(F(0), F(3), Polynomial([0, 0, 1]), Polynomial([0])),))
    b = Trajectory((Piece(F(0), F(3), Polynomial([-2, 3]), Polynomial([1])),))
    ts = x_swap_times(a, b, (0, 3))
    assert [t.exact for t in ts] == [1, 2]
    # sampling oracle: sign changes of x_a - x_b on a grid
    grid = np.linspace(0, 3, 3001)
    d = grid ** 2 - (3 * grid - 2)
    changes = np.count_nonzero(np.diff(np.sign(d)) != 0)
    assert changes == 2 * 2  # each root hit exactly on a grid point counts twice


def test_isolate_roots_examples():
    r = isolate_roots(Polynomial([-1, 0, 1]), (0, 2))
    assert len(r) == 1 and r[0].lo <= 1 <= r[0].hi
    assert isolate_roots(Polynomial([1, 0, 1]), (-10, 10)) == []
    p = Polynomial.from_roots([1, 2]) * Polynomial([1, 0, 1])
    r = isolate_roots(p, (0, 3))
    assert [float(t) for t in r] == [1.0, 2.0]
    with pytest.raises(ZeroPolynomialError):
        isolate_roots(Polynomial([]), (0, 1))


def test_isolate_roots_parity():
    p = Polynomial.from_roots([F(1, 3), F(1, 3), 2])
    r = isolate_roots(p, (0, 3))
    assert [t.parity for t in r] == ["even", "odd"]


def test_isolate_irrational_cubic():
    # plastic number: t^3 - t - 1
    r = isolate_roots(Polynomial([-1, -1, 0, 1]), (0, 2))
    assert len(r) == 1
    assert abs(float(r[0]) - 1.324717957244746) < 1e-12


def test_compare_times_examples():
    half, three_q = EventTime.rational(F(1, 2)), EventTime.rational(F(3, 4))
    assert compare_times(half, three_q) == LT
    r1 = isolate_roots(Polynomial([-2, 0, 1]), (0, 2))[0]
    r2 = isolate_roots(Polynomial([-2, 0, 1]), (0, 2))[0]
    assert compare_times(r1, r2) == EQ
    assert compare_times(r1, EventTime.rational(F(7, 5))) == GT
    r1.refine()
    assert compare_times(r1, r2) == EQ


def test_sign_after_uses_derivative():
    t = EventTime.rational(1)
    assert t.sign_after((-1, 1)) == 1  # t - 1
    assert t.sign_before((-1, 1)) == -1
    assert t.sign_after((1, -2, 1)) == 1  # (t - 1)^2
    assert t.sign_of((1, -2, 1)) == 0


def test_rational_between():
    a = isolate_roots(Polynomial([-2, 0, 1]), (0, 2))[0]
    b = EventTime.rational(F(142, 100))
    q = rational_between(a, b)
    assert a.compare_rational(q) == LT and q < F(142, 100)


def _exact_sign(g, k, scale):
    d = len(g) - 1
    v = sum(c * k ** i * scale ** (d - i) for i, c in enumerate(g))
    return (v > 0) - (v < 0)


def test_root_completeness_sampling():
    """Every sign change of the sampled determinant lies in a returned interval, and vice versa."""
    scale = 1000
    ks = np.arange(0, 10 * scale + 1)
    for seed in range(1000):
        sc = gen_random_scenario(3, seed, "linear", window=W)
        tr = sc.points
        g = orient_ipoly(*(t.pieces[0].homogeneous for t in tr))
        roots = collinearity_times(*tr, W)
        vals = np.polyval([float(c) for c in reversed(g)], ks / scale)
        brackets = set(np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0].tolist())
        per_bracket = {}
        for r in roots:
            k = min(math.floor(float(r) * scale), 10 * scale - 1)
            per_bracket.setdefault(k, []).append(r)
            brackets.add(k)
        for k in brackets:
            s0, s1 = _exact_sign(g, k, scale), _exact_sign(g, k + 1, scale)
            inside = [r for r in per_bracket.get(k, [])
                      if r.compare_rational(F(k, scale)) >= 0 and r.compare_rational(F(k + 1, scale)) <= 0]
            odd = sum(1 for r in inside if r.parity == "odd")
            if s0 and s1:
                assert (s0 != s1) == (odd % 2 == 1), (seed, k)


quad = st.tuples(st.integers(-9, 9), st.integers(-9, 9), st.integers(1, 9))


@given(st.lists(quad, min_size=3, max_size=6))
def test_compare_times_strict_weak_order(polys):
    times = []
    for c in polys:
        try:
            times.extend(isolate_roots(Polynomial(list(c)), (-5, 5)))
        except ZeroPolynomialError:
            pass
    times += [EventTime.rational(F(k, 2)) for k in range(-2, 3)]
    for a, b, c in permutations(times[:7], 3):
        ab, bc, ac = compare_times(a, b), compare_times(b, c), compare_times(a, c)
        assert compare_times(b, a) == -ab
        if ab <= 0 and bc <= 0:
            assert ac <= 0
        if ab == 0 and bc == 0:
            assert ac == 0
    for a in times:
        for b in times:
            if abs(float(a) - float(b)) > 1e-9:
                assert compare_times(a, b) == (LT if float(a) < float(b) else GT)


def test_frame_predicates_after_event():
    a, b = Trajectory.linear(0, 0, 1, 0, W), Trajectory.linear(1, 3, -1, 0, W)
    from kinetri.motion import Scenario
    sc = Scenario((a, b, Trajectory.static(5, 5, W)), (F(0), F(10)))
    assert Frame(sc, 0).xcmp(0, 1) == -1
    assert Frame(sc, F(1, 2), after=True).xcmp(0, 1) == 1
    with pytest.raises(DegenerateMotionError):
        Frame(sc, F(1, 2), after=False).xcmp(0, 1)
    f = Frame(sc, 1)
    assert f.orient(0, 1, 2) == -f.orient(1, 0, 2)
    assert f.mirrored().orient(0, 1, 2) == -f.orient(0, 1, 2)
