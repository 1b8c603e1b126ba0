import random
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, strategies as st

from kinetri.funnel import (EmptyFunnelError, Funnel, InconsistentGeometryError, NotInFunnelError,
                            apply_envelope_change, compute_nu, find_tau0, retriangulate_tau0,
                            triangulate_funnel, update_boundary, update_visibility, visible_vertex)
from kinetri.oracle import _cross, _funnel_triangles, _segment_inside


class Geo:
    """Exact predicates on fixed coordinates, shaped like kernel.Frame."""

    def __init__(self, P):
        self.P = P

    def orient_at(self, a, b, c):
        v = _cross(self.P[a], self.P[b], self.P[c])
        return (v > 0) - (v < 0)

    def orient(self, a, b, c):
        s = self.orient_at(a, b, c)
        if s == 0:
            raise ValueError("collinear")
        return s

    def xcmp(self, a, b):
        return -1 if self.P[a][0] < self.P[b][0] else 1


def _left(x):
    return -x * x - x


def _right(x):
    return _left(2 - x)


def make_funnel(m_left, m_right, seed):
    """Funnel with concave chains on two parabolas under the horizontal base y = 0.

    The left chain runs from (0, 0) down to the apex (1, -2), the right chain back up
    to (2, 0).  Returns (funnel, coordinates, priority function).
    """
    rng = random.Random(seed)
    den = 1 << 20
    lx = sorted({F(rng.randrange(1, den), den) for _ in range(m_left)})
    rx = sorted({1 + F(rng.randrange(1, den), den) for _ in range(m_right)})
    xs = [F(0)] + lx + [F(1)] + rx + [F(2)]
    ys = [_left(x) if x <= 1 else _right(x) for x in xs]
    P = {i: (x, y) for i, (x, y) in enumerate(zip(xs, ys))}
    ranks = list(range(1, len(xs) + 1))
    rng.shuffle(ranks)
    prio = dict(zip(P, ranks)).__getitem__
    return Funnel(list(P), len(lx) + 1), P, prio


def general_position(P):
    ids = list(P)
    return all(_cross(P[a], P[b], P[c]) != 0 for i, a in enumerate(ids)
               for j, b in enumerate(ids[i + 1:], i + 1) for c in ids[j + 1:])


def brute_nu(f, p, P):
    """Farthest opposite-chain vertex joined to p by a segment inside the funnel."""
    k, a, S = f.pos[p], f.a, f.S
    opp = range(a, len(S)) if k < a else range(a, -1, -1)
    best = None
    for r in opp:
        if abs(r - k) == 1 or _segment_inside(S, p, S[r], P):
            best = r
    return S[best]


def replay_tau0(f, prio, geo):
    """Bounding chords (above, below) of the region in which each generator was split off."""
    from kinetri.funnel import _tangent_index
    out = {}
    stack = [(f.S, f.a, None, None)]
    while stack:
        B, a, up, dn = stack.pop()
        if len(B) <= 3:
            continue
        k = min((i for i in range(1, len(B) - 1) if i != a), key=lambda i: prio(B[i]))
        r = _tangent_index(B, a, k, geo)
        c = (B[k], B[r])
        out[B[k]] = (up, dn)
        if k < a:
            stack.append((B[:k + 1] + B[r:], k, up, c))
            stack.append((B[k:r + 1], a - k, c, dn))
        else:
            stack.append((B[:r + 1] + B[k:], r + 1, up, c))
            stack.append((B[r:k + 1], a - r, c, dn))
    return out


def polygon_area(S, P):
    return abs(sum(P[S[i]][0] * P[S[(i + 1) % len(S)]][1] - P[S[(i + 1) % len(S)]][0] * P[S[i]][1]
                   for i in range(len(S))))


def _segments_cross(P, c1, c2):
    if set(c1) & set(c2):
        return False
    a, b = P[c1[0]], P[c1[1]]
    c, d = P[c2[0]], P[c2[1]]
    return (_cross(a, b, c) > 0) != (_cross(a, b, d) > 0) and (_cross(c, d, a) > 0) != (_cross(c, d, b) > 0)


funnel_args = st.tuples(st.integers(0, 12), st.integers(0, 12), st.integers(0, 10**6))


def test_triangle_funnel_base_visibility():
    f, P, prio = make_funnel(0, 1, 0)
    # S = [b0, apex, q, b1]; from q the extreme visible left vertex is the base endpoint
    geo = Geo(P)
    assert visible_vertex(f, f.S[2], geo) == f.S[0]
    t, P, prio = make_funnel(1, 0, 0)
    assert visible_vertex(t, t.S[1], Geo(P)) == t.S[-1]


def test_visible_vertex_preconditions():
    f, P, prio = make_funnel(2, 2, 1)
    with pytest.raises(ValueError):
        visible_vertex(f, f.apex, Geo(P))
    with pytest.raises(NotInFunnelError):
        visible_vertex(f, 999, Geo(P))
    with pytest.raises(EmptyFunnelError):
        visible_vertex(Funnel.empty(0), 0, Geo(P))


@pytest.mark.parametrize("seed", range(10))
def test_visible_vertex_brute_force(seed):
    f, P, prio = make_funnel(10, 10, seed)
    geo = Geo(P)
    for p in f.non_corners():
        assert visible_vertex(f, p, geo) == brute_nu(f, p, P)


def test_triangulate_triangle():
    f = Funnel([0, 1, 2], 1)
    P = {0: (F(0), F(0)), 1: (F(1), F(-2)), 2: (F(2), F(0))}
    assert triangulate_funnel(f, lambda p: p, Geo(P)) == []
    assert f.triangles() == [(0, 1, 2)]


def test_triangulate_four_vertices():
    f, P, prio = make_funnel(1, 0, 3)
    geo = Geo(P)
    q = f.S[1]
    assert triangulate_funnel(f, prio, geo) == [(q, visible_vertex(f, q, geo))]


@pytest.mark.parametrize("seed", range(10))
def test_triangulate_valid(seed):
    f, P, prio = make_funnel(11, 11, seed)
    assert len(f.S) == 25
    geo = Geo(P)
    f.chords = triangulate_funnel(f, prio, geo)
    tris = f.triangles()
    assert len(tris) == len(f.S) - 2
    assert sum(abs(_cross(P[a], P[b], P[c])) for a, b, c in tris) == polygon_area(f.S, P)
    for t in tris:
        assert all(_cross(P[t[0]], P[t[1]], P[t[2]]) != 0 for _ in [0])
        for p in f.S:
            if p not in t:
                signs = {(_cross(P[t[i]], P[t[(i + 1) % 3]], P[p]) > 0) for i in range(3)}
                assert len(signs) == 2, f"point {p} inside {t}"
    for i, c1 in enumerate(f.chords):
        for c2 in f.chords[i + 1:]:
            assert not _segments_cross(P, c1, c2)
    # independent reference built from brute-force visibility
    ref = sorted(tuple(sorted(t)) for t in _funnel_triangles(f.S, f.a, prio, P))
    assert sorted(tuple(sorted(t)) for t in tris) == ref


@given(funnel_args)
def test_chord_invariants(args):
    f, P, prio = make_funnel(*args)
    geo = Geo(P)
    f.chords = triangulate_funnel(f, prio, geo)
    # one chord per non-corner vertex, none for corners and apex
    assert sorted(c[0] for c in f.chords) == sorted(f.non_corners())
    # vertical order: crossings with the vertical through the apex strictly descend
    ax = P[f.apex][0]

    def height(c):
        (x1, y1), (x2, y2) = P[c[0]], P[c[1]]
        return y1 + (y2 - y1) * (ax - x1) / (x2 - x1)

    hs = [F(0)] + [height(c) for c in f.chords] + [P[f.apex][1]]
    assert all(h1 > h2 for h1, h2 in zip(hs, hs[1:]))
    # stored visibility records agree with fresh queries
    f.nu = compute_nu(f, geo)
    assert all(f.nu[p] == visible_vertex(f, p, geo) for p in f.non_corners())


def test_find_tau0_minimum_priority_spans_funnel():
    f, P, prio = make_funnel(6, 6, 4)
    f.chords = triangulate_funnel(f, prio, Geo(P))
    p0 = min(f.non_corners(), key=prio)
    assert find_tau0(f, p0, prio) == (None, None)


def test_find_tau0_triangle_is_degenerate():
    f = Funnel([0, 1, 2], 1)
    P = {0: (F(0), F(0)), 1: (F(1), F(-2)), 2: (F(2), F(0))}
    assert retriangulate_tau0(f, (None, None), lambda p: p, Geo(P)) == ([], [])


@given(funnel_args)
def test_find_tau0_matches_replay(args):
    f, P, prio = make_funnel(*args)
    geo = Geo(P)
    f.chords = triangulate_funnel(f, prio, geo)
    ref = replay_tau0(f, prio, geo)
    for p in f.non_corners():
        assert find_tau0(f, p, prio) == ref[p]


def test_bridge_change_adds_topmost_triangle():
    f, P, prio = make_funnel(4, 4, 5)
    geo = Geo(P)
    f.chords = triangulate_funnel(f, prio, geo)
    f.nu = compute_nu(f, geo)
    old_tris = set(f.triangles())
    b_old, b_new = f.S[0], max(P) + 1
    # flat enough that no right-chain vertex sees past b_old: only the bridge changes
    flat = min(abs(P[g][1] / P[g][0]) for g in f.S[f.a + 1:-1]) / 2
    P[b_new] = (F(-1, 4), flat / 4)
    top = max(prio(p) for p in P if p != b_new) + 1
    prio2 = lambda p: top if p == b_old else (top + 1 if p == b_new else prio(p))
    removed, added, local = update_boundary(f, [b_new] + f.S, f.a + 1, prio2, geo)
    assert local and removed == [] and added == [(b_old, f.S[-1])]
    assert set(f.triangles()) == old_tris | {(b_new, b_old, f.S[-1])}


def _move(P, p, dx):
    x = P[p][0] + dx
    P[p] = (x, _left(x) if x <= 1 else _right(x))


def test_visibility_repair_against_full():
    """Move one vertex along its chain; single-vertex visibility changes are repaired locally."""
    noop = local_seen = 0
    for seed in range(300):
        f, P, prio = make_funnel(6, 6, seed)
        geo = Geo(P)
        f.chords = triangulate_funnel(f, prio, geo)
        f.nu = compute_nu(f, geo)
        rng = random.Random(seed)
        p = rng.choice(f.non_corners())
        k = f.pos[p]
        lo, hi = P[f.S[k - 1]][0], P[f.S[k + 1]][0]
        _move(P, p, (rng.choice([lo, hi]) - P[p][0]) * F(rng.randrange(1, 99), 100))
        if not general_position(P):
            continue
        new_nu = compute_nu(f, geo)
        moved = [q for q in new_nu if new_nu[q] != f.nu[q]]
        if len(moved) != 1:
            continue
        p0 = moved[0]
        chord_p0 = next(c for c in f.chords if c[0] == p0)
        removed, added, local = update_visibility(f, prio, geo, paranoid=True)
        assert local
        local_seen += 1
        assert f.chords == triangulate_funnel(f, prio, geo)
        assert all(prio(c[0]) >= prio(p0) for c in removed + added)
        if chord_p0 in f.chords:
            assert removed == [] and added == []
            noop += 1
    assert local_seen > 10 and noop > 0


def test_envelope_leave_makes_triangle():
    P = {0: (F(0), F(0)), 1: (F(1, 2), F(-1)), 2: (F(1), F(-2)), 3: (F(2), F(0))}
    f = Funnel([0, 1, 2, 3], 2)
    added, removed = apply_envelope_change(f, 1, "leave", "L", Geo(P))
    assert (added, removed) == ([], [1])
    assert f.S == [0, 2, 3] and f.a == 1


def test_envelope_bridge_creation():
    P = {0: (F(0), F(0)), 1: (F(1), F(-1)), 2: (F(2), F(-2))}
    f = Funnel.empty(1)
    geo = Geo(P)
    apply_envelope_change(f, 0, "enter", "L", geo)
    apply_envelope_change(f, 2, "enter", "R", geo)
    assert f.S == [0, 1, 2] and f.apex == 1 and f.bridge == (0, 2)


def test_envelope_inconsistent_geometry():
    P = {0: (F(0), F(0)), 1: (F(1, 2), F(-1, 2)), 2: (F(1), F(-2)), 3: (F(2), F(0))}
    f = Funnel([0, 1, 2, 3], 2)
    with pytest.raises(InconsistentGeometryError):
        apply_envelope_change(f, 1, "leave", "L", Geo(P))
    with pytest.raises(ValueError):
        apply_envelope_change(f, 1, "leave", "X", Geo(P))
