"""Independent reference reconstruction, for checking the kinetic structure.

Everything here works on concrete rational coordinates at one time and uses
only brute-force geometry: monotone-chain hulls, an all-pairs bridge search
and explicit segment-in-polygon visibility.  It shares nothing with the
kinetic code beyond trajectory evaluation and event-time isolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from itertools import combinations
from math import gcd
from typing import Optional, Sequence

from .kernel import EventTime, collinearity_times, compare_times, x_swap_times
from .motion import DegeneracyError, PriorityAssignment, Scenario

Point = tuple[Fraction, Fraction]


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass
class TriangulationSnapshot:
    triangles: list[tuple[int, int, int]]
    hull: list[int]
    time: object = None
    upper: list[tuple[int, int, int]] = field(default_factory=list)
    lower: list[tuple[int, int, int]] = field(default_factory=list)

    def dump(self) -> str:
        lines = [f"triangles {len(self.triangles)}"]
        lines += [f"{a} {b} {c}" for a, b, c in self.triangles]
        lines.append("hull " + " ".join(map(str, self.hull)))
        return "\n".join(lines) + "\n"


def canonical(tris) -> list[tuple[int, int, int]]:
    return sorted(tuple(sorted(t)) for t in tris)


def equivalent(s1: TriangulationSnapshot, s2: TriangulationSnapshot) -> bool:
    return canonical(s1.triangles) == canonical(s2.triangles)


# ---------------------------------------------------------------- reference construction

def _upper_hull(ids: Sequence[int], P: dict) -> list[int]:
    """Andrew's monotone chain on ids already sorted by x."""
    out: list[int] = []
    for i in ids:
        while len(out) >= 2 and _cross(P[out[-2]], P[out[-1]], P[i]) >= 0:
            out.pop()
        out.append(i)
    return out


def _segment_inside(poly: list[int], u: int, w: int, P: dict) -> bool:
    """Whether the open segment uw lies inside the simple polygon (vertex ids, any orientation)."""
    a, b = P[u], P[w]
    m = len(poly)
    for i in range(m):
        c, d = P[poly[i]], P[poly[(i + 1) % m]]
        if poly[i] in (u, w) and poly[(i + 1) % m] in (u, w):
            return False  # uw is a boundary edge, not a diagonal
        d1, d2 = _cross(a, b, c), _cross(a, b, d)
        d3, d4 = _cross(c, d, a), _cross(c, d, b)
        if poly[i] not in (u, w) and d1 == 0 and min(a[0], b[0]) <= c[0] <= max(a[0], b[0]):
            return False  # passes through a vertex
        if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
            return False
    mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    inside = False
    for i in range(m):
        c, d = P[poly[i]], P[poly[(i + 1) % m]]
        if (c[1] > mid[1]) != (d[1] > mid[1]):
            xint = c[0] + (mid[1] - c[1]) * (d[0] - c[0]) / (d[1] - c[1])
            if xint > mid[0]:
                inside = not inside
    return inside


def _region_chords(B: list[int], a: int, prio, P: dict, out: list) -> None:
    if len(B) <= 3:
        return
    k = min((i for i in range(1, len(B) - 1) if i != a), key=lambda i: prio(B[i]))
    # extreme visible vertex on the opposite side, scanning from the far end inwards
    opposite = range(len(B) - 1, a - 1, -1) if k < a else range(0, a + 1)
    r = next(i for i in opposite if abs(i - k) == 1 or _segment_inside(B, B[k], B[i], P))
    if k < a:
        upper, ua, lower, la = B[:k + 1] + B[r:], k, B[k:r + 1], a - k
    else:
        upper, ua, lower, la = B[:r + 1] + B[k:], r + 1, B[r:k + 1], a - r
    _region_chords(upper, ua, prio, P, out)
    out.append((B[k], B[r]))
    _region_chords(lower, la, prio, P, out)


def _funnel_triangles(S: list[int], a: int, prio, P: dict) -> list[tuple[int, int, int]]:
    chords: list = []
    _region_chords(S, a, prio, P, chords)
    # fan the cells between consecutive chords
    polys = [S]
    for c in chords:
        nxt = []
        for poly in polys:
            if c[0] in poly and c[1] in poly and _segment_inside(poly, c[0], c[1], P):
                i, j = sorted((poly.index(c[0]), poly.index(c[1])))
                nxt.append(poly[i:j + 1])
                nxt.append(poly[j:] + poly[:i + 1])
            else:
                nxt.append(poly)
        polys = nxt
    tris = []
    for poly in polys:
        if len(poly) != 3:
            raise AssertionError(f"reference funnel cell is not a triangle: {poly}")
        tris.append(tuple(poly))
    return tris


def _side_triangles(order: list[int], P: dict, prio) -> tuple[list, list[int]]:
    """Triangles above the x-monotone chain, by direct recursion over ranges."""
    tris: list = []
    n = len(order)
    stack = [(0, n - 1)]
    while stack:
        s, e = stack.pop()
        if s > e:
            continue
        m = min(range(s, e + 1), key=lambda i: prio(order[i]))
        apex = order[m]
        left = order[max(s - 1, 0):m + 1] if s > 0 else order[s:m + 1]
        right = order[m:e + 2]
        UL, UR = _upper_hull(left, P), _upper_hull(right, P)
        pts = list(dict.fromkeys(UL + UR))
        bridge = None
        for p in UL:
            for q in UR:
                if p != q and all(_cross(P[p], P[q], P[r]) < 0 for r in pts if r not in (p, q)):
                    bridge = (p, q)
        if bridge is not None and apex not in bridge:
            i, j = UL.index(bridge[0]), UR.index(bridge[1])
            S = UL[i:] + UR[1:j + 1]
            tris.extend(_funnel_triangles(S, len(UL) - 1 - i, prio, P))
        stack.append((s, m - 1))
        stack.append((m + 1, e))
    return tris, _upper_hull(order, P)


def positions_at(scenario: Scenario, t) -> dict[int, Point]:
    return dict(enumerate(scenario.positions(Fraction(t))))


def integer_positions(P: dict) -> dict:
    """The same configuration scaled by a common denominator; orientations are unchanged."""
    d = 1
    for x, y in P.values():
        for c in (x, y):
            d = d * c.denominator // gcd(d, c.denominator)
    return {i: (int(x * d), int(y * d)) for i, (x, y) in P.items()}


def check_general_position(P: dict, order: list[int]) -> None:
    for p, q in zip(order, order[1:]):
        if P[p][0] == P[q][0]:
            raise DegeneracyError(f"points {p} and {q} share x")
    for a, b, c in combinations(order, 3):
        if _cross(P[a], P[b], P[c]) == 0:
            raise DegeneracyError(f"points {a}, {b}, {c} are collinear")


def static_snapshot(scenario: Scenario, priorities: PriorityAssignment, t) -> TriangulationSnapshot:
    """Reference triangulation of both sides at a rational, non-degenerate time."""
    P = integer_positions(positions_at(scenario, t))
    prio = priorities.__getitem__
    order = sorted(P, key=lambda i: P[i][0])
    check_general_position(P, order)
    up, hu = _side_triangles(order, P, prio)
    M = {i: (x, -y) for i, (x, y) in P.items()}
    lo, hl = _side_triangles(order, M, prio)
    hull = hu + hl[-2:0:-1]
    return TriangulationSnapshot(canonical(up + lo), hull, Fraction(t), canonical(up), canonical(lo))


# ---------------------------------------------------------------- validity

def snapshot_problems(snap: TriangulationSnapshot, P: dict) -> list[str]:
    """Geometric validity of a triangulation of the points P; empty when valid."""
    probs = []
    tris = snap.triangles
    area = Fraction(0)
    edges: dict = {}
    for t in tris:
        a, b, c = t
        ar = _cross(P[a], P[b], P[c])
        if ar == 0:
            probs.append(f"degenerate triangle {t}")
            continue
        if ar < 0:
            b, c = c, b
        area += abs(ar)
        for u, w in ((a, b), (b, c), (c, a)):
            edges.setdefault(frozenset((u, w)), []).append((u, w))
        for p in P:
            if p in t:
                continue
            if _cross(P[a], P[b], P[p]) > 0 and _cross(P[b], P[c], P[p]) > 0 and _cross(P[c], P[a], P[p]) > 0:
                probs.append(f"point {p} inside triangle {t}")
    hull = snap.hull
    hull_edges = {frozenset((hull[i], hull[(i + 1) % len(hull)])) for i in range(len(hull))}
    for e, uses in edges.items():
        if len(uses) == 1:
            if e not in hull_edges:
                probs.append(f"boundary edge {sorted(e)} is not a hull edge")
        elif len(uses) == 2:
            if uses[0] == uses[1]:
                probs.append(f"edge {sorted(e)} has both triangles on one side")
        else:
            probs.append(f"edge {sorted(e)} used {len(uses)} times")
    missing = [sorted(e) for e in hull_edges if e not in edges]
    if missing:
        probs.append(f"hull edges without triangle: {missing}")
    harea = Fraction(0)
    for i in range(1, len(hull) - 1):
        harea += abs(_cross(P[hull[0]], P[hull[i]], P[hull[i + 1]]))
    if harea != area:
        probs.append(f"triangle area {area} differs from hull area {harea}")
    h, n = len(hull), len(P)
    if len(tris) != 2 * n - h - 2:
        probs.append(f"{len(tris)} triangles, expected {2 * n - h - 2}")
    if len(edges) != 3 * n - h - 3:
        probs.append(f"{len(edges)} edges, expected {3 * n - h - 3}")
    return probs


# ---------------------------------------------------------------- candidate times

def candidate_times(scenario: Scenario, window=None) -> list[EventTime]:
    """All pair x-swap and triple collinearity times in the window, sorted and deduplicated."""
    window = scenario.window if window is None else window
    pts = scenario.points
    out: list[EventTime] = []
    for i, j in combinations(range(scenario.n), 2):
        out.extend(x_swap_times(pts[i], pts[j], window))
    for i, j, k in combinations(range(scenario.n), 3):
        out.extend(collinearity_times(pts[i], pts[j], pts[k], window))
    out.sort(key=cmp_to_key(compare_times))
    dedup: list[EventTime] = []
    for e in out:
        if not dedup or compare_times(dedup[-1], e) != 0:
            dedup.append(e)
    return dedup
