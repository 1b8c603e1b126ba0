"""Funnels of pseudo-triangles and their chord triangulations.

A funnel is stored as its boundary ``S``: the left chain from the left base
endpoint down to the apex, then the right chain up to the right base endpoint.
An empty funnel (apex on the local hull) has ``S == [apex]``.

Geometric predicates come from a ``geo`` object exposing ``orient(a, b, c)``
(the side-specific orientation; see ``kernel.Frame``).  Priorities come from a
callable mapping a point id to its rank.

Chords are kept top to bottom, i.e. in the order in which they cross the
vertical line through the apex.  Each chord is a pair (generator, partner).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

Prio = Callable[[int], int]


class EmptyFunnelError(ValueError):
    pass


class NotInFunnelError(KeyError):
    pass


class InconsistentGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ChordRecord:
    generator: int
    other: int
    rank: int


class Funnel:
    __slots__ = ("S", "a", "pos", "chords", "nu")

    def __init__(self, S: Sequence[int], apex_index: int):
        self.S = list(S)
        self.a = apex_index
        self.pos = {p: i for i, p in enumerate(self.S)}
        self.chords: list[tuple[int, int]] = []
        self.nu: dict[int, int] = {}

    @classmethod
    def empty(cls, apex: int) -> "Funnel":
        return cls([apex], 0)

    @property
    def apex(self) -> int:
        return self.S[self.a]

    @property
    def is_empty(self) -> bool:
        return len(self.S) == 1

    @property
    def bridge(self) -> Optional[tuple[int, int]]:
        return None if self.is_empty else (self.S[0], self.S[-1])

    @property
    def left_chain(self) -> list[int]:
        return self.S[: self.a + 1]

    @property
    def right_chain(self) -> list[int]:
        return self.S[self.a:]

    def non_corners(self) -> list[int]:
        return [p for i, p in enumerate(self.S[1:-1], 1) if i != self.a]

    def chord_records(self) -> list[ChordRecord]:
        return [ChordRecord(g, o, r) for r, (g, o) in enumerate(self.chords)]

    def chord_indices(self, chord: tuple[int, int]) -> tuple[int, int]:
        i, j = self.pos[chord[0]], self.pos[chord[1]]
        return (i, j) if i < j else (j, i)

    def triangles(self) -> list[tuple[int, int, int]]:
        """Triangles of the funnel, top to bottom."""
        if self.is_empty:
            return []
        a = self.a
        cuts = [(0, len(self.S) - 1)] + [self.chord_indices(c) for c in self.chords] + [(a, a)]
        out = []
        for (l1, r1), (l2, r2) in zip(cuts, cuts[1:]):
            verts = self.S[l1:l2 + 1] + self.S[r2:r1 + 1]
            if len(set(verts)) != 3:
                raise InconsistentGeometryError(f"cell between chords is not a triangle: {verts}")
            out.append(tuple(dict.fromkeys(verts)))
        return out

    def copy(self) -> "Funnel":
        f = Funnel(self.S, self.a)
        f.chords = list(self.chords)
        f.nu = dict(self.nu)
        return f


# ---------------------------------------------------------------- visibility

def _tangent_index(B: Sequence[int], a: int, k: int, geo) -> int:
    """Index of the extreme opposite-chain vertex visible from B[k] inside the region B."""
    p = B[k]
    if k < a:
        lo, hi = a, len(B) - 1
        # first r in [a, len-2] with B[r+1] below the line p -> B[r]
        while lo < hi:
            mid = (lo + hi) // 2
            if geo.orient(p, B[mid], B[mid + 1]) < 0:
                hi = mid
            else:
                lo = mid + 1
        return lo
    lo, hi = 0, a
    # largest r in [1, a] with B[r-1] below the line p -> B[r]
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if geo.orient(p, B[mid], B[mid - 1]) > 0:
            lo = mid
        else:
            hi = mid - 1
    return lo


def visible_vertex(funnel: Funnel, p: int, geo) -> int:
    """Extreme vertex of the opposite chain visible from p across the whole funnel."""
    if funnel.is_empty:
        raise EmptyFunnelError("funnel is empty")
    if p not in funnel.pos:
        raise NotInFunnelError(p)
    k = funnel.pos[p]
    if k == funnel.a:
        raise ValueError("the apex has no visibility vertex")
    return funnel.S[_tangent_index(funnel.S, funnel.a, k, geo)]


def compute_nu(funnel: Funnel, geo) -> dict[int, int]:
    S, a = funnel.S, funnel.a
    return {S[k]: S[_tangent_index(S, a, k, geo)] for k in range(1, len(S) - 1) if k != a}


# ---------------------------------------------------------------- triangulation

def triangulate_region(B: Sequence[int], a: int, prio: Prio, geo) -> list[tuple[int, int]]:
    """Chords of the priority-driven triangulation of region B (apex at index a), top to bottom."""
    out: list[tuple[int, int]] = []
    stack: list = [(list(B), a)]
    while stack:
        item = stack.pop()
        if isinstance(item[0], int):
            out.append(item)
            continue
        B, a = item
        n = len(B)
        if n <= 3:
            continue
        k = min((i for i in range(1, n - 1) if i != a), key=lambda i: prio(B[i]))
        r = _tangent_index(B, a, k, geo)
        if k < a:
            upper, ua = B[:k + 1] + B[r:], k
            lower, la = B[k:r + 1], a - k
        else:
            upper, ua = B[:r + 1] + B[k:], r + 1
            lower, la = B[r:k + 1], a - r
        # popped in reverse: upper region first, then the chord, then the lower region
        stack.append((lower, la))
        stack.append((B[k], B[r]))
        stack.append((upper, ua))
    return out


def triangulate_funnel(funnel: Funnel, prio: Prio, geo) -> list[tuple[int, int]]:
    if funnel.is_empty:
        return []
    return triangulate_region(funnel.S, funnel.a, prio, geo)


# ---------------------------------------------------------------- local repair

def _below(funnel: Funnel, chord: tuple[int, int], k: int) -> bool:
    li, ri = funnel.chord_indices(chord)
    return li >= k if k < funnel.a else ri <= k


def find_tau0(funnel: Funnel, p0: int, prio: Prio) -> tuple[Optional[tuple[int, int]], Optional[tuple[int, int]]]:
    """Chords bounding the sub-pseudo-triangle in which p0's chord is generated.

    Returns (above, below); None stands for the base (above) or the apex (below).
    """
    if p0 not in funnel.pos:
        raise NotInFunnelError(p0)
    k = funnel.pos[p0]
    if k in (0, len(funnel.S) - 1) or k == funnel.a:
        raise ValueError(f"point {p0} is a funnel corner")
    ch = funnel.chords
    lo, hi = 0, len(ch)
    while lo < hi:
        mid = (lo + hi) // 2
        if _below(funnel, ch[mid], k):
            hi = mid
        else:
            lo = mid + 1
    rank = prio(p0)
    up = next((c for c in reversed(ch[:lo]) if prio(c[0]) < rank), None)
    dn = next((c for c in ch[lo:] if prio(c[0]) < rank), None)
    return up, dn


def region_between(funnel: Funnel, up, dn) -> tuple[list[int], int]:
    """Boundary and apex index of the band between two chords (None = base / apex)."""
    S, a = funnel.S, funnel.a
    lu, ru = (0, len(S) - 1) if up is None else funnel.chord_indices(up)
    if dn is None:
        return S[lu:a + 1] + S[a + 1:ru + 1], a - lu
    ld, rd = funnel.chord_indices(dn)
    B = S[lu:ld + 1] + S[rd:ru + 1]
    return B, (ld - lu if dn[0] == S[ld] else ld - lu + 1)


def retriangulate_tau0(funnel: Funnel, tau0, prio: Prio, geo) -> tuple[list, list]:
    """Recompute the chords strictly inside tau0 = (above, below); returns (removed, added)."""
    up, dn = tau0
    ch = funnel.chords
    i0 = 0 if up is None else ch.index(up) + 1
    i1 = len(ch) if dn is None else ch.index(dn)
    B, ba = region_between(funnel, up, dn)
    fresh = triangulate_region(B, ba, prio, geo)
    old = ch[i0:i1]
    funnel.chords = ch[:i0] + fresh + ch[i1:]
    keep = set(old) & set(fresh)
    return [c for c in old if c not in keep], [c for c in fresh if c not in keep]


def _single_change(old: Funnel, new_S: list[int]) -> Optional[int]:
    """The point whose non-corner status differs, if exactly one does and nothing else moved."""
    if len(old.S) < 3 or len(new_S) < 3:
        return None
    o_nc, n_nc = set(old.non_corners()), set(new_S[1:-1]) - {old.apex}
    diff = o_nc ^ n_nc
    if len(diff) != 1:
        return None
    (p0,) = diff
    if [p for p in old.S[1:-1] if p != p0] != [p for p in new_S[1:-1] if p != p0]:
        return None
    return p0


def update_boundary(funnel: Funnel, new_S: list[int], apex_index: int, prio: Prio, geo,
                    paranoid: bool = False) -> tuple[list, list, bool]:
    """Move the funnel to a new boundary; returns (chords removed, chords added, local).

    A boundary change that alters the non-corner status of a single point is
    repaired inside the sub-pseudo-triangle of that point; anything else is
    retriangulated from scratch.
    """
    old_chords = list(funnel.chords)
    p0 = _single_change(funnel, new_S)
    local = p0 is not None
    if local:
        staged = Funnel(new_S, apex_index)
        host = funnel if p0 in funnel.pos and funnel.pos[p0] not in (0, len(funnel.S) - 1) else staged
        staged.chords = old_chords
        up, dn = find_tau0(host, p0, prio)
        # chords of lower-priority generators must survive with unchanged visibility
        rank = prio(p0)
        kept = [c for c in old_chords if c[0] != p0 and c[0] in staged.pos and c[1] in staged.pos]
        lost = set(old_chords) - set(kept)
        new_nu = compute_nu(staged, geo)
        if any(prio(c[0]) < rank for c in lost) or (up is not None and up not in kept) \
                or (dn is not None and dn not in kept) \
                or any(prio(g) < rank and new_nu[g] != funnel.nu.get(g) for g, _ in kept):
            local = False
        else:
            staged.chords = kept
            retriangulate_tau0(staged, (up, dn), prio, geo)
            chords = staged.chords
    funnel.S = list(new_S)
    funnel.a = apex_index
    funnel.pos = {p: i for i, p in enumerate(funnel.S)}
    if not local:
        chords = triangulate_funnel(funnel, prio, geo)
    elif paranoid:
        full = triangulate_funnel(funnel, prio, geo)
        if full != chords:
            raise InconsistentGeometryError(f"local repair {chords} differs from full {full}")
    funnel.chords = chords
    funnel.nu = compute_nu(funnel, geo) if not funnel.is_empty else {}
    old_set, new_set = set(old_chords), set(chords)
    return [c for c in old_chords if c not in new_set], [c for c in chords if c not in old_set], local


def update_visibility(funnel: Funnel, prio: Prio, geo, paranoid: bool = False) -> tuple[list, list, bool]:
    """Refresh the visibility records after a visibility event; returns (removed, added, local)."""
    new_nu = compute_nu(funnel, geo)
    moved = [p for p, w in new_nu.items() if funnel.nu.get(p) != w]
    old_chords = list(funnel.chords)
    local = len(moved) == 1
    if local:
        tau0 = find_tau0(funnel, moved[0], prio)
        retriangulate_tau0(funnel, tau0, prio, geo)
        if paranoid:
            full = triangulate_funnel(funnel, prio, geo)
            if full != funnel.chords:
                raise InconsistentGeometryError(f"local repair {funnel.chords} differs from full {full}")
    elif moved:
        funnel.chords = triangulate_funnel(funnel, prio, geo)
    funnel.nu = new_nu
    old_set, new_set = set(old_chords), set(funnel.chords)
    return ([c for c in old_chords if c not in new_set],
            [c for c in funnel.chords if c not in old_set], local)


def apply_envelope_change(funnel: Funnel, p: int, kind: str, side: str, geo) -> tuple[list, list]:
    """Insert p into (enter) or drop p from (leave) a chain; returns (added, removed) boundary vertices.

    The three points around p must be collinear at the frame's time, checked exactly.
    Chords and visibility records are left for the caller to repair.
    """
    if side not in ("L", "R") or kind not in ("enter", "leave"):
        raise ValueError("side must be L or R and kind enter or leave")
    S, a = funnel.S, funnel.a
    if kind == "leave":
        if p not in funnel.pos:
            raise NotInFunnelError(p)
        k = funnel.pos[p]
        if (k < a) != (side == "L") or k == a:
            raise ValueError(f"point {p} is not on chain {side}")
        nbrs = (S[k - 1] if k > 0 else None, S[k + 1] if k + 1 < len(S) else None)
        new_S = S[:k] + S[k + 1:]
        new_a = a - 1 if k < a else a
        added, removed = [], [p]
    else:
        chain = range(0, a) if side == "L" else range(a + 1, len(S))
        k = next((i for i in chain if geo.xcmp(p, S[i]) < 0), a if side == "L" else len(S))
        new_S = S[:k] + [p] + S[k:]
        new_a = a + 1 if side == "L" else a
        nbrs = (new_S[k - 1] if k > 0 else None, new_S[k + 1] if k + 1 < len(new_S) else None)
        added, removed = [p], []
    if None not in nbrs and geo.orient_at(nbrs[0], p, nbrs[1]) != 0:
        raise InconsistentGeometryError(f"points {nbrs[0]}, {p}, {nbrs[1]} are not collinear")
    funnel.S = new_S
    funnel.a = new_a
    funnel.pos = {q: i for i, q in enumerate(new_S)}
    return added, removed
