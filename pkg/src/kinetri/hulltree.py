"""Treap of pseudo-triangles over the x-ordered points, for one side (upper or lower).

Every node stores one point (its apex), the x-neighbours just outside its
subtree range (a sentinel when the range touches an end of the order), the
upper hull of its range plus those two neighbours, the bridge between the
hulls of its two halves, and the funnel spanned by the bridge.

The lower structure is the upper structure of the y-mirrored point set; it is
driven by a mirrored geometry frame and otherwise shares all code.
"""

from __future__ import annotations

from enum import Enum
from functools import cmp_to_key
from typing import Callable, Optional, Sequence

from .funnel import Funnel, compute_nu, triangulate_funnel, update_boundary
from .kernel import Frame
from .motion import SENT_L, SENT_R, PriorityAssignment, Scenario


class Side(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class PTNode:
    __slots__ = ("apex", "left", "right", "parent", "s", "e", "lo_end", "hi_end",
                 "hull", "funnel", "ul", "ur")

    def __init__(self, apex: int):
        self.apex = apex
        self.left: Optional[PTNode] = None
        self.right: Optional[PTNode] = None
        self.parent: Optional[PTNode] = None
        self.s = self.e = 0
        self.lo_end = SENT_L
        self.hi_end = SENT_R
        self.hull: list[int] = []
        self.funnel = Funnel.empty(apex)
        # the child hulls the bridge was computed from, kept for certificates
        self.ul: list[int] = []
        self.ur: list[int] = []

    @property
    def bridge(self) -> Optional[tuple[int, int]]:
        return self.funnel.bridge

    def __repr__(self) -> str:
        return f"PTNode(apex={self.apex}, range=[{self.s},{self.e}])"


# ---------------------------------------------------------------- bridges

def _tangent_from(pt: int, B: Sequence[int], start: int, orient) -> int:
    """Index in B[start:] of the upper tangent point from pt, which lies left of B[start:]."""
    lo, hi = start, len(B) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if orient(pt, B[mid], B[mid + 1]) < 0:
            hi = mid
        else:
            lo = mid + 1
    return lo


def apex_on_hull(UL: Sequence[int], UR: Sequence[int], orient) -> bool:
    """Whether the shared point UL[-1] == UR[0] is a vertex of the hull of both."""
    return len(UL) == 1 or len(UR) == 1 or orient(UL[-2], UL[-1], UR[1]) < 0


def compute_bridge(UL: Sequence[int], UR: Sequence[int], orient) -> tuple[int, int]:
    """Indices (i, j) of the upper common tangent UL[i] UR[j] of two x-separated upper hulls.

    When the hulls share their splitting point and it lies on the combined hull,
    the result is (len(UL) - 1, 0).
    """
    shared = UL[-1] == UR[0]
    if shared and apex_on_hull(UL, UR, orient):
        return len(UL) - 1, 0
    last = len(UL) - 2 if shared else len(UL) - 1
    start = 1 if shared else 0
    lo, hi = 0, last
    while lo < hi:
        mid = (lo + hi) // 2
        j = _tangent_from(UL[mid], UR, start, orient)
        if orient(UL[mid], UR[j], UL[mid + 1]) > 0:
            lo = mid + 1
        else:
            hi = mid
    return lo, _tangent_from(UL[lo], UR, start, orient)


def brute_force_bridge(UL: Sequence[int], UR: Sequence[int], orient) -> tuple[int, int]:
    """Reference bridge: the pair with every other vertex strictly below its line."""
    pts = list(dict.fromkeys(list(UL) + list(UR)))
    if UL[-1] == UR[0] and apex_on_hull(UL, UR, orient):
        return len(UL) - 1, 0
    for i, p in enumerate(UL):
        for j, q in enumerate(UR):
            if p == q:
                continue
            if all(orient(p, q, r) < 0 for r in pts if r not in (p, q)):
                return i, j
    raise ValueError("no bridge found")


# ---------------------------------------------------------------- tree

class PTTree:
    """One side of the pseudo-triangulation: treap nodes plus the shared x-order."""

    def __init__(self, side: Side, priorities: PriorityAssignment, order: list[int],
                 paranoid: bool = False):
        self.side = Side(side)
        self.priorities = priorities
        self.prio: Callable[[int], int] = priorities.__getitem__
        self.order = order
        self.pos = {p: i for i, p in enumerate(order)}
        self.nodes: dict[int, PTNode] = {p: PTNode(p) for p in order}
        self.root: Optional[PTNode] = None
        self.paranoid = paranoid
        self.local_repairs = 0
        self.full_repairs = 0

    def geo(self, frame: Frame) -> Frame:
        return frame.mirrored() if self.side is Side.LOWER else frame

    # construction -------------------------------------------------------------
    def _cartesian(self, s: int, e: int, parent: Optional[PTNode]) -> Optional[PTNode]:
        """Treap over order[s..e] by a single stack pass."""
        prio = self.prio
        stack: list[PTNode] = []
        for idx in range(s, e + 1):
            node = self.nodes[self.order[idx]]
            node.left = node.right = None
            last = None
            while stack and prio(stack[-1].apex) > prio(node.apex):
                last = stack.pop()
            node.left = last
            if stack:
                stack[-1].right = node
            stack.append(node)
        if not stack:
            return None
        root = stack[0]
        root.parent = parent
        # parents and ranges, top down
        root.s, root.e = s, e
        todo = [root]
        while todo:
            v = todo.pop()
            m = self.pos[v.apex]
            v.lo_end = self.order[v.s - 1] if v.s > 0 else SENT_L
            v.hi_end = self.order[v.e + 1] if v.e + 1 < len(self.order) else SENT_R
            if v.left is not None:
                v.left.parent = v
                v.left.s, v.left.e = v.s, m - 1
                todo.append(v.left)
            if v.right is not None:
                v.right.parent = v
                v.right.s, v.right.e = m + 1, v.e
                todo.append(v.right)
        return root

    def postorder(self, v: Optional[PTNode]) -> list[PTNode]:
        out, stack = [], [v] if v is not None else []
        while stack:
            u = stack.pop()
            out.append(u)
            if u.left is not None:
                stack.append(u.left)
            if u.right is not None:
                stack.append(u.right)
        out.reverse()
        return out

    def build(self, frame: Frame) -> None:
        self.root = self._cartesian(0, len(self.order) - 1, None)
        geo = self.geo(frame)
        for v in self.postorder(self.root):
            self._fresh(v, geo)

    # per-node geometry ----------------------------------------------------------
    def child_hulls(self, v: PTNode) -> tuple[list[int], list[int]]:
        if v.left is not None:
            UL = v.left.hull
        else:
            UL = [v.lo_end, v.apex] if v.lo_end >= 0 else [v.apex]
        if v.right is not None:
            UR = v.right.hull
        else:
            UR = [v.apex, v.hi_end] if v.hi_end >= 0 else [v.apex]
        return UL, UR

    def _geometry(self, v: PTNode, geo) -> tuple[list[int], list[int], int]:
        UL, UR = self.child_hulls(v)
        i, j = compute_bridge(UL, UR, geo.orient)
        if i == len(UL) - 1 and j == 0:
            return UL + UR[1:], [v.apex], 0
        L, R = UL[i:], UR[:j + 1]
        return UL[:i + 1] + UR[j:], L + R[1:], len(L) - 1

    def _fresh(self, v: PTNode, geo) -> None:
        v.ul, v.ur = self.child_hulls(v)
        v.hull, S, a = self._geometry(v, geo)
        f = Funnel(S, a)
        if not f.is_empty:
            f.chords = triangulate_funnel(f, self.prio, geo)
            f.nu = compute_nu(f, geo)
        v.funnel = f

    def recompute(self, v: PTNode, geo) -> tuple[bool, list, list]:
        """Refresh one node from its children; returns (hull changed, chords removed, chords added)."""
        v.ul, v.ur = self.child_hulls(v)
        hull, S, a = self._geometry(v, geo)
        changed = hull != v.hull
        v.hull = hull
        f = v.funnel
        if S == f.S:
            return changed, [], []
        removed, added, local = update_boundary(f, S, a, self.prio, geo, self.paranoid)
        if local:
            self.local_repairs += 1
        else:
            self.full_repairs += 1
        return changed, removed, added

    def depth(self, v: PTNode) -> int:
        d = 0
        while v.parent is not None:
            v = v.parent
            d += 1
        return d

    # kinetic updates --------------------------------------------------------------
    def propagate(self, dirty: Sequence[PTNode], geo, log: dict) -> None:
        """Recompute dirty nodes bottom-up, climbing while hulls change.

        ``log`` maps apex -> [chords removed, chords added] and collects every touched node.
        """
        pending = {v.apex: v for v in dirty}
        depth = {a: self.depth(v) for a, v in pending.items()}
        while pending:
            a = max(pending, key=lambda x: (depth[x], x))
            v = pending.pop(a)
            changed, rem, add = self.recompute(v, geo)
            entry = log.setdefault(a, [[], []])
            entry[0].extend(rem)
            entry[1].extend(add)
            if changed and v.parent is not None and v.parent.apex not in pending:
                pending[v.parent.apex] = v.parent
                depth[v.parent.apex] = depth[a] - 1

    def rebuild_subtree(self, v: PTNode, frame: Frame) -> list[PTNode]:
        """Rebuild the subtree rooted at v over its index range; returns the new subtree nodes.

        Nodes keep their identity (one per point), so old funnels are replaced in place.
        """
        parent = v.parent
        was_left = parent is not None and parent.left is v
        root = self._cartesian(v.s, v.e, parent)
        if parent is None:
            self.root = root
        elif was_left:
            parent.left = root
        else:
            parent.right = root
        geo = self.geo(frame)
        nodes = self.postorder(root)
        for u in nodes:
            self._fresh(u, geo)
        return nodes

    def swap(self, k: int, frame: Frame, log: dict) -> None:
        """Exchange order[k] and order[k+1] and repair the structure at the frame's time."""
        p, q = self.order[k], self.order[k + 1]
        self.order[k], self.order[k + 1] = q, p
        self.pos[p], self.pos[q] = k + 1, k
        np_, nq = self.nodes[p], self.nodes[q]
        top = np_ if self.prio(p) < self.prio(q) else nq
        old = {u.apex: list(u.funnel.chords) for u in self.postorder(top)}
        nodes = self.rebuild_subtree(top, frame)
        for u in nodes:
            oc = old.get(u.apex, [])
            nc = u.funnel.chords
            so, sn = set(oc), set(nc)
            entry = log.setdefault(u.apex, [[], []])
            entry[0].extend(c for c in oc if c not in sn)
            entry[1].extend(c for c in nc if c not in so)
        dirty = [] if top.parent is None else [top.parent]
        # nodes outside the subtree whose range abuts the swapped pair change an endpoint
        for idx, step in ((k + 2, "left"), (k - 1, "right")):
            if 0 <= idx < len(self.order):
                u = self.nodes[self.order[idx]]
                if getattr(u, step) is None:
                    while True:
                        u.lo_end = self.order[u.s - 1] if u.s > 0 else SENT_L
                        u.hi_end = self.order[u.e + 1] if u.e + 1 < len(self.order) else SENT_R
                        dirty.append(u)
                        par = u.parent
                        if par is None or getattr(par, step) is not u:
                            break
                        u = par
        self.propagate(dirty, self.geo(frame), log)

    # queries ------------------------------------------------------------------
    def upper_hull(self) -> list[int]:
        return [p for p in self.root.hull if p >= 0] if self.root is not None else []

    def triangles(self) -> list[tuple[int, int, int]]:
        out = []
        for v in self.nodes.values():
            out.extend(v.funnel.triangles())
        return out

    def storage(self) -> dict[str, int]:
        chain = sum(len(v.funnel.S) for v in self.nodes.values() if not v.funnel.is_empty)
        chords = sum(len(v.funnel.chords) for v in self.nodes.values())
        return {"nodes": len(self.nodes), "chain_vertices": chain, "chords": chords}

    def dump(self) -> str:
        """Deterministic indented listing of the tree for golden tests."""
        lines = [f"{self.side.value} n={len(self.order)}"]
        stack = [(self.root, 0, "root")] if self.root is not None else []
        while stack:
            v, d, tag = stack.pop()
            f = v.funnel
            br = "-" if f.bridge is None else f"{f.bridge[0]}-{f.bridge[1]}"
            lines.append(f"{'  ' * d}{tag} apex={v.apex} ends=({_name(v.lo_end)},{_name(v.hi_end)}) "
                         f"bridge={br} L={f.a + 1 if not f.is_empty else 0} "
                         f"R={len(f.S) - f.a if not f.is_empty else 0} chords={len(f.chords)}")
            if v.right is not None:
                stack.append((v.right, d + 1, "R"))
            if v.left is not None:
                stack.append((v.left, d + 1, "L"))
        return "\n".join(lines) + "\n"


def _name(p: int) -> str:
    return {SENT_L: "-inf", SENT_R: "+inf"}.get(p, str(p))


# ---------------------------------------------------------------- module-level operations

def sort_by_x(scenario: Scenario, frame: Frame) -> list[int]:
    return sorted(range(scenario.n), key=cmp_to_key(frame.xcmp))


def build_static(scenario: Scenario, priorities: PriorityAssignment, t, side: Side = Side.UPPER,
                 after: bool = False, frame: Optional[Frame] = None, order: Optional[list[int]] = None) -> PTTree:
    """Build the tree of one side at time t.

    With ``after`` false every predicate is evaluated at t itself and any
    degeneracy raises; with ``after`` true the configuration just after t is used.
    """
    if frame is None:
        frame = Frame(scenario, t, after=after)
    if order is None:
        order = sort_by_x(scenario, frame)
    tree = PTTree(side, priorities, order)
    tree.build(frame)
    return tree


def pseudo_triangle_condition(a: int, b: int, c: int, tree: PTTree, t=None) -> bool:
    """Whether (a, b, c) are the endpoints and apex of a pseudo-triangle of the tree's order.

    ``a``/``c`` may be sentinels; the x-order is the tree's current order.
    """
    prio = tree.prio
    ia = -1 if a == SENT_L else tree.pos[a]
    ic = len(tree.order) if c == SENT_R else tree.pos[c]
    ib = tree.pos[b]
    if not ia < ib < ic:
        raise ValueError("points are not in x order")
    if not prio(b) > max(prio(a), prio(c)):
        return False
    return all(prio(tree.order[i]) >= prio(b) for i in range(ia + 1, ic))


def verify_treap(tree: PTTree, frame: Optional[Frame] = None) -> bool:
    """Search-tree order (against the frame's x-order when given), heap order, and endpoint fields."""
    order = tree.order
    if frame is not None:
        for p, q in zip(order, order[1:]):
            if frame.xcmp(p, q) > 0:
                return False
    seen = 0
    prio = tree.prio
    stack = [(tree.root, 0, len(order) - 1, None)] if tree.root is not None else []
    while stack:
        v, s, e, parent = stack.pop()
        seen += 1
        m = tree.pos[v.apex]
        if not s <= m <= e or v.s != s or v.e != e or v.parent is not parent:
            return False
        if parent is not None and prio(parent.apex) >= prio(v.apex):
            return False
        if v.lo_end != (order[s - 1] if s > 0 else SENT_L) or v.hi_end != (order[e + 1] if e + 1 < len(order) else SENT_R):
            return False
        if not pseudo_triangle_condition(v.lo_end, v.apex, v.hi_end, tree):
            return False
        if v.left is not None:
            stack.append((v.left, s, m - 1, v))
        elif m != s:
            return False
        if v.right is not None:
            stack.append((v.right, m + 1, e, v))
        elif m != e:
            return False
    return seen == len(order)


def upper_hull(tree: PTTree) -> list[int]:
    return tree.upper_hull()
