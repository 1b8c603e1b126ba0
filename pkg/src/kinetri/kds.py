"""Kinetic maintenance of the upper and lower pseudo-triangulations.

Three certificate families keep the structure valid between events:

* CT  x-order of two consecutive points (shared by both sides),
* CE  the bridge of one node (or, for an empty funnel, the convexity at its apex),
* CV  the visibility vertex of one funnel vertex.

Every certificate is a list of orientation or x-difference polynomials that
must keep their sign; its failure time is the first sign change after the
current time.  Events are processed in exact time order, and all predicates
of a repair are evaluated just after the event time.
"""

from __future__ import annotations

import csv
import heapq
import io
import time as _clock
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Callable, Iterable, Optional

from .funnel import update_visibility
from .hulltree import PTNode, PTTree, Side, sort_by_x
from .kernel import (EQ, GT, LT, EventTime, Frame, as_time, compare_times, ipoly_roots,
                     orient_ipoly, xdiff_ipoly)
from .motion import PriorityAssignment, Scenario
from .oracle import TriangulationSnapshot, canonical

KINDS = ("CT", "CE", "CV", "BP")
KIND_RANK = {k: i for i, k in enumerate(KINDS)}
SIDES = (Side.UPPER, Side.LOWER)


class QueueInconsistencyError(RuntimeError):
    """A certificate came due while its predicate still held."""


@dataclass
class Certificate:
    kind: str
    key: tuple
    points: tuple
    # (point ids, required sign of the unmirrored polynomial); two ids mean x-order
    constituents: tuple
    failure: Optional[EventTime] = None


@dataclass
class EventRecord:
    time: EventTime
    kind: str
    points: tuple
    side: str
    chords_removed: int
    chords_added: int
    changes: int
    wall_ns: int


class _Entry:
    __slots__ = ("time", "rank", "ids", "seq", "key", "version")

    def __init__(self, time, rank, ids, seq, key, version):
        self.time, self.rank, self.ids, self.seq, self.key, self.version = time, rank, ids, seq, key, version

    def __lt__(self, other: "_Entry") -> bool:
        c = compare_times(self.time, other.time)
        if c:
            return c < 0
        return (self.rank, self.ids, self.seq) < (other.rank, other.ids, other.seq)


class EventQueue:
    """Binary heap of certificate failure times with lazy invalidation by version stamps."""

    def __init__(self):
        self._heap: list[_Entry] = []
        self._version: dict[tuple, int] = {}
        self._seq = 0

    def __len__(self) -> int:
        return sum(1 for e in self._heap if self._live(e))

    def _live(self, e: _Entry) -> bool:
        return self._version.get(e.key) == e.version

    def push(self, key: tuple, time: EventTime, kind: str, ids: tuple) -> None:
        v = self._version.get(key, 0) + 1
        self._version[key] = v
        self._seq += 1
        heapq.heappush(self._heap, _Entry(time, KIND_RANK[kind], ids, self._seq, key, v))

    def discard(self, key: tuple) -> None:
        if key in self._version:
            self._version[key] += 1

    def peek(self) -> Optional[_Entry]:
        while self._heap and not self._live(self._heap[0]):
            heapq.heappop(self._heap)
        return self._heap[0] if self._heap else None

    def pop(self) -> Optional[_Entry]:
        e = self.peek()
        if e is not None:
            heapq.heappop(self._heap)
            self._version[e.key] += 1
        return e

    def entries(self) -> list[_Entry]:
        return [e for e in self._heap if self._live(e)]


def _edge(u: int, w: int) -> tuple[int, int]:
    return (u, w) if u < w else (w, u)


class KineticState:
    """Both pseudo-triangulations, their certificates and the event queue."""

    def __init__(self, scenario: Scenario, priorities: PriorityAssignment, t0=None, t_end=None,
                 paranoid: bool = False, process_even: bool = False):
        self.scenario = scenario
        self.priorities = priorities
        self.prio = priorities.__getitem__
        self.now = as_time(scenario.window[0] if t0 is None else t0)
        self.t_end = Fraction(scenario.window[1] if t_end is None else t_end)
        self.paranoid = paranoid
        self.process_even = process_even
        self.queue = EventQueue()
        self.certs: dict[tuple, Certificate] = {}
        self.by_point: dict[int, set] = defaultdict(set)
        self.cv_keys: dict[tuple, set] = defaultdict(set)
        self.log: list[EventRecord] = []
        self.counters: Counter = Counter()
        self.edges: Counter = Counter()
        self._contrib: dict[tuple, set] = {}
        self._touched: Optional[dict] = None
        self.hooks: list[Callable[["KineticState", EventRecord], None]] = []
        frame = Frame(scenario, self.now, after=True)
        order = sort_by_x(scenario, frame)
        self.init_comparisons = frame.count
        self.trees = {}
        for side in SIDES:
            tree = PTTree(side, priorities, list(order), paranoid=paranoid)
            tree.build(frame)
            self.trees[side] = tree
        self.piece = [self._piece_after(tr, self.now) for tr in scenario.points]
        self.init_comparisons = frame.count
        self._set_contrib(("chain",), {_edge(p, q) for p, q in zip(order, order[1:])})
        for k in range(len(order) - 1):
            self._ct_cert(order[k], order[k + 1])
        for side in SIDES:
            for v in self.trees[side].nodes.values():
                self._refresh_node(side, v)
        self._schedule_breakpoints()

    # ------------------------------------------------------------------ helpers
    @property
    def order(self) -> list[int]:
        return self.trees[Side.UPPER].order

    @staticmethod
    def _piece_after(tr, t: EventTime) -> int:
        for i, p in enumerate(tr.pieces[:-1]):
            if t.compare_rational(p.hi) == LT:
                return i
        return len(tr.pieces) - 1

    def _homog(self, pid: int):
        return self.scenario.points[pid].pieces[self.piece[pid]].homogeneous

    def _poly(self, ids: tuple):
        if len(ids) == 2:
            return xdiff_ipoly(self._homog(ids[0]), self._homog(ids[1]))
        return orient_ipoly(*(self._homog(i) for i in ids))

    def _horizon(self, ids: Iterable[int]) -> Fraction:
        h = self.t_end
        for pid in ids:
            pieces = self.scenario.points[pid].pieces
            i = self.piece[pid]
            if i < len(pieces) - 1 and pieces[i].hi < h:
                h = pieces[i].hi
        return h

    def _set_contrib(self, src: tuple, edges: set) -> None:
        old = self._contrib.get(src, set())
        if old == edges:
            return
        touched = self._touched
        for e in old - edges:
            if touched is not None and e not in touched:
                touched[e] = self.edges[e] > 0
            self.edges[e] -= 1
            if not self.edges[e]:
                del self.edges[e]
        for e in edges - old:
            if touched is not None and e not in touched:
                touched[e] = self.edges[e] > 0
            self.edges[e] += 1
        if edges:
            self._contrib[src] = edges
        else:
            self._contrib.pop(src, None)

    # ------------------------------------------------------------------ certificates
    def _failure(self, cons: tuple, ids: tuple) -> Optional[EventTime]:
        horizon = self._horizon(ids)
        now = self.now
        best = None
        for pts, sign in cons:
            g = self._poly(pts)
            if not g:
                continue
            for r in ipoly_roots(g, now.lo, horizon):
                if r.parity == "even" and not self.process_even:
                    continue
                if compare_times(r, now) != GT or r.compare_rational(horizon) != LT:
                    continue
                if best is None or compare_times(r, best) == LT:
                    best = r
                break
        return best

    def _install(self, kind: str, key: tuple, cons: tuple) -> None:
        pts = tuple(sorted({p for ids, _ in cons for p in ids}))
        old = self.certs.get(key)
        if old is not None and old.constituents == cons:
            return
        if old is not None:
            self._remove(key)
        cert = Certificate(kind, key, pts, cons)
        cert.failure = self._failure(cons, pts)
        self.certs[key] = cert
        for p in pts:
            self.by_point[p].add(key)
        if cert.failure is not None:
            self.queue.push(key, cert.failure, kind, pts)

    def _remove(self, key: tuple) -> None:
        cert = self.certs.pop(key, None)
        if cert is None:
            return
        for p in cert.points:
            self.by_point[p].discard(key)
        self.queue.discard(key)

    def _ct_cert(self, p: int, q: int) -> None:
        self._install("CT", ("CT", p, q), (((p, q), 1),))

    @staticmethod
    def _raw(side: Side, s: int) -> int:
        return s if side is Side.UPPER else -s

    def _ce_constituents(self, side: Side, v: PTNode) -> tuple:
        UL, UR, f = v.ul, v.ur, v.funnel
        if f.is_empty:
            if len(UL) < 2 or len(UR) < 2:
                return ()
            return (((UL[-2], v.apex, UR[1]), self._raw(side, -1)),)
        p, q = f.S[0], f.S[-1]
        i, j = UL.index(p), UR.index(q)
        nbrs = []
        for lst, k in ((UL, i - 1), (UL, i + 1), (UR, j - 1), (UR, j + 1)):
            if 0 <= k < len(lst) and lst[k] not in (p, q) and lst[k] not in nbrs:
                nbrs.append(lst[k])
        return tuple(((p, q, n), self._raw(side, -1)) for n in nbrs)

    def _cv_constituents(self, side: Side, f, x: int) -> tuple:
        S, a = f.S, f.a
        k, r = f.pos[x], f.pos[f.nu[x]]
        cons = []
        if k < a:
            if r < len(S) - 1:
                cons.append(((x, S[r], S[r + 1]), self._raw(side, -1)))
            if r > a:
                cons.append(((x, S[r - 1], S[r]), self._raw(side, 1)))
        else:
            if r > 0:
                cons.append(((x, S[r], S[r - 1]), self._raw(side, 1)))
            if r < a:
                cons.append(((x, S[r + 1], S[r]), self._raw(side, -1)))
        return tuple(cons)

    @staticmethod
    def cv_watchers(f) -> list[int]:
        """Watchers keeping a certificate: per target and chain, the two extreme ones."""
        groups: dict[tuple, list[int]] = defaultdict(list)
        for x, w in f.nu.items():
            groups[(w, f.pos[x] < f.a)].append(f.pos[x])
        keep = set()
        for idx in groups.values():
            keep.add(min(idx))
            keep.add(max(idx))
        return [f.S[i] for i in sorted(keep)]

    def _refresh_node(self, side: Side, v: PTNode) -> None:
        f = v.funnel
        self._set_contrib(("F", side, v.apex),
                          set() if f.is_empty else {_edge(*f.bridge)} | {_edge(*c) for c in f.chords})
        cons = self._ce_constituents(side, v)
        key = ("CE", side.value, v.apex)
        if cons:
            self._install("CE", key, cons)
        else:
            self._remove(key)
        owner = (side.value, v.apex)
        new_keys = set()
        if not f.is_empty:
            for x in self.cv_watchers(f):
                key = ("CV", side.value, v.apex, x)
                new_keys.add(key)
                self._install("CV", key, self._cv_constituents(side, f, x))
        for key in self.cv_keys[owner] - new_keys:
            self._remove(key)
        self.cv_keys[owner] = new_keys

    def _schedule_breakpoints(self) -> None:
        at: dict[Fraction, list[int]] = defaultdict(list)
        for pid, tr in enumerate(self.scenario.points):
            for b in tr.breakpoints():
                if self.now.compare_rational(b) == LT and b < self.t_end:
                    at[b].append(pid)
        for b, pids in at.items():
            self.queue.push(("BP", b), EventTime.rational(b), "BP", tuple(pids))

    # ------------------------------------------------------------------ evaluation
    def holds(self, cert: Certificate, frame: Frame) -> bool:
        return all(frame.sign(self._poly_frame(frame, pts)) == s for pts, s in cert.constituents)

    @staticmethod
    def _poly_frame(frame: Frame, ids: tuple):
        if len(ids) == 2:
            return xdiff_ipoly(frame.homog(ids[0]), frame.homog(ids[1]))
        return orient_ipoly(*(frame.homog(i) for i in ids))

    # ------------------------------------------------------------------ event loop
    def advance(self, t_end=None) -> list[EventRecord]:
        """Process all events strictly before t_end (default: end of the window)."""
        stop = self.t_end if t_end is None else min(Fraction(t_end), self.t_end)
        start = len(self.log)
        while True:
            head = self.queue.peek()
            if head is None or head.time.compare_rational(stop) != LT:
                break
            alpha = head.time
            self.now = alpha
            frame = Frame(self.scenario, alpha, after=True)
            while True:
                due = []
                while True:
                    e = self.queue.peek()
                    if e is None or compare_times(e.time, alpha) != EQ:
                        break
                    due.append(self.queue.pop())
                if not due:
                    break
                best = min(due, key=self._tie_key)
                for e in due:
                    if e is not best:
                        self.queue.push(e.key, e.time, e.key[0], e.ids)
                self._dispatch(best, frame)
        if self.now.compare_rational(stop) == LT:
            self.now = EventTime.rational(stop)
        return self.log[start:]

    def _tie_key(self, e: _Entry):
        if e.key[0] == "CE":
            node = self.trees[Side(e.key[1])].nodes[e.key[2]]
            return (e.rank, -self.trees[Side(e.key[1])].depth(node), e.ids)
        return (e.rank, 0, e.ids)

    def _dispatch(self, e: _Entry, frame: Frame) -> None:
        kind = e.key[0]
        if kind == "BP":
            self.handle_bp(e.key[1], e.ids, frame)
            return
        cert = self.certs.get(e.key)
        if cert is None:
            return
        if self.holds(cert, frame):
            raise QueueInconsistencyError(f"certificate {e.key} holds just after {e.time!r}")
        t0 = _clock.perf_counter_ns()
        self._touched = {}
        if kind == "CT":
            rem, add, side = self.handle_ct(cert, frame)
        elif kind == "CE":
            rem, add, side = self.handle_ce(cert, frame)
        else:
            rem, add, side = self.handle_cv(cert, frame)
        changes = sum(1 for edge, was in self._touched.items() if (edge in self.edges) != was)
        self._touched = None
        rec = EventRecord(e.time, kind, cert.points, side, rem, add, changes,
                          _clock.perf_counter_ns() - t0)
        self.log.append(rec)
        self.counters[f"events_{kind}"] += 1
        self.counters["changes"] += changes
        self.counters["chords_removed"] += rem
        self.counters["chords_added"] += add
        for hook in self.hooks:
            hook(self, rec)

    def _apply_logs(self, side: Side, log: dict) -> tuple[int, int]:
        tree = self.trees[side]
        rem = add = 0
        for apex, (r, a) in log.items():
            rem += len(r)
            add += len(a)
            self._refresh_node(side, tree.nodes[apex])
        return rem, add

    def handle_ct(self, cert: Certificate, frame: Frame) -> tuple[int, int, str]:
        p, q = cert.key[1], cert.key[2]
        order = self.order
        k = self.trees[Side.UPPER].pos[p]
        assert order[k + 1] == q
        left = order[k - 1] if k > 0 else None
        right = order[k + 2] if k + 2 < len(order) else None
        rem = add = 0
        for side in SIDES:
            log: dict = {}
            self.trees[side].swap(k, frame, log)
            r, a = self._apply_logs(side, log)
            rem, add = rem + r, add + a
        for key in (("CT", left, p), ("CT", p, q), ("CT", q, right)):
            self._remove(key)
        order = self.order
        for i in range(max(k - 1, 0), min(k + 2, len(order) - 1)):
            self._ct_cert(order[i], order[i + 1])
        self._set_contrib(("chain",), {_edge(a, b) for a, b in zip(order, order[1:])})
        return rem, add, "both"

    def handle_ce(self, cert: Certificate, frame: Frame) -> tuple[int, int, str]:
        side = Side(cert.key[1])
        tree = self.trees[side]
        log: dict = {}
        tree.propagate([tree.nodes[cert.key[2]]], tree.geo(frame), log)
        rem, add = self._apply_logs(side, log)
        return rem, add, side.value

    def handle_cv(self, cert: Certificate, frame: Frame) -> tuple[int, int, str]:
        side = Side(cert.key[1])
        tree = self.trees[side]
        v = tree.nodes[cert.key[2]]
        r, a, local = update_visibility(v.funnel, tree.prio, tree.geo(frame), self.paranoid)
        if local:
            tree.local_repairs += 1
        else:
            tree.full_repairs += 1
        rem, add = self._apply_logs(side, {v.apex: (r, a)})
        return rem, add, side.value

    def handle_bp(self, b: Fraction, pids: tuple, frame: Frame) -> None:
        self.counters["events_BP"] += 1
        for pid in pids:
            self.piece[pid] = self._piece_after(self.scenario.points[pid], self.now)
        keys = set()
        for pid in pids:
            keys |= self.by_point[pid]
        for key in sorted(keys, key=repr):
            cert = self.certs[key]
            self.queue.discard(key)
            if not self.holds(cert, frame):
                cert.failure = self.now
            else:
                cert.failure = self._failure(cert.constituents, cert.points)
            if cert.failure is not None:
                self.queue.push(key, cert.failure, cert.kind, cert.points)

    # ------------------------------------------------------------------ views
    def extract_triangles(self) -> TriangulationSnapshot:
        up = self.trees[Side.UPPER].triangles()
        lo = self.trees[Side.LOWER].triangles()
        hu = self.trees[Side.UPPER].upper_hull()
        hl = self.trees[Side.LOWER].upper_hull()
        return TriangulationSnapshot(canonical(up + lo), hu + hl[-2:0:-1], self.now,
                                     canonical(up), canonical(lo))

    def census(self) -> dict:
        """Certificate counts per point and kind, per-funnel CV involvement, and storage totals."""
        per_point: dict[int, Counter] = {p: Counter() for p in range(self.scenario.n)}
        for cert in self.certs.values():
            for p in cert.points:
                per_point[p][cert.kind] += 1
        storage = Counter()
        for tree in self.trees.values():
            storage.update(tree.storage())
        storage["certificates"] = len(self.certs)
        return {
            "per_point": per_point,
            "max_ct": max((c["CT"] for c in per_point.values()), default=0),
            "max_cv_per_funnel": self.max_cv_per_funnel(),
            "storage": dict(storage),
            "storage_total": sum(storage.values()),
            "kinds": Counter(c.kind for c in self.certs.values()),
        }

    def max_cv_per_funnel(self) -> int:
        """Most CV certificates any point takes part in within one funnel, as watcher or target."""
        cv_funnel: Counter = Counter()
        for keys in self.cv_keys.values():
            for key in keys:
                side, apex, x = key[1], key[2], key[3]
                f = self.trees[Side(side)].nodes[apex].funnel
                cv_funnel[(side, apex, x)] += 1
                cv_funnel[(side, apex, f.nu[x])] += 1
        return max(cv_funnel.values(), default=0)

    def violated(self, frame: Optional[Frame] = None) -> list[tuple]:
        """Certificates whose predicate fails at the frame (default: just after now)."""
        frame = frame or Frame(self.scenario, self.now, after=True)
        return [k for k, c in self.certs.items() if not self.holds(c, frame)]


def init(scenario: Scenario, priorities: PriorityAssignment, t0=None, **kw) -> KineticState:
    return KineticState(scenario, priorities, t0, **kw)


def advance(state: KineticState, t_end=None) -> list[EventRecord]:
    return state.advance(t_end)


def census(state: KineticState) -> dict:
    return state.census()


def extract_triangles(state: KineticState) -> TriangulationSnapshot:
    return state.extract_triangles()


LOG_FIELDS = ("time", "exact", "kind", "side", "points", "chords_removed", "chords_added",
              "changes", "wall_ns")


def log_csv(records: Iterable[EventRecord], digits: int = 12, wall: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_FIELDS)
    for r in records:
        exact = r.time.exact
        w.writerow([r.time.decimal(digits), "1" if exact is not None else "0", r.kind, r.side,
                    " ".join(map(str, r.points)), r.chords_removed, r.chords_added, r.changes,
                    r.wall_ns if wall else 0])
    return buf.getvalue()
