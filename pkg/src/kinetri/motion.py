"""Point trajectories, scenarios, scenario files and random priorities."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Optional, Sequence

import numpy as np

from .poly import Polynomial

SENT_L = -1  # p_{-inf}: left of and below everything
SENT_R = -2  # p_{+inf}: right of and below everything
SENTINELS = (SENT_L, SENT_R)

GRID_BITS = 30
JITTER = Fraction(1, 10**9)


class OutOfRangeError(ValueError):
    pass


class DegeneracyError(ValueError):
    pass


class ScenarioParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


def is_sentinel(pid: int) -> bool:
    return pid < 0


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    x: Polynomial
    y: Polynomial

    @cached_property
    def homogeneous(self) -> tuple[int, tuple, tuple]:
        """(d, X, Y) with integer coefficient tuples so that x(t) = X(t)/d, y(t) = Y(t)/d, d > 0."""
        d = 1
        for c in self.x.coeffs + self.y.coeffs:
            d = d * c.denominator // gcd(d, c.denominator)
        return d, tuple(int(c * d) for c in self.x.coeffs), tuple(int(c * d) for c in self.y.coeffs)


@dataclass(frozen=True)
class Trajectory:
    pieces: tuple[Piece, ...]

    @classmethod
    def static(cls, x, y, window) -> "Trajectory":
        lo, hi = map(Fraction, window)
        return cls((Piece(lo, hi, Polynomial([x]), Polynomial([y])),))

    @classmethod
    def linear(cls, x0, y0, vx, vy, window) -> "Trajectory":
        lo, hi = map(Fraction, window)
        return cls((Piece(lo, hi, Polynomial([x0, vx]), Polynomial([y0, vy])),))

    @property
    def degree(self) -> int:
        return max(max(p.x.degree, p.y.degree) for p in self.pieces)

    @property
    def window(self) -> tuple[Fraction, Fraction]:
        return self.pieces[0].lo, self.pieces[-1].hi

    def piece_index(self, t) -> int:
        """Index of the piece whose half-open interval [lo, hi) holds t (the last piece is closed)."""
        lo, hi = self.window
        if t < lo or t > hi:
            raise OutOfRangeError(f"time {t} outside [{lo}, {hi}]")
        for i, p in enumerate(self.pieces):
            if t < p.hi:
                return i
        return len(self.pieces) - 1

    def breakpoints(self) -> list[Fraction]:
        return [p.hi for p in self.pieces[:-1]]


def eval_traj(traj: Trajectory, t) -> tuple[Fraction, Fraction]:
    p = traj.pieces[traj.piece_index(Fraction(t))]
    return p.x(t), p.y(t)


@dataclass(frozen=True)
class Scenario:
    points: tuple[Trajectory, ...]
    window: tuple[Fraction, Fraction]
    seed: int = 0
    label: str = ""

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def degree(self) -> int:
        return max(tr.degree for tr in self.points)

    def positions(self, t) -> list[tuple[Fraction, Fraction]]:
        return [eval_traj(tr, t) for tr in self.points]


def validate_scenario(sc: Scenario) -> None:
    if sc.n < 2:
        raise ValueError("a scenario needs at least two points")
    t0, t1 = sc.window
    if not t0 < t1:
        raise ValueError("empty window")
    for i, tr in enumerate(sc.points):
        if not tr.pieces:
            raise ValueError(f"point {i} has no pieces")
        if tr.pieces[0].lo != t0 or tr.pieces[-1].hi != t1:
            raise ValueError(f"point {i}: pieces do not cover the window")
        for a, b in zip(tr.pieces, tr.pieces[1:]):
            if a.hi != b.lo:
                raise ValueError(f"point {i}: pieces not contiguous at {a.hi}")
            if a.x(a.hi) != b.x(b.lo) or a.y(a.hi) != b.y(b.lo):
                raise ValueError(f"point {i}: trajectory jumps at {a.hi}")
        for p in tr.pieces:
            if not p.lo < p.hi:
                raise ValueError(f"point {i}: empty piece")


@dataclass(frozen=True)
class PriorityAssignment:
    ranks: tuple[int, ...]  # ranks[i] = priority of point i, a permutation of 1..n

    def __post_init__(self):
        if sorted(self.ranks) != list(range(1, len(self.ranks) + 1)):
            raise ValueError("ranks must be a permutation of 1..n")

    def __getitem__(self, pid: int) -> int:
        if pid == SENT_L:
            return -1
        if pid == SENT_R:
            return 0
        return self.ranks[pid]

    def __len__(self) -> int:
        return len(self.ranks)

    def as_dict(self) -> dict[int, int]:
        return {i: r for i, r in enumerate(self.ranks)}


def draw_priorities(n: int, seed: int) -> PriorityAssignment:
    """Uniform random permutation of ranks 1..n from a seeded Fisher-Yates shuffle."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(f"priorities:{seed}")
    ranks = list(range(1, n + 1))
    for i in range(n - 1, 0, -1):
        j = rng.randint(0, i)
        ranks[i], ranks[j] = ranks[j], ranks[i]
    return PriorityAssignment(tuple(ranks))


# ---------------------------------------------------------------- degeneracy

def _integer_coords(pts: Sequence[tuple[Fraction, Fraction]]) -> list[tuple[int, int]]:
    d = 1
    for x, y in pts:
        for c in (Fraction(x), Fraction(y)):
            d = d * c.denominator // gcd(d, c.denominator)
    return [(int(x * d), int(y * d)) for x, y in pts]


EXHAUSTIVE_LIMIT = 4096


def find_degeneracy(pts: Sequence[tuple[Fraction, Fraction]],
                    limit: Optional[int] = EXHAUSTIVE_LIMIT) -> Optional[tuple]:
    """Return a witness (pair with equal x, or collinear triple) or None.

    Collinearity is found per point by hashing reduced directions to later points,
    which is exact and O(n^2).  Above ``limit`` points only the x test runs; exact
    predicates still raise on any collinearity the construction actually meets.
    """
    ip = _integer_coords(pts)
    n = len(ip)
    xs = sorted(range(n), key=lambda i: ip[i][0])
    for a, b in zip(xs, xs[1:]):
        if ip[a][0] == ip[b][0]:
            return ("equal-x", a, b)
    if limit is not None and n > limit:
        return None
    big = max((max(abs(x), abs(y)) for x, y in ip), default=0)
    if big < 2**61:
        arr = np.array(ip, dtype=np.int64)
        for i in range(n - 2):
            d = arr[i + 1:] - arr[i]
            g = np.gcd(d[:, 0], d[:, 1])
            d = d // g[:, None]
            flip = (d[:, 0] < 0) | ((d[:, 0] == 0) & (d[:, 1] < 0))
            d[flip] *= -1
            order = np.lexsort((d[:, 1], d[:, 0]))
            ds = d[order]
            dup = np.nonzero((ds[1:] == ds[:-1]).all(axis=1))[0]
            if len(dup):
                a, b = sorted((int(order[dup[0]]), int(order[dup[0] + 1])))
                return ("collinear", i, a + i + 1, b + i + 1)
        return None
    for i in range(n - 2):
        seen = {}
        for j in range(i + 1, n):
            dx, dy = ip[j][0] - ip[i][0], ip[j][1] - ip[i][1]
            g = gcd(dx, dy)
            dx, dy = dx // g, dy // g
            if dx < 0 or (dx == 0 and dy < 0):
                dx, dy = -dx, -dy
            if (dx, dy) in seen:
                return ("collinear", i, seen[(dx, dy)], j)
            seen[(dx, dy)] = j
    return None


def _jitter(sc: Scenario, rng: random.Random) -> Scenario:
    scale = 2**40
    bound = int(JITTER * scale)
    pts = []
    for tr in sc.points:
        dx = Fraction(rng.randint(-bound, bound), scale)
        dy = Fraction(rng.randint(-bound, bound), scale)
        shift_x, shift_y = Polynomial([dx]), Polynomial([dy])
        pts.append(Trajectory(tuple(Piece(p.lo, p.hi, p.x + shift_x, p.y + shift_y) for p in tr.pieces)))
    return Scenario(tuple(pts), sc.window, sc.seed, sc.label)


def apply_degeneracy_policy(sc: Scenario, strict: bool = False, tries: int = 8) -> Scenario:
    """Reject (strict) or perturb a scenario that is degenerate at the window start."""
    witness = find_degeneracy(sc.positions(sc.window[0]))
    if witness is None:
        return sc
    if strict:
        raise DegeneracyError(f"degenerate initial configuration: {witness}")
    rng = random.Random(f"jitter:{sc.seed}")
    for _ in range(tries):
        cand = _jitter(sc, rng)
        if find_degeneracy(cand.positions(sc.window[0])) is None:
            return cand
    raise DegeneracyError(f"could not perturb away degeneracy {witness}")


# ---------------------------------------------------------------- generation

MODELS = ("static", "linear", "quadratic")


def gen_random_scenario(n: int, seed: int, model: str = "linear", window=(0, 1),
                        strict: bool = False) -> Scenario:
    if n < 2:
        raise ValueError("n must be at least 2")
    if model not in MODELS:
        raise ValueError(f"unsupported motion model {model!r}")
    rng = random.Random(seed)
    scale = 2**GRID_BITS
    t0, t1 = Fraction(window[0]), Fraction(window[1])

    def unit():
        return Fraction(rng.randint(0, scale), scale)

    def signed():
        return Fraction(rng.randint(-scale, scale), scale)

    pos = [(unit(), unit()) for _ in range(n)]
    vel = [(signed(), signed()) for _ in range(n)] if model != "static" else [(0, 0)] * n
    acc = [(signed(), signed()) for _ in range(n)] if model == "quadratic" else [(0, 0)] * n
    pts = []
    for (x, y), (vx, vy), (ax, ay) in zip(pos, vel, acc):
        pts.append(Trajectory((Piece(t0, t1, Polynomial([x, vx, ax]), Polynomial([y, vy, ay])),)))
    sc = Scenario(tuple(pts), (t0, t1), seed, f"random-{model}-n{n}-s{seed}")
    return apply_degeneracy_policy(sc, strict=strict)


# ---------------------------------------------------------------- file format

def _fmt(q: Fraction):
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _parse_rational(v, path: str) -> Fraction:
    if isinstance(v, bool):
        raise ScenarioParseError("expected a rational", field=path)
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            num, _, den = v.partition("/")
            return Fraction(int(num), int(den)) if den else Fraction(int(num))
        except (ValueError, ZeroDivisionError):
            pass
    raise ScenarioParseError(f"expected an integer or 'p/q', got {v!r}", field=path)


def save_scenario(sc: Scenario) -> bytes:
    doc = {
        "n": sc.n,
        "window": [_fmt(sc.window[0]), _fmt(sc.window[1])],
        "seed": sc.seed,
        "label": sc.label,
        "points": [
            {"pieces": [
                {"interval": [_fmt(p.lo), _fmt(p.hi)],
                 "x": [_fmt(c) for c in p.x.coeffs] or [0],
                 "y": [_fmt(c) for c in p.y.coeffs] or [0]}
                for p in tr.pieces]}
            for tr in sc.points],
    }
    return (json.dumps(doc, indent=1, ensure_ascii=False) + "\n").encode("utf-8")


def _field_line(text: str, key: str) -> Optional[int]:
    idx = text.find(f'"{key}"')
    return text.count("\n", 0, idx) + 1 if idx >= 0 else None


def load_scenario(data, strict: bool = False) -> Scenario:
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else str(data)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ScenarioParseError("top level must be an object", line=1)
    for key in ("n", "window", "points"):
        if key not in doc:
            raise ScenarioParseError(f"missing field {key!r}", field=key)
    window = doc["window"]
    if not isinstance(window, list) or len(window) != 2:
        raise ScenarioParseError("window must be [t0, t1]", line=_field_line(text, "window"), field="window")
    t0, t1 = (_parse_rational(v, f"window[{i}]") for i, v in enumerate(window))
    raw_points = doc["points"]
    if not isinstance(raw_points, list):
        raise ScenarioParseError("points must be a list", line=_field_line(text, "points"), field="points")
    if doc["n"] != len(raw_points):
        raise ScenarioParseError(f"n={doc['n']} but {len(raw_points)} points listed",
                                 line=_field_line(text, "n"), field="n")
    pts = []
    for i, rp in enumerate(raw_points):
        pieces = []
        if not isinstance(rp, dict) or not isinstance(rp.get("pieces"), list):
            raise ScenarioParseError("point needs a 'pieces' list", field=f"points[{i}]")
        for j, rpc in enumerate(rp["pieces"]):
            path = f"points[{i}].pieces[{j}]"
            try:
                lo, hi = (_parse_rational(v, f"{path}.interval[{k}]") for k, v in enumerate(rpc["interval"]))
                xs = [_parse_rational(v, f"{path}.x[{k}]") for k, v in enumerate(rpc["x"])]
                ys = [_parse_rational(v, f"{path}.y[{k}]") for k, v in enumerate(rpc["y"])]
            except (KeyError, TypeError):
                raise ScenarioParseError("piece needs interval, x, y", field=path) from None
            pieces.append(Piece(lo, hi, Polynomial(xs), Polynomial(ys)))
        pts.append(Trajectory(tuple(pieces)))
    sc = Scenario(tuple(pts), (t0, t1), int(doc.get("seed", 0)), str(doc.get("label", "")))
    try:
        validate_scenario(sc)
    except ValueError as exc:
        raise ScenarioParseError(str(exc), field="points") from None
    return apply_degeneracy_policy(sc, strict=strict)
