"""Command-line harness: run, verify, scale and census modes.

    python -m kinetri --gen 32,1,linear --mode run --out out/
    python -m kinetri --scenario s.json --mode verify --samples 50
    python -m kinetri --gen 0,0,linear --mode scale --sizes 32,64,128 --seeds 0,1,2 --window 0,1/20
"""

from __future__ import annotations

import argparse
import math
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .kds import KineticState, log_csv
from .kernel import EventTime, compare_times, rational_between
from .motion import (DegeneracyError, Scenario, draw_priorities, gen_random_scenario, load_scenario,
                     save_scenario)
from .oracle import candidate_times, equivalent, static_snapshot

MODES = ("run", "verify", "scale", "census")


@dataclass
class RunConfig:
    mode: str = "run"
    scenario_file: Optional[str] = None
    gen: Optional[tuple[int, int, str]] = None
    priority_seed: int = 0
    window: Optional[tuple[Fraction, Fraction]] = None
    samples: int = 20
    sizes: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    out: Optional[str] = None
    strict_degeneracy: bool = False
    digits: int = 12

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "scale":
            if not self.sizes:
                raise ValueError("scale mode needs --sizes")
            if self.gen is None:
                raise ValueError("scale mode needs --gen for the motion model")
        elif (self.scenario_file is None) == (self.gen is None):
            raise ValueError("give exactly one of --scenario and --gen")


@dataclass
class RunStats:
    n: int
    seeds: list[int]
    events: dict[str, int]
    chords_removed: int
    chords_added: int
    changes: int
    mean_changes_per_event: float
    max_changes_per_event: int
    wall_time_s: float
    max_ct_per_point: int
    max_cv_per_funnel: int
    storage_total: int
    mean_certificates_per_point: float

    def lines(self) -> list[str]:
        out = [f"n={self.n}", f"seeds={','.join(map(str, self.seeds))}"]
        for k in ("CT", "CE", "CV"):
            out.append(f"events_{k}={self.events.get(k, 0)}")
        out.append(f"events_total={sum(self.events.get(k, 0) for k in ('CT', 'CE', 'CV'))}")
        out += [f"chords_removed={self.chords_removed}", f"chords_added={self.chords_added}",
                f"changes_total={self.changes}",
                f"mean_changes_per_event={self.mean_changes_per_event:.6g}",
                f"max_changes_per_event={self.max_changes_per_event}",
                f"wall_time_s={self.wall_time_s:.3f}",
                f"max_ct_per_point={self.max_ct_per_point}",
                f"max_cv_per_funnel={self.max_cv_per_funnel}",
                f"storage_total={self.storage_total}",
                f"mean_certificates_per_point={self.mean_certificates_per_point:.6g}"]
        return out


# ---------------------------------------------------------------- helpers

def _rational(text: str) -> Fraction:
    return Fraction(text.strip())


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ap = argparse.ArgumentParser(prog="kinetri", description="Kinetic treap pseudo-triangulation harness")
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--scenario", metavar="FILE")
    src.add_argument("--gen", metavar="n,seed,model")
    ap.add_argument("--priority-seed", type=int, default=0, metavar="K")
    ap.add_argument("--window", metavar="a,b")
    ap.add_argument("--samples", type=int, default=20, metavar="S")
    ap.add_argument("--mode", choices=MODES, default="run")
    ap.add_argument("--sizes", metavar="LIST", default="")
    ap.add_argument("--seeds", metavar="LIST", default="0")
    ap.add_argument("--out", metavar="DIR")
    ap.add_argument("--strict-degeneracy", action="store_true")
    a = ap.parse_args(argv)
    gen = None
    if a.gen:
        parts = a.gen.split(",")
        if len(parts) != 3:
            ap.error("--gen expects n,seed,model")
        gen = (int(parts[0]), int(parts[1]), parts[2])
    window = None
    if a.window:
        lo, hi = a.window.split(",")
        window = (_rational(lo), _rational(hi))
    cfg = RunConfig(mode=a.mode, scenario_file=a.scenario, gen=gen, priority_seed=a.priority_seed,
                    window=window, samples=a.samples,
                    sizes=[int(s) for s in a.sizes.split(",") if s.strip()],
                    seeds=[int(s) for s in a.seeds.split(",") if s.strip()],
                    out=a.out, strict_degeneracy=a.strict_degeneracy)
    try:
        cfg.validate()
    except ValueError as e:
        ap.error(str(e))
    return cfg


def load_config_scenario(cfg: RunConfig, n: Optional[int] = None, seed: Optional[int] = None) -> Scenario:
    if cfg.scenario_file is not None:
        sc = load_scenario(Path(cfg.scenario_file).read_bytes(), strict=cfg.strict_degeneracy)
        if cfg.window is not None:
            sc = Scenario(sc.points, cfg.window, sc.seed, sc.label)
        return sc
    gn, gs, model = cfg.gen
    window = cfg.window if cfg.window is not None else (0, 1)
    return gen_random_scenario(gn if n is None else n, gs if seed is None else seed, model,
                               window=window, strict=cfg.strict_degeneracy)


def collect_stats(states: Sequence[KineticState], seeds: Sequence[int], wall: float) -> RunStats:
    events = {k: 0 for k in ("CT", "CE", "CV")}
    rem = add = changes = 0
    per_event = []
    max_ct = max_cv = storage = 0
    certs = 0
    n = states[0].scenario.n
    for st in states:
        for r in st.log:
            events[r.kind] += 1
            rem += r.chords_removed
            add += r.chords_added
            changes += r.changes
            per_event.append(r.changes)
        c = st.census()
        max_ct = max(max_ct, c["max_ct"])
        max_cv = max(max_cv, c["max_cv_per_funnel"])
        storage += c["storage_total"]
        certs += sum(sum(v.values()) for v in c["per_point"].values())
    k = len(states)
    return RunStats(n, list(seeds), events, rem, add, changes,
                    (sum(per_event) / len(per_event)) if per_event else 0.0,
                    max(per_event, default=0), wall, max_ct, max_cv, storage // k,
                    certs / (k * n))


def _write(out: Optional[str], name: str, text: str) -> None:
    if out is None:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text, encoding="utf-8")


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log y against log x; None when it is undefined."""
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len({x for x, _ in pts}) < 2:
        return None
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    return float(np.polyfit(lx, ly, 1)[0])


# ---------------------------------------------------------------- commands

def cmd_run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    sc = load_config_scenario(cfg)
    pr = draw_priorities(sc.n, cfg.priority_seed)
    t0 = time.perf_counter()
    try:
        st = KineticState(sc, pr)
        st.advance()
    except Exception as e:  # self-check failures and handler errors
        print(f"error: {type(e).__name__}: {e}", file=out)
        return 2
    stats = collect_stats([st], [cfg.priority_seed], time.perf_counter() - t0)
    _write(cfg.out, "events.csv", log_csv(st.log, cfg.digits))
    _write(cfg.out, "stats.txt", "\n".join(stats.lines()) + "\n")
    print("\n".join(stats.lines()), file=out)
    return 0


@dataclass
class Mismatch:
    time: Fraction
    kind: str
    detail: str


def sample_times(sc: Scenario, count: int, seed: int) -> list[Fraction]:
    rng = random.Random(f"samples:{seed}")
    lo, hi = sc.window
    den = 1 << 40
    return sorted({lo + (hi - lo) * Fraction(rng.randint(1, den - 1), den) for _ in range(count)})


def verify_scenario(sc: Scenario, priority_seed: int, samples: int,
                    state_factory: Callable = KineticState) -> list[Mismatch]:
    """Kinetic structure against the static reference at sample times (and candidate gaps for n <= 10)."""
    pr = draw_priorities(sc.n, priority_seed)
    st = state_factory(sc, pr)
    bad: list[Mismatch] = []
    checks = [(t, "sample") for t in sample_times(sc, samples, priority_seed)]
    if sc.n <= 10:
        cands = candidate_times(sc, sc.window)
        bounds = [EventTime.rational(sc.window[0])] + cands + [EventTime.rational(sc.window[1])]
        for e1, e2 in zip(bounds, bounds[1:]):
            if compare_times(e1, e2) >= 0:
                continue
            m = rational_between(e1, e2)
            a = rational_between(e1, EventTime.rational(m))
            b = rational_between(EventTime.rational(m), e2)
            snaps = [static_snapshot(sc, pr, t) for t in (a, m, b)]
            if not (equivalent(snaps[0], snaps[1]) and equivalent(snaps[1], snaps[2])):
                bad.append(Mismatch(m, "gap", "static snapshots differ inside one candidate gap"))
            checks.append((m, "gap"))
        checks.sort()
    for t, kind in checks:
        try:
            st.advance(t)
            ref = static_snapshot(sc, pr, t)
        except DegeneracyError:
            continue
        got = st.extract_triangles()
        if not equivalent(got, ref):
            extra = sorted(set(got.triangles) - set(ref.triangles))
            missing = sorted(set(ref.triangles) - set(got.triangles))
            bad.append(Mismatch(t, kind, f"extra={extra} missing={missing}"))
    return bad


def cmd_verify(cfg: RunConfig, out=None, state_factory: Callable = KineticState) -> int:
    out = out or sys.stdout
    sc = load_config_scenario(cfg)
    try:
        bad = verify_scenario(sc, cfg.priority_seed, cfg.samples, state_factory)
    except Exception as e:
        bad = [Mismatch(Fraction(-1), "error", f"{type(e).__name__}: {e}")]
    report = [f"scenario={sc.label or cfg.scenario_file} n={sc.n} priority_seed={cfg.priority_seed} "
              f"samples={cfg.samples} failures={len(bad)}"]
    for m in bad:
        report.append(f"FAIL kind={m.kind} time={m.time} {m.detail}")
    if bad:
        src = (f"--gen {cfg.gen[0]},{cfg.gen[1]},{cfg.gen[2]}" if cfg.gen else f"--scenario {cfg.scenario_file}")
        win = f" --window {sc.window[0]},{sc.window[1]}"
        report.append(f"reproduce: python -m kinetri {src}{win} --priority-seed {cfg.priority_seed} "
                      f"--mode verify --samples {cfg.samples}")
        report.append(f"first failing time: {bad[0].time}")
        _write(cfg.out, "reproducer.json", save_scenario(sc).decode("utf-8"))
    text = "\n".join(report) + "\n"
    _write(cfg.out, "verify.txt", text)
    print(text, end="", file=out)
    return 1 if bad else 0


def scale_rows(sizes: Sequence[int], seeds: Sequence[int], model: str, window, priority_seed: int = 0,
               track_cv: bool = False):
    """Per-size means over seeds of event, change and storage counts.

    With ``track_cv`` the CV-per-funnel maximum is taken after every event, not only at the end.
    """
    rows = []
    for n in sizes:
        per = []
        for s in seeds:
            sc = gen_random_scenario(n, s, model, window=window)
            st = KineticState(sc, draw_priorities(n, priority_seed * 1_000_003 + s))
            cv_max = [st.max_cv_per_funnel()]

            def watch(state, rec, cv_max=cv_max):
                cv_max[0] = max(cv_max[0], state.max_cv_per_funnel())

            if track_cv:
                st.hooks.append(watch)
            t0 = time.perf_counter()
            st.advance()
            wall = time.perf_counter() - t0
            loc = [r.chords_removed + r.chords_added for r in st.log if r.kind in ("CE", "CV")]
            c = st.census()
            per.append((len(st.log), sum(r.changes for r in st.log),
                        sum(loc) / len(loc) if loc else 0.0, len(loc), c["storage_total"],
                        max(cv_max[0], c["max_cv_per_funnel"]), wall))
        k = len(per)
        events = sum(p[0] for p in per) / k
        changes = sum(p[1] for p in per) / k
        nloc = sum(p[3] for p in per)
        chord = sum(p[2] * p[3] for p in per) / nloc if nloc else 0.0
        rows.append({"n": n, "seeds": k, "mean_events": events, "mean_changes": changes,
                     "mean_changes_per_event": changes / events if events else 0.0,
                     "mean_chord_delta_ce_cv": chord, "storage_per_n": sum(p[4] for p in per) / (k * n),
                     "max_cv_per_funnel": max(p[5] for p in per), "wall_s": sum(p[6] for p in per)})
    return rows


SCALE_FIELDS = ("n", "seeds", "mean_events", "mean_changes", "mean_changes_per_event",
                "mean_chord_delta_ce_cv", "storage_per_n", "max_cv_per_funnel", "wall_s")


def scale_csv(rows) -> str:
    lines = [",".join(SCALE_FIELDS)]
    for r in rows:
        lines.append(",".join(f"{r[k]:.6g}" if isinstance(r[k], float) and k != "wall_s" else
                              (f"{r[k]:.3f}" if k == "wall_s" else str(r[k])) for k in SCALE_FIELDS))
    return "\n".join(lines) + "\n"


def cmd_scale(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    window = cfg.window if cfg.window is not None else (0, 1)
    rows = scale_rows(cfg.sizes, cfg.seeds, cfg.gen[2], window, cfg.priority_seed)
    ns = [r["n"] for r in rows]
    s_events = fit_slope(ns, [r["mean_events"] for r in rows])
    s_changes = fit_slope(ns, [r["mean_changes"] for r in rows])
    s_local = fit_slope([math.log(n) for n in ns], [r["mean_changes_per_event"] for r in rows])
    fmt = lambda v: "n/a" if v is None else f"{v:.4f}"
    table = scale_csv(rows)
    stats = [f"sizes={','.join(map(str, ns))}", f"seeds={','.join(map(str, cfg.seeds))}",
             f"slope_events_vs_n={fmt(s_events)}", f"slope_changes_vs_n={fmt(s_changes)}",
             f"slope_changes_per_event_vs_log_n={fmt(s_local)}"]
    _write(cfg.out, "scale.csv", table)
    _write(cfg.out, "stats.txt", "\n".join(stats) + "\n")
    print(table + "\n".join(stats), file=out)
    return 0


def cmd_census(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    sc = load_config_scenario(cfg)
    st = KineticState(sc, draw_priorities(sc.n, cfg.priority_seed))
    c = st.census()
    lines = [f"n={sc.n}", f"max_ct_per_point={c['max_ct']}", f"max_cv_per_funnel={c['max_cv_per_funnel']}"]
    lines += [f"certificates_{k}={v}" for k, v in sorted(c["kinds"].items())]
    lines += [f"storage_{k}={v}" for k, v in sorted(c["storage"].items())]
    lines.append(f"storage_total={c['storage_total']}")
    per = [sum(v.values()) for v in c["per_point"].values()]
    lines.append(f"mean_certificates_per_point={sum(per) / len(per):.6g}")
    lines.append(f"max_certificates_per_point={max(per)}")
    _write(cfg.out, "stats.txt", "\n".join(lines) + "\n")
    print("\n".join(lines), file=out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_args(argv)
    return {"run": cmd_run, "verify": cmd_verify, "scale": cmd_scale, "census": cmd_census}[cfg.mode](cfg)


if __name__ == "__main__":
    sys.exit(main())
