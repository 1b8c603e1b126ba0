"""Acceptance criteria, one test each; every test records a PASS/FAIL line for the summary."""

import math
import time
from fractions import Fraction as F
from itertools import combinations

import pytest

from conftest import ACCEPTANCE_LINES
from kinetri.cli import fit_slope, sample_times, scale_rows
from kinetri.hulltree import Side, build_static, verify_treap
from kinetri.kds import KineticState
from kinetri.kernel import EventTime, Frame, compare_times, rational_between
from kinetri.motion import DegeneracyError, draw_priorities, gen_random_scenario
from kinetri.oracle import (candidate_times, equivalent, integer_positions, positions_at,
                            snapshot_problems, static_snapshot)

from scenarios import settling

SCALE_SIZES = (32, 64, 128, 256)
SCALE_SEEDS = range(10)
SCALE_WINDOW = (F(0), F(1, 20))


def report(number, title, ok, detail):
    line = f"CRITERION {number} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_1_kinetic_static_equivalence():
    t0 = time.perf_counter()
    sizes = (8, 16, 24, 32)
    checks = failures = 0
    for i in range(50):
        n, seed = sizes[i % 4], 1000 + i
        sc = gen_random_scenario(n, seed, "linear")
        pr = draw_priorities(n, seed)
        st = KineticState(sc, pr)
        times = sample_times(sc, 50, seed)
        for t in times:
            st.advance(t)
            try:
                ref = static_snapshot(sc, pr, t)
            except DegeneracyError:  # landed on an event; not a sample point
                continue
            checks += 1
            failures += not equivalent(st.extract_triangles(), ref)
    wall = time.perf_counter() - t0
    ok = failures == 0 and checks >= 50 * 50 * 0.99 and wall < 300
    assert report(1, "kinetic-static equivalence", ok,
                  f"{checks - failures}/{checks} equal, {wall:.1f} s of 300 s")


def test_criterion_2_event_completeness():
    gap_failures = kinetic_failures = gaps = 0
    for i in range(20):
        n, seed = 4 + i % 7, 2000 + i
        sc = gen_random_scenario(n, seed, "linear")
        pr = draw_priorities(n, seed)
        st = KineticState(sc, pr)
        cands = candidate_times(sc)
        bounds = [EventTime.rational(sc.window[0])] + cands + [EventTime.rational(sc.window[1])]
        for e1, e2 in zip(bounds, bounds[1:]):
            if compare_times(e1, e2) >= 0:
                continue
            gaps += 1
            m = rational_between(e1, e2)
            ts = (rational_between(e1, EventTime.rational(m)), m, rational_between(EventTime.rational(m), e2))
            snaps = [static_snapshot(sc, pr, t) for t in ts]
            if not (equivalent(snaps[0], snaps[1]) and equivalent(snaps[1], snaps[2])):
                gap_failures += 1
            for t, ref in zip(ts, snaps):
                st.advance(t)
                kinetic_failures += not equivalent(st.extract_triangles(), ref)
        # every processed event time is a candidate time
        for rec in st.log:
            if not any(compare_times(rec.time, c) == 0 for c in cands):
                kinetic_failures += 1
    ok = gap_failures == 0 and kinetic_failures == 0
    assert report(2, "event completeness", ok,
                  f"{gaps} gaps, {gap_failures} non-constant, {kinetic_failures} kinetic mismatches")


def structure_problems(state, t):
    """Invariant violations of the whole structure at a rational time inside an event gap."""
    sc = state.scenario
    n = sc.n
    frame = Frame(sc, t, after=False)
    probs = []
    for side in Side:
        tree = state.trees[side]
        if not verify_treap(tree, frame):
            probs.append(f"{side.value}: treap or pseudo-triangle condition")
        for v in tree.nodes.values():
            f = v.funnel
            gens = [c[0] for c in f.chords]
            if sorted(gens) != sorted(f.non_corners()) or len(set(gens)) != len(gens):
                probs.append(f"{side.value}: chords of node {v.apex}")
    snap = state.extract_triangles()
    h = len(snap.hull)
    edges = {frozenset(e) for tri in snap.triangles for e in combinations(tri, 2)}
    if len(snap.triangles) != 2 * n - h - 2 or len(edges) != 3 * n - h - 3:
        probs.append("Euler counts")
    probs += snapshot_problems(snap, integer_positions(positions_at(sc, t)))
    return probs


def test_criterion_3_structural_invariants():
    events = failures = 0
    first = None
    for seed in range(10):
        sc = gen_random_scenario(32, 3000 + seed, "linear")
        st = KineticState(sc, draw_priorities(32, 3000 + seed))

        def hook(state, rec):
            nonlocal events, failures, first
            if settling(state, rec):
                return
            head = state.queue.peek()
            end = head.time if head is not None and head.time.compare_rational(state.t_end) < 0 \
                else EventTime.rational(state.t_end)
            probs = structure_problems(state, rational_between(rec.time, end))
            if state.max_cv_per_funnel() > 3:
                probs.append("CV per funnel")
            events += 1
            if probs:
                failures += 1
                first = first or (seed, rec.time, probs[:3])

        st.hooks.append(hook)
        st.advance()
    ok = failures == 0 and events > 0
    assert report(3, "structural invariants", ok,
                  f"{events} event states checked, {failures} with violations" + (f", first {first}" if first else ""))


@pytest.fixture(scope="module")
def scale_table():
    return scale_rows(SCALE_SIZES, SCALE_SEEDS, "linear", SCALE_WINDOW, track_cv=True)


def test_criterion_4_event_count_scaling(scale_table):
    slope = fit_slope([r["n"] for r in scale_table], [r["mean_changes"] for r in scale_table])
    means = ", ".join(f"n={r['n']}: {r['mean_changes']:.1f}" for r in scale_table)
    ok = slope is not None and 1.5 < slope <= 2.6
    assert report(4, "event-count scaling", ok, f"slope {slope:.3f} in (1.5, 2.6]; mean changes {means}")


def test_criterion_5_locality(scale_table):
    by_n = {r["n"]: r for r in scale_table}
    ratio = by_n[256]["mean_chord_delta_ce_cv"] / by_n[32]["mean_chord_delta_ce_cv"]
    cv = max(r["max_cv_per_funnel"] for r in scale_table)
    ok = ratio <= 3 and cv <= 3
    assert report(5, "per-event locality", ok,
                  f"chord delta n=256/n=32 = {by_n[256]['mean_chord_delta_ce_cv']:.3f}/"
                  f"{by_n[32]['mean_chord_delta_ce_cv']:.3f} = {ratio:.3f} <= 3; max CV per funnel {cv} <= 3")


def test_criterion_6_compactness(scale_table):
    per_n = [r["storage_per_n"] for r in scale_table]
    c = sum(per_n) / len(per_n)
    spread = max(per_n) / min(per_n) - 1
    ok = spread < 0.2
    assert report(6, "compactness", ok,
                  f"storage/n {', '.join(f'{v:.2f}' for v in per_n)}; c = {c:.2f}; spread {spread:.1%} < 20%")


def test_criterion_7_initialization_scaling():
    sizes = (2 ** 10, 2 ** 12, 2 ** 14)
    counts = []
    for n in sizes:
        sc = gen_random_scenario(n, 7, "static")
        frame = Frame(sc, 0, after=False)
        build_static(sc, draw_priorities(n, 7), 0, frame=frame)
        counts.append(frame.count)
    xs = [n * math.log2(n) for n in sizes]
    c = sum(x * y for x, y in zip(xs, counts)) / sum(x * x for x in xs)
    dev = [y / (c * x) - 1 for x, y in zip(xs, counts)]
    ok = all(abs(d) <= 0.3 for d in dev)
    assert report(7, "initialization scaling", ok,
                  f"c = {c:.3f}; comparisons {counts}; deviations "
                  f"{', '.join(f'{d:+.1%}' for d in dev)} within 30%")
