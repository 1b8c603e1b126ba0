#!/usr/bin/env python3
"""
A vertex sinks through a hull edge, then a fourth point overtakes it in x.

Four points move linearly over [0, 1].  Point 1 sinks: it first drops below the
line 0-3 and leaves the upper hull, then at t = 1/2 passes through the segment
0-2 and joins the lower hull.  Point 3 drifts left and passes point 2 in x at
t = 3/4, an x-swap.  Other collinearities
among the four points along the way show up as events too.  After each instant
the script prints both hulls and the triangles, and checks them against a
triangulation rebuilt from scratch just after the event.
"""

from fractions import Fraction as F

from kinetri.hulltree import Side
from kinetri.kds import KineticState
from kinetri.kernel import EQ, compare_times, rational_between
from kinetri.motion import PriorityAssignment, Scenario, Trajectory
from kinetri.oracle import equivalent, static_snapshot

window = (F(0), F(1))
rows = [(0, 0, 0, 0), (1, 1, 0, -2), (2, 0, 0, 0), (3, F(1, 2), -F(4, 3), 0)]
scenario = Scenario(tuple(Trajectory.linear(*map(F, r), window) for r in rows), window)
priorities = PriorityAssignment((1, 3, 2, 4))


def show(state, label):
    snap = state.extract_triangles()
    print(label)
    print(f"  upper hull {state.trees[Side.UPPER].upper_hull()}   lower hull {state.trees[Side.LOWER].upper_hull()}")
    print(f"  triangles  {snap.triangles}")


def after_event(st, rec):
    head = st.queue.peek()
    if head is not None and compare_times(head.time, rec.time) == EQ:
        print(f"{rec.kind} event at t = {rec.time.decimal(6)} ({rec.side}); more due at this instant")
        return
    nxt = head.time if head is not None and head.time.compare_rational(window[1]) < 0 else window[1]
    t = rational_between(rec.time, nxt)
    same = equivalent(st.extract_triangles(), static_snapshot(scenario, priorities, t))
    show(st, f"{rec.kind} event at t = {rec.time.decimal(6)} ({rec.side}), {rec.changes} edge changes, "
             f"matches the reference just after: {same}")


state = KineticState(scenario, priorities)
show(state, "t = 0")
state.hooks.append(after_event)
state.advance()
print(f"{len(state.log)} events in total: {[r.kind for r in state.log]}")
