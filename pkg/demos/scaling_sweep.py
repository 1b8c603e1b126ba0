#!/usr/bin/env python3
"""
A small scaling sweep: how event and change counts grow with n.

Three sizes, four seeds each, linear motion over [0, 1/20].  The fitted slope of
log(mean changes) against log(n) is printed next to the table; near-quadratic
growth shows as a slope a little above 2.
"""

from fractions import Fraction as F

from kinetri.cli import fit_slope, scale_csv, scale_rows

rows = scale_rows([16, 32, 64], range(4), "linear", (F(0), F(1, 20)))
print(scale_csv(rows), end="")
slope = fit_slope([r["n"] for r in rows], [r["mean_changes"] for r in rows])
print(f"slope of mean changes against n (log-log): {slope:.3f}")
