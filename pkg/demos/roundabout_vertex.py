"""
A shock entering a roundabout junction
======================================

One Burgers road feeds a vertex that also carries a self-loop, and two
roads leave it.  A shock on the incoming road reaches the vertex at
``t* = 1 - 1/sqrt(2)`` and lifts the vertex value from 1 to ``sqrt(5/3)``.
"""

# %%
import math

import numpy as np

from netfv import eoc, get_case, run, solve_vertex_value

case = get_case("burgersroundabout")
print("edges:", [e.id for e in case.network.edges])
print("shock speed", case.events["shock_speed"], "hits the vertex at", case.events["t_hit"])

# %%
# The new vertex value follows from the flux balance with the incoming
# state 2 and the loop still carrying 1.
c = solve_vertex_value(case.network, [2.0, 1.0])
print("c0 after the shock:", c.c0, "sqrt(5/3) =", math.sqrt(5 / 3))

# %%
# Run at level 9 and watch the vertex cell.
res = run(case.initial_state(9), case.t_end, snapshot_times=[0.25, 0.35])
t, u0 = res.report.vertex_series("v")
for target in (0.2, 0.28, 0.29, 0.3, 0.31, 0.35, 0.5):
    i = np.searchsorted(t, target)
    print(f"t = {t[i]:.4f}   u0 = {u0[i]:.6f}")

crossing = t[np.argmax(u0 > 0.5 * (1 + math.sqrt(5 / 3)))]
print("vertex passes the midpoint at", crossing)

# %%
# Compared with the closed-form solution the error halves a little less
# than linearly per level; see the acceptance suite for the exact bands.
print(eoc(case, range(5, 10)).table())
