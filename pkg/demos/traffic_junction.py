"""
Traffic merging at a two-in, three-out junction
===============================================

Five roads with scaled LWR fluxes ``s u (1 - u/alpha)`` meet at one vertex.
The vertex value is fixed by the flux balance of the two incoming roads
and never changes; the outgoing roads develop a rarefaction, a constant
state and a shock.
"""

# %%
import numpy as np

from netfv import admissible_intervals, get_case, run

case = get_case("holdenrisebro")
j = case.network.junction()
for e in j.in_edges + j.out_edges:
    print(e.id, e.flux)

i_in, i_out = admissible_intervals(j)
print("admissible in-values", i_in, "out-values", i_out)

# %%
state = case.initial_state(9)
print("vertex value (auto):", state.vertices["v"])
res = run(state, case.t_end)
print("vertex value at T:", res.state.vertices["v"])

# %%
# Numerical profile on the rarefaction road against the exact fan.
x = res.state.grid.x_centers("1")
exact = case.exact.evaluate("1", x, case.t_end)
for xi in (0.5, 0.7, 0.75, 0.8, 0.85):
    k = np.argmin(np.abs(x - xi))
    print(f"x = {x[k]:.3f}   numerical {res.state.edges['1'][k]:.5f}   exact {exact[k]:.5f}")

# %%
# Shock on the third road: left state c0, right state 1.
wave = case.exact.waves["3"]
print("edge 3 shock speed", wave.speeds[0], "position at T", wave.breakpoints(case.t_end))
