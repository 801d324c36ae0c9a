"""
Stationary vectors and the monotone germ
========================================

For increasing fluxes every discrete stationary vector at a junction has
all outgoing constants equal to the vertex value.  These vectors are
pairwise consistent in the Kruzkov sense, and a grid of candidates shows
that no other stationary vector can be added.
"""

# %%
import itertools
import math

import numpy as np

from netfv import (Burgers, Edge, GermVector, Junction, Neumann, QuadraticFlux,
                   check_maximality_on, in_monotone_germ, mutual_consistency, sample_germ,
                   solve_vertex_value, star_network)

j = star_network(2, 3, Burgers()).junction()
germ = sample_germ(j, np.random.default_rng(0), 6)
for c in germ:
    print(np.round(c.values, 4), "c0 =", round(c.c0, 4))

ok = all(mutual_consistency(j, c, d) for c, d in itertools.combinations(germ, 2))
print("sampled germ mutually consistent:", ok)

# %%
# With f(u) = u^2 on the whole line the diagonal vectors (c, c) are
# consistent with each other, but two vectors (-c, c) and (-d, d) are not.
f = QuadraticFlux(1.0, 0.0, 0.0, domain=(-math.inf, math.inf))
sq = Junction("v", (Edge("-1", f, 1.0, Neumann(), "v"),), (Edge("1", f, 1.0, "v", Neumann()),))
print(mutual_consistency(sq, GermVector((1.0,), (1.0,)), GermVector((3.0,), (3.0,))))
print(mutual_consistency(sq, GermVector((-1.0,), (1.0,)), GermVector((-3.0,), (3.0,))))

# %%
# Maximality on a finite candidate set: one in-road, two out-roads.
one_two = star_network(1, 2, Burgers()).junction()
sample = [solve_vertex_value(one_two, [a]) for a in np.linspace(0, 3, 61)]
cands = [GermVector((a,), (a * math.cos(t), a * math.sin(t)))
         for a in np.linspace(0.2, 3, 15) for t in np.linspace(0, math.pi / 2, 15)]
hits = check_maximality_on(one_two, sample, cands,
                           member=lambda c: in_monotone_germ(one_two, c, 1e-9))
print(f"{len(cands)} stationary candidates, {len(hits)} could extend the germ")
