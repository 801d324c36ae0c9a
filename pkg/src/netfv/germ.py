"""Stationary solutions at a junction and the monotone germ built from them.

A stationary vector assigns one constant to every edge slot of a junction
(incoming slots first, then outgoing) such that the in-flux total equals
the out-flux total.  A discrete stationary vector additionally carries a
vertex value ``c0`` that the upwind scheme leaves invariant.  For strictly
increasing fluxes this forces every outgoing constant to equal ``c0``; for
strictly decreasing fluxes, every incoming constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainViolation, NotBracketed, NotMonotone, OutsideAdmissibleSet
from .flux import Flux, Monotonicity, monotone_inverse
from .network import Junction, Network

RTOL = 1e-10


@dataclass(frozen=True)
class GermVector:
    """Per-slot constants at one junction, optionally with a vertex value."""

    c_in: tuple[float, ...]
    c_out: tuple[float, ...]
    c0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "c_in", tuple(float(v) for v in self.c_in))
        object.__setattr__(self, "c_out", tuple(float(v) for v in self.c_out))
        if self.c0 is not None:
            object.__setattr__(self, "c0", float(self.c0))

    @classmethod
    def from_values(cls, junction: Junction, values: Sequence[float], c0=None) -> "GermVector":
        """Split a flat vector ordered ``-n_in..-1, 1..n_out`` into in/out parts.

        A vector one entry longer than the junction size takes its last
        entry as ``c0``.
        """
        values = [float(v) for v in values]
        if len(values) == junction.size + 1 and c0 is None:
            c0 = values.pop()
        if len(values) != junction.size:
            raise ValueError(f"expected {junction.size} slot values, got {len(values)}")
        return cls(tuple(values[:junction.n_in]), tuple(values[junction.n_in:]), c0)

    @property
    def values(self) -> np.ndarray:
        return np.array(self.c_in + self.c_out)

    def with_vertex(self, c0: float) -> "GermVector":
        return GermVector(self.c_in, self.c_out, c0)

    def slot(self, label: int) -> float:
        """Constant on the slot with junction-local label ``label``."""
        if label < 0:
            return self.c_in[len(self.c_in) + label]
        if label > 0:
            return self.c_out[label - 1]
        return self._vertex()

    def extended(self, label: int, i: int) -> float:
        """Cell value ``c_i^k``: ``c0`` on the vertex cell (i = 0), the slot constant elsewhere."""
        return self._vertex() if i == 0 else self.slot(label)

    def _vertex(self) -> float:
        if self.c0 is None:
            raise ValueError("vector carries no vertex value")
        return self.c0

    def edge_values(self, junction: Junction) -> dict[str, float]:
        """Map edge ids to constants; a roundabout needs equal in and out constants."""
        out: dict[str, float] = {}
        for e, v in zip(junction.in_edges + junction.out_edges, self.c_in + self.c_out):
            if e.id in out and out[e.id] != v:
                raise ValueError(
                    f"roundabout edge {e.id} has in-value {out[e.id]!r} but out-value {v!r}")
            out[e.id] = v
        return out

    def to_state(self, grid, time: float = 0.0):
        """The constant-per-edge grid state of this vector on a one-vertex grid."""
        junction = grid.network.junction()
        return grid.constant(self.edge_values(junction), {junction.vertex: self._vertex()}, time)


StationaryVector = GermVector


def _as_junction(vertex) -> Junction:
    if isinstance(vertex, Junction):
        return vertex
    if isinstance(vertex, Network):
        return vertex.junction()
    raise TypeError(f"expected a Junction or single-vertex Network, got {type(vertex).__name__}")


def _check_arity(junction: Junction, c: GermVector):
    if len(c.c_in) != junction.n_in or len(c.c_out) != junction.n_out:
        raise ValueError(
            f"vector has {len(c.c_in)}+{len(c.c_out)} slots, junction has "
            f"{junction.n_in}+{junction.n_out}")


def kruzkov_q(flux: Flux, c, u):
    """Entropy flux ``sgn(u - c) * (f(u) - f(c))``."""
    fu, fc = flux(u), flux(c)
    q = np.sign(np.asarray(u, dtype=float) - np.asarray(c, dtype=float)) * (fu - fc)
    return float(q) if np.ndim(q) == 0 else q


def flux_totals(junction, c: GermVector) -> tuple[float, float]:
    junction = _as_junction(junction)
    _check_arity(junction, c)
    f_in = math.fsum(float(f(v)) for f, v in zip(junction.in_fluxes, c.c_in))
    f_out = math.fsum(float(f(v)) for f, v in zip(junction.out_fluxes, c.c_out))
    return f_in, f_out


def is_stationary(junction, c: GermVector, rtol: float = RTOL) -> bool:
    """Flux balance ``sum_in f(c) = sum_out f(c)`` up to ``rtol * (1 + sum |f|)``."""
    junction = _as_junction(junction)
    _check_arity(junction, c)
    fs = [float(f(v)) for f, v in zip(junction.fluxes, c.c_in + c.c_out)]
    f_in, f_out = flux_totals(junction, c)
    return abs(f_in - f_out) <= rtol * (1.0 + math.fsum(abs(x) for x in fs))


def is_discrete_stationary(junction, c: GermVector, rtol: float = RTOL) -> bool:
    """Flux balance plus invariance of every vertex-adjacent upwind flux."""
    from .scheme import NumericalFlux

    junction = _as_junction(junction)
    if c.c0 is None:
        raise ValueError("a discrete stationary vector needs a vertex value c0")
    if not is_stationary(junction, c, rtol):
        return False
    for e, ck in zip(junction.in_edges, c.c_in):
        F = NumericalFlux.for_flux(e.flux)
        if abs(F(ck, c.c0) - float(e.flux(ck))) > rtol * (1.0 + abs(float(e.flux(ck)))):
            return False
    for e, ck in zip(junction.out_edges, c.c_out):
        F = NumericalFlux.for_flux(e.flux)
        if abs(F(c.c0, ck) - float(e.flux(ck))) > rtol * (1.0 + abs(float(e.flux(ck)))):
            return False
    return True


def _direction(junction: Junction) -> Monotonicity:
    mono = junction.monotonicity()
    if mono is Monotonicity.NONE:
        raise NotMonotone(f"fluxes at vertex {junction.vertex!r} are not all increasing "
                          "or all decreasing")
    return mono


def solve_vertex_value(junction, upstream_values: Sequence[float]) -> GermVector:
    """Complete the upstream constants to a discrete stationary vector.

    For increasing fluxes ``upstream_values`` are the incoming constants and
    every outgoing constant becomes ``c0 = f_out^{-1}(sum_in f(c))``.  For
    decreasing fluxes the roles of incoming and outgoing edges swap.

    Raises NotBracketed if the flux total is not attained on the other side.
    """
    junction = _as_junction(junction)
    mono = _direction(junction)
    vals = [float(v) for v in upstream_values]
    if mono is Monotonicity.INCREASING:
        src, dst = junction.in_fluxes, junction.f_out
    else:
        src, dst = junction.out_fluxes, junction.f_in
    if len(vals) != len(src):
        raise ValueError(f"expected {len(src)} upstream values, got {len(vals)}")
    total = math.fsum(float(f(v)) for f, v in zip(src, vals))
    c0 = monotone_inverse(dst, total)
    if mono is Monotonicity.INCREASING:
        return GermVector(tuple(vals), (c0,) * junction.n_out, c0)
    return GermVector((c0,) * junction.n_in, tuple(vals), c0)


def mutual_consistency(junction, c: GermVector, d: GermVector, rtol: float = RTOL) -> bool:
    """Entropy inequality ``sum_in q_c(d) >= sum_out q_c(d)`` for (c, d) and (d, c)."""
    junction = _as_junction(junction)
    _check_arity(junction, c)
    _check_arity(junction, d)

    def one_way(a: GermVector, b: GermVector) -> bool:
        q_in = [kruzkov_q(f, x, y) for f, x, y in zip(junction.in_fluxes, a.c_in, b.c_in)]
        q_out = [kruzkov_q(f, x, y) for f, x, y in zip(junction.out_fluxes, a.c_out, b.c_out)]
        scale = 1.0 + math.fsum(abs(q) for q in q_in + q_out)
        return math.fsum(q_in) - math.fsum(q_out) >= -rtol * scale

    return one_way(c, d) and one_way(d, c)


def admissible_intervals(junction) -> tuple[tuple[float, float], tuple[float, float]]:
    """``(I_in, I_out)``: preimages of ``R_in & R_out`` under ``f_in`` and ``f_out``."""
    junction = _as_junction(junction)
    _direction(junction)
    f_in, f_out = junction.f_in, junction.f_out
    r_in, r_out = f_in.range(), f_out.range()
    lo, hi = max(r_in[0], r_out[0]), min(r_in[1], r_out[1])
    if lo > hi:
        raise OutsideAdmissibleSet("in-flux and out-flux ranges do not overlap")

    def preimage(f):
        a, b = _inverse_or_end(f, lo), _inverse_or_end(f, hi)
        return (min(a, b), max(a, b))

    return preimage(f_in), preimage(f_out)


def _inverse_or_end(f: Flux, y: float) -> float:
    if math.isinf(y):
        # the infinite end of the range is attained at an infinite end of the domain
        lo, hi = f.domain
        return lo if f.endpoint_value(lo) == y else hi
    return monotone_inverse(f, y)


def germ_bounds_for_data(junction, ranges: Sequence[tuple[float, float]]
                         ) -> tuple[GermVector, GermVector]:
    """Discrete stationary vectors bounding per-slot data ranges from below and above.

    ``ranges`` holds one ``(lo, hi)`` pair per slot in label order.  Both
    bounds have all incoming constants equal and all outgoing constants
    equal, chosen so their flux totals match.

    Raises OutsideAdmissibleSet if a range leaves ``I_in`` / ``I_out``.
    """
    junction = _as_junction(junction)
    mono = _direction(junction)
    ranges = [(float(a), float(b)) for a, b in ranges]
    if len(ranges) != junction.size:
        raise ValueError(f"expected {junction.size} ranges, got {len(ranges)}")
    if any(a > b for a, b in ranges):
        raise ValueError("every range needs lo <= hi")
    i_in, i_out = admissible_intervals(junction)
    for label, (a, b), (lo, hi) in zip(junction.labels, ranges,
                                       [i_in] * junction.n_in + [i_out] * junction.n_out):
        tol = 1e-12 * (1.0 + max(abs(a), abs(b)))
        if a < lo - tol or b > hi + tol:
            raise OutsideAdmissibleSet(
                f"slot {label}: range [{a!r}, {b!r}] leaves the admissible interval [{lo!r}, {hi!r}]")
    in_r, out_r = ranges[:junction.n_in], ranges[junction.n_in:]
    f_in, f_out = junction.f_in, junction.f_out
    in_lo, in_hi = min(a for a, _ in in_r), max(b for _, b in in_r)
    out_lo, out_hi = min(a for a, _ in out_r), max(b for _, b in out_r)
    pick_low = min if mono is Monotonicity.INCREASING else max
    pick_high = max if mono is Monotonicity.INCREASING else min

    def build(y: float) -> GermVector:
        try:
            d_in, d_out = monotone_inverse(f_in, y), monotone_inverse(f_out, y)
        except NotBracketed as exc:
            raise OutsideAdmissibleSet(str(exc)) from exc
        c0 = d_out if mono is Monotonicity.INCREASING else d_in
        return GermVector((d_in,) * junction.n_in, (d_out,) * junction.n_out, c0)

    lower = build(pick_low(float(f_in(in_lo)), float(f_out(out_lo))))
    upper = build(pick_high(float(f_in(in_hi)), float(f_out(out_hi))))
    return lower, upper


def in_monotone_germ(junction, c: GermVector, rtol: float = RTOL) -> bool:
    """Membership in the germ of discrete stationary solutions of the upwind scheme."""
    junction = _as_junction(junction)
    mono = _direction(junction)
    if not is_stationary(junction, c, rtol):
        return False
    side = c.c_out if mono is Monotonicity.INCREASING else c.c_in
    c0 = side[0]
    return all(abs(v - c0) <= rtol * (1.0 + abs(c0)) for v in side)


def _close(a: GermVector, b: GermVector, rtol: float) -> bool:
    return bool(np.allclose(a.values, b.values, rtol=rtol, atol=rtol))


def check_maximality_on(junction, sample: Iterable[GermVector], candidates: Iterable[GermVector],
                        member: Callable[[GermVector], bool] | None = None,
                        rtol: float = RTOL) -> list[GermVector]:
    """Candidates that could be added to ``sample`` without breaking mutual consistency.

    A candidate is reported when it is stationary, is not a member of the
    germ (by default: not already in ``sample``), and is mutually
    consistent with every sample element.  An empty result means the
    sample looks maximal on this candidate set.
    """
    junction = _as_junction(junction)
    sample = list(sample)
    if member is None:
        def member(v):
            return any(_close(v, s, rtol) for s in sample)
    hits = []
    for cand in candidates:
        if not is_stationary(junction, cand, rtol) or member(cand):
            continue
        if all(mutual_consistency(junction, s, cand, rtol) for s in sample):
            hits.append(cand)
    return hits


def without_roundabouts(junction) -> Junction:
    """The junction with every self-loop removed from both slot lists."""
    junction = _as_junction(junction)
    return Junction(junction.vertex,
                    tuple(e for e in junction.in_edges if not e.is_roundabout),
                    tuple(e for e in junction.out_edges if not e.is_roundabout))


def solve_with_roundabouts(junction, free_values: Sequence[float]) -> GermVector:
    """Discrete stationary vector whose roundabout slots all equal ``c0``.

    A self-loop carries one constant, so as an in-slot and as an out-slot it
    must hold the same value; its flux then cancels from the balance.
    ``free_values`` are the upstream constants of the non-loop edges.
    """
    junction = _as_junction(junction)
    reduced = without_roundabouts(junction)
    if reduced.n_in == 0 or reduced.n_out == 0:
        raise ValueError("need at least one non-roundabout edge on each side")
    base = solve_vertex_value(reduced, free_values)
    for e in junction.in_edges:
        if e.is_roundabout:
            e.flux.check_domain(base.c0)
    it_in, it_out = iter(base.c_in), iter(base.c_out)
    c_in = tuple(base.c0 if e.is_roundabout else next(it_in) for e in junction.in_edges)
    c_out = tuple(base.c0 if e.is_roundabout else next(it_out) for e in junction.out_edges)
    return GermVector(c_in, c_out, base.c0)


def _clip(interval, span):
    lo, hi = interval
    if math.isinf(lo) and math.isinf(hi):
        return -span / 2, span / 2
    if math.isinf(hi):
        return lo, lo + span
    if math.isinf(lo):
        return hi - span, hi
    return lo, hi


def sample_germ(junction, rng: np.random.Generator, n: int = 1,
                span: float = 4.0) -> list[GermVector]:
    """Random discrete stationary vectors with upstream constants drawn from ``I_in`` / ``I_out``.

    Unbounded admissible intervals are cut to length ``span``.  Roundabout
    slots are tied to ``c0`` so every sample is realizable as a grid state;
    draws whose ``c0`` leaves a roundabout's domain are redrawn.
    """
    junction = _as_junction(junction)
    mono = _direction(junction)
    loops = any(e.is_roundabout for e in junction.in_edges)
    free = without_roundabouts(junction) if loops else junction
    i_in, i_out = admissible_intervals(free)
    lo, hi = _clip(i_in if mono is Monotonicity.INCREASING else i_out, span)
    k = free.n_in if mono is Monotonicity.INCREASING else free.n_out
    if not loops or n == 0:
        return [solve_vertex_value(junction, rng.uniform(lo, hi, size=k)) for _ in range(n)]
    # c0 must also lie in every roundabout's domain, which the balance does not see
    out = []
    for _ in range(1000 * n):
        try:
            out.append(solve_with_roundabouts(junction, rng.uniform(lo, hi, size=k)))
        except DomainViolation:
            continue
        if len(out) == n:
            return out
    raise OutsideAdmissibleSet("no sampled vertex value fits the roundabout domains")
