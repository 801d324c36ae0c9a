"""Explicit upwind finite volume scheme on a network.

Edge cells are updated with the usual conservative difference of face
fluxes; the vertex cell of width ``dx0 = N*dx/2`` collects the fluxes of
the faces it shares with the first/last cell of each attached edge.  All
updates read the old state only, so edges can be processed in any order.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CflViolation, DomainViolation, NotMonotone
from .flux import Flux, Monotonicity
from .grid import GridState
from .network import Dirichlet, Edge, Neumann, is_vertex


class Rule(str, enum.Enum):
    UPWIND_INCREASING = "upwind_increasing"
    UPWIND_DECREASING = "upwind_decreasing"


@dataclass(frozen=True)
class NumericalFlux:
    """Two-point upwind flux ``F(a, b)``: ``f(a)`` for increasing, ``f(b)`` for decreasing ``f``."""

    flux: Flux
    rule: Rule

    @classmethod
    def for_flux(cls, flux: Flux, lo=None, hi=None) -> "NumericalFlux":
        mono = flux.monotonicity_class(lo, hi)
        if mono is Monotonicity.INCREASING:
            return cls(flux, Rule.UPWIND_INCREASING)
        if mono is Monotonicity.DECREASING:
            return cls(flux, Rule.UPWIND_DECREASING)
        raise NotMonotone(f"no upwind rule for {flux!r}: not strictly monotone")

    def __call__(self, a, b):
        upwind = a if self.rule is Rule.UPWIND_INCREASING else b
        out = self.flux._f(np.asarray(upwind, dtype=float))
        return float(out) if np.ndim(out) == 0 else out


@dataclass
class StepReport:
    dt_used: float
    max_wave_speed: float
    fluxes_at_vertices: dict[str, tuple[float, float]]  # vertex -> (in-sum, out-sum)
    boundary_influx: float = 0.0
    boundary_outflux: float = 0.0


def _ghost(end, boundary_value: float) -> float:
    if isinstance(end, Dirichlet):
        return float(end.value)
    if isinstance(end, Neumann):
        return float(boundary_value)
    raise TypeError(f"bad boundary attachment {end!r}")


def _neighbours(state: GridState, e: Edge) -> tuple[float, float]:
    u = state.edges[e.id]
    left = state.vertices[e.tail] if is_vertex(e.tail) else _ghost(e.tail, u[0])
    right = state.vertices[e.head] if is_vertex(e.head) else _ghost(e.head, u[-1])
    return left, right


def wave_speed(state: GridState) -> float:
    """``max_k max |f_k'|`` over each edge's current value range.

    The range is widened by ghost values and by the vertex value wherever
    the upwind flux reads it; a vertex value feeding only downstream edges
    may lie outside an upstream edge's domain.
    """
    speed = 0.0
    net = state.grid.network
    for e in net.edges:
        u = state.edges[e.id]
        vals = [float(u.min()), float(u.max())]
        left, right = _neighbours(state, e)
        mono = e.flux.monotonicity_class()
        if not is_vertex(e.tail) or mono is not Monotonicity.DECREASING:
            vals.append(left)
        if not is_vertex(e.head) or mono is not Monotonicity.INCREASING:
            vals.append(right)
        speed = max(speed, float(e.flux.derivative_bound(min(vals), max(vals))))
    return speed


def cfl_dt(state: GridState, cfl_factor: float = 1.0, dt_max: float | None = None) -> float:
    """Largest stable step ``cfl_factor * dx / (2 S)``; ``dt_max`` (default ``dx``) when ``S = 0``."""
    if not 0.0 < cfl_factor <= 1.0:
        raise ValueError(f"cfl_factor must lie in (0, 1], got {cfl_factor!r}")
    dx = state.grid.dx
    s = wave_speed(state)
    if s == 0.0:
        return dx if dt_max is None else float(dt_max)
    dt = cfl_factor * dx / (2.0 * s)
    return dt if dt_max is None else min(dt, float(dt_max))


def _edge_update(state: GridState, e: Edge, dt: float):
    u = state.edges[e.id]
    left, right = _neighbours(state, e)
    ext = np.empty(u.size + 2)
    ext[0], ext[1:-1], ext[-1] = left, u, right
    F = NumericalFlux.for_flux(e.flux)(ext[:-1], ext[1:])
    return u - (dt / state.grid.dx) * (F[1:] - F[:-1]), F


def step(state: GridState, dt: float, *, check_cfl: bool = True,
         executor=None) -> tuple[GridState, StepReport]:
    """Advance ``state`` by ``dt``; returns the new state and a step report.

    ``executor`` (anything with a ``map`` method) may process edges in
    parallel; the result does not depend on it.
    """
    dt = float(dt)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    grid = state.grid
    net = grid.network
    speed = wave_speed(state)
    if check_cfl and speed > 0 and dt > grid.dx / (2.0 * speed) * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt!r} exceeds the stability limit {grid.dx / (2.0 * speed)!r}")

    def work(e):
        return _edge_update(state, e, dt)

    results = list(executor.map(work, net.edges)) if executor is not None else [work(e) for e in net.edges]
    new_edges, faces = {}, {}
    for e, (u_new, F) in zip(net.edges, results):
        new_edges[e.id], faces[e.id] = u_new, F

    new_vertices, at_vertices = {}, {}
    for v in net.vertices:
        in_sum = math.fsum(faces[e.id][-1] for e in net.in_list(v))
        out_sum = math.fsum(faces[e.id][0] for e in net.out_list(v))
        new_vertices[v] = float(state.vertices[v] - dt / grid.dx0[v] * (out_sum - in_sum))
        at_vertices[v] = (in_sum, out_sum)

    influx = outflux = 0.0
    for e, end, _ in net.open_ends():
        if end == "tail":
            influx += float(faces[e.id][0])
        else:
            outflux += float(faces[e.id][-1])

    new = GridState(grid, new_edges, new_vertices, state.time + dt)
    for e in net.edges:
        e.flux.check_domain(new.edges[e.id])
    for v in net.vertices:
        for e in net.vertex_readers(v):
            try:
                e.flux.check_domain(new.vertices[v])
            except DomainViolation as exc:
                raise DomainViolation(f"vertex {v}: {exc}") from None
    return new, StepReport(dt, speed, at_vertices, influx, outflux)


@dataclass
class RunReport:
    steps: list[tuple[int, float, float, float]] = field(default_factory=list)  # n, t, dt, speed
    vertex_history: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    boundary_influx: float = 0.0   # time integral of inflow through open tails
    boundary_outflux: float = 0.0  # time integral of outflow through open heads

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "t", "dt", "max_wave_speed"])
            for n, t, dt, s in self.steps:
                w.writerow([n, repr(t), repr(dt), repr(s)])

    def vertex_series(self, vertex: str) -> tuple[np.ndarray, np.ndarray]:
        data = np.array(self.vertex_history[vertex])
        return data[:, 0], data[:, 1]


@dataclass
class RunResult:
    state: GridState
    snapshots: list[GridState]
    report: RunReport


def run(state: GridState, t_end: float, cfl_factor: float = 1.0,
        snapshot_times: Sequence[float] = (), *,
        on_step: Callable[[GridState, StepReport], None] | None = None,
        dt_max: float | None = None, executor=None) -> RunResult:
    """March from ``state.time`` to ``t_end``, landing exactly on every snapshot time."""
    t_end = float(t_end)
    if not t_end > state.time:
        raise ValueError(f"t_end={t_end!r} must exceed the start time {state.time!r}")
    targets = sorted({float(t) for t in snapshot_times})
    if targets and (targets[0] < state.time or targets[-1] > t_end):
        raise ValueError("snapshot times must lie within [start time, t_end]")
    report = RunReport(vertex_history={v: [(state.time, state.vertices[v])]
                                       for v in state.grid.network.vertices})
    snapshots = []
    pending = list(targets)
    while pending and pending[0] <= state.time:
        snapshots.append(state.copy())
        pending.pop(0)
    n = 0
    while state.time < t_end:
        target = pending[0] if pending else t_end
        dt = cfl_dt(state, cfl_factor, dt_max)
        landed = dt >= target - state.time
        if landed:
            dt = target - state.time
        state, rep = step(state, dt, executor=executor)
        if landed:
            state.time = target
        n += 1
        report.steps.append((n, state.time, dt, rep.max_wave_speed))
        report.boundary_influx += dt * rep.boundary_influx
        report.boundary_outflux += dt * rep.boundary_outflux
        for v, val in state.vertices.items():
            report.vertex_history[v].append((state.time, val))
        if on_step is not None:
            on_step(state, rep)
        while pending and pending[0] <= state.time:
            snapshots.append(state.copy())
            pending.pop(0)
    return RunResult(state, snapshots, report)
