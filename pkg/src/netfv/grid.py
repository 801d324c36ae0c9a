"""Uniform finite volume grids on a network and the states that live on them.

Every edge of length ``L`` is split into ``L/dx`` cells ``[i*dx, (i+1)*dx]``.
Each vertex carries one extra control volume of width ``N*dx/2`` where
``N`` counts its incoming plus outgoing edge ends.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import SpecMismatch, ValidationError
from .flux import Monotonicity
from .network import Network, validate

AUTO = "auto"


class Grid:
    """Uniform mesh of width ``dx`` over a validated network."""

    def __init__(self, network: Network, dx: float):
        diags = validate(network)
        if diags:
            raise ValidationError("; ".join(map(str, diags)), diags)
        dx = float(dx)
        if not dx > 0:
            raise ValidationError(f"dx must be positive, got {dx!r}")
        self.network = network
        self.dx = dx
        self.cell_counts: dict[str, int] = {}
        for e in network.edges:
            n = int(round(e.length / dx))
            if abs(n * dx - e.length) > 1e-12:
                raise ValidationError(f"edge {e.id}: length {e.length!r} is not a multiple of dx={dx!r}")
            if n < 2:
                raise ValidationError(f"edge {e.id}: needs at least 2 cells, got {n}")
            self.cell_counts[e.id] = n
        self.dx0: dict[str, float] = {v: network.degree(v) * dx / 2.0 for v in network.vertices}

    @classmethod
    def from_level(cls, network: Network, level: int, base: float = 1.0) -> "Grid":
        """Grid with ``dx = base * 2**-level`` (``2**level`` cells per unit length)."""
        return cls(network, base * 2.0 ** (-level))

    def x_centers(self, edge_id: str) -> np.ndarray:
        return (np.arange(self.cell_counts[edge_id]) + 0.5) * self.dx

    def x_faces(self, edge_id: str) -> np.ndarray:
        return np.arange(self.cell_counts[edge_id] + 1) * self.dx

    def zeros(self, time: float = 0.0) -> "GridState":
        return GridState(self, {e: np.zeros(n) for e, n in self.cell_counts.items()},
                         {v: 0.0 for v in self.network.vertices}, time)

    def constant(self, edge_values: Mapping[str, float], vertex_values: Mapping[str, float],
                 time: float = 0.0) -> "GridState":
        return GridState(self, {e: np.full(n, float(edge_values[e])) for e, n in self.cell_counts.items()},
                         {v: float(vertex_values[v]) for v in self.network.vertices}, time)

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.dx == other.dx
                and (self.network is other.network or self.network == other.network))

    def __hash__(self):
        return hash((self.dx, self.network))

    def __repr__(self):
        return f"Grid(dx={self.dx!r}, cells={self.cell_counts})"


@dataclass
class GridState:
    grid: Grid
    edges: dict[str, np.ndarray]
    vertices: dict[str, float]
    time: float = 0.0

    def copy(self) -> "GridState":
        return GridState(self.grid, {k: v.copy() for k, v in self.edges.items()},
                         dict(self.vertices), self.time)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridState":
        """Apply ``fn`` to every edge array and vertex value."""
        return GridState(self.grid, {k: np.asarray(fn(v), dtype=float) for k, v in self.edges.items()},
                         {k: float(fn(np.float64(v))) for k, v in self.vertices.items()}, self.time)

    def flat(self) -> np.ndarray:
        """All values in a fixed order: edges in network order, then vertices."""
        net = self.grid.network
        return np.concatenate([self.edges[e.id] for e in net.edges]
                              + [np.array([self.vertices[v] for v in net.vertices])])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.flat())))

    def check_domains(self) -> None:
        for e in self.grid.network.edges:
            e.flux.check_domain(self.edges[e.id])
        for v in self.grid.network.vertices:
            for e in self.grid.network.vertex_readers(v):
                e.flux.check_domain(self.vertices[v])


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous step function: ``values[j]`` on ``[breaks[j-1], breaks[j])``."""

    breaks: tuple[float, ...] = ()
    values: tuple[float, ...] = field(default=(0.0,))

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.breaks) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls((), (value,))

    def __call__(self, x):
        idx = np.searchsorted(self.breaks, x, side="right")
        return np.asarray(self.values)[idx]

    def integral(self, x) -> np.ndarray:
        """Antiderivative vanishing at ``x = 0``."""
        x = np.asarray(x, dtype=float)
        knots = np.concatenate(([0.0], [b for b in self.breaks if b > 0]))
        vals_at = np.asarray(self.values)[np.searchsorted(self.breaks, knots, side="right")]
        cum = np.concatenate(([0.0], np.cumsum(np.diff(knots) * vals_at[:-1])))
        j = np.searchsorted(knots, x, side="right") - 1
        j = np.clip(j, 0, knots.size - 1)
        return cum[j] + vals_at[j] * (x - knots[j])

    def cell_averages(self, faces: np.ndarray) -> np.ndarray:
        faces = np.asarray(faces, dtype=float)
        avg = np.diff(self.integral(faces)) / np.diff(faces)
        # cells lying inside a single piece get the exact value, free of cancellation
        left = np.searchsorted(self.breaks, faces[:-1], side="right")
        right = np.searchsorted(self.breaks, faces[1:], side="left")
        same = left == right
        avg[same] = np.asarray(self.values)[left[same]]
        return avg

    def trace(self, x: float, side: str) -> float:
        """One-sided limit at ``x`` from the ``'left'`` or ``'right'``."""
        idx = np.searchsorted(self.breaks, x, side="left" if side == "left" else "right")
        return self.values[int(idx)]

    @property
    def range(self) -> tuple[float, float]:
        return min(self.values), max(self.values)


InitialData = Mapping[str, "PiecewiseConstant | float"]


def _as_piecewise(data) -> PiecewiseConstant:
    if isinstance(data, PiecewiseConstant):
        return data
    return PiecewiseConstant.constant(float(data))


def upstream_traces(network: Network, vertex: str, data: InitialData) -> list[float]:
    """Initial traces at ``vertex`` of the edges that feed it.

    For increasing fluxes these are the incoming edges (trace at their
    head end); for decreasing fluxes, the outgoing edges (trace at x = 0).
    """
    junction = network.junction(vertex)
    if junction.monotonicity() is Monotonicity.DECREASING:
        return [_as_piecewise(data[e.id]).trace(0.0, "right") for e in junction.out_edges]
    return [_as_piecewise(data[e.id]).trace(e.length, "left") for e in junction.in_edges]


def project_initial(grid: Grid, data: InitialData,
                    vertex_init: Mapping[str, "float | str"] | str | None = AUTO) -> GridState:
    """Exact cell averages of piecewise-constant edge data.

    ``vertex_init`` maps vertex ids to a value or ``"auto"``; a bare
    ``"auto"`` applies to every vertex.  Auto picks the vertex value that
    makes the upstream edge traces a discrete stationary solution.
    """
    from .germ import solve_vertex_value

    net = grid.network
    missing = [e.id for e in net.edges if e.id not in data]
    if missing:
        raise ValidationError(f"no initial data for edges {missing}")
    edges = {}
    for e in net.edges:
        pc = _as_piecewise(data[e.id])
        e.flux.check_domain(np.asarray(pc.values))
        edges[e.id] = pc.cell_averages(grid.x_faces(e.id))
    if vertex_init is None or isinstance(vertex_init, str):
        vertex_init = {v: AUTO for v in net.vertices}
    vertices = {}
    for v in net.vertices:
        init = vertex_init.get(v, AUTO)
        if isinstance(init, str):
            if init != AUTO:
                raise ValueError(f"vertex init must be a number or 'auto', got {init!r}")
            vertices[v] = solve_vertex_value(net.junction(v), upstream_traces(net, v, data)).c0
        else:
            vertices[v] = float(init)
            for e in net.vertex_readers(v):
                e.flux.check_domain(vertices[v])
    return GridState(grid, edges, vertices, 0.0)


def _same_grid(a: GridState, b: GridState):
    if a.grid is not b.grid and a.grid != b.grid:
        raise SpecMismatch("states live on different grids")


def mass(state: GridState) -> float:
    """Integral of the piecewise-constant state, vertex cells included."""
    g = state.grid
    edge_part = math.fsum(float(np.sum(state.edges[e.id])) for e in g.network.edges) * g.dx
    vertex_part = math.fsum(state.vertices[v] * g.dx0[v] for v in g.network.vertices)
    return edge_part + vertex_part


def l1_distance(a: GridState, b: GridState, *, include_vertices: bool = True) -> float:
    _same_grid(a, b)
    g = a.grid
    total = math.fsum(float(np.sum(np.abs(a.edges[e.id] - b.edges[e.id]))) for e in g.network.edges) * g.dx
    if include_vertices:
        total += math.fsum(abs(a.vertices[v] - b.vertices[v]) * g.dx0[v] for v in g.network.vertices)
    return total


def tv_discrete(state: GridState) -> float:
    """Total variation including the jumps between vertex cells and their neighbours."""
    net = state.grid.network
    total = 0.0
    for e in net.edges:
        u = state.edges[e.id]
        total += float(np.sum(np.abs(np.diff(u))))
        if isinstance(e.tail, str):
            total += abs(state.vertices[e.tail] - u[0])
        if isinstance(e.head, str):
            total += abs(state.vertices[e.head] - u[-1])
    return total


def snapshot_rows(state: GridState) -> list[tuple]:
    rows = []
    g = state.grid
    for e in g.network.edges:
        for i, (x, val) in enumerate(zip(g.x_centers(e.id), state.edges[e.id])):
            rows.append((e.id, i, float(x), float(val)))
    for v in g.network.vertices:
        rows.append((f"vertex:{v}", 0, 0.0, float(state.vertices[v])))
    return rows


def write_snapshot_csv(state: GridState, path) -> None:
    """Write ``edge_id, cell_index, x_center, value`` rows, vertices last."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["edge_id", "cell_index", "x_center", "value"])
        for eid, i, x, val in snapshot_rows(state):
            w.writerow([eid, i, repr(x), repr(val)])


def read_snapshot_csv(path, grid: Grid, time: float = 0.0) -> GridState:
    state = grid.zeros(time)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            eid, val = row["edge_id"], float(row["value"])
            if eid.startswith("vertex:"):
                state.vertices[eid[len("vertex:"):]] = val
            else:
                state.edges[eid][int(row["cell_index"])] = val
    return state
