"""Directed networks of finite edges meeting at junction vertices.

An edge is the interval ``[0, length]`` travelled from ``tail`` (x = 0) to
``head`` (x = length).  Each end is attached either to a vertex or to an
open boundary carrying a boundary condition.  An edge whose two ends sit
on the same vertex is a roundabout; it is listed once among the incoming
and once among the outgoing edges of that vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import BadArity, ValidationError
from .flux import AggregateFlux, Flux, Monotonicity


@dataclass(frozen=True)
class Dirichlet:
    value: float

    def to_spec(self):
        return {"boundary": "dirichlet", "value": float(self.value)}


@dataclass(frozen=True)
class Neumann:
    """Zero-gradient condition: the ghost cell copies the boundary cell."""

    def to_spec(self):
        return {"boundary": "neumann"}


BoundaryCondition = Union[Dirichlet, Neumann]
Attachment = Union[str, Dirichlet, Neumann]


def is_vertex(end: Attachment) -> bool:
    return isinstance(end, str)


@dataclass(frozen=True)
class Edge:
    id: str
    flux: Flux
    length: float
    tail: Attachment
    head: Attachment

    @property
    def is_roundabout(self) -> bool:
        return is_vertex(self.tail) and self.tail == self.head


@dataclass(frozen=True)
class Junction:
    """Local view of a vertex: its incoming and outgoing edges in fixed order."""

    vertex: str
    in_edges: tuple[Edge, ...]
    out_edges: tuple[Edge, ...]

    @property
    def n_in(self) -> int:
        return len(self.in_edges)

    @property
    def n_out(self) -> int:
        return len(self.out_edges)

    @property
    def size(self) -> int:
        return self.n_in + self.n_out

    @property
    def in_fluxes(self) -> tuple[Flux, ...]:
        return tuple(e.flux for e in self.in_edges)

    @property
    def out_fluxes(self) -> tuple[Flux, ...]:
        return tuple(e.flux for e in self.out_edges)

    @property
    def fluxes(self) -> tuple[Flux, ...]:
        return self.in_fluxes + self.out_fluxes

    @property
    def f_in(self) -> AggregateFlux:
        return AggregateFlux(self.in_fluxes)

    @property
    def f_out(self) -> AggregateFlux:
        return AggregateFlux(self.out_fluxes)

    def monotonicity(self) -> Monotonicity:
        """Common monotonicity class of all fluxes, NONE if they disagree."""
        classes = {f.monotonicity_class() for f in self.fluxes}
        return classes.pop() if len(classes) == 1 else Monotonicity.NONE

    @property
    def labels(self) -> tuple[int, ...]:
        """Junction-local indices ``-n_in..-1, 1..n_out`` for the slots."""
        return tuple(range(-self.n_in, 0)) + tuple(range(1, self.n_out + 1))


class Network:
    """Immutable collection of edges and vertices.

    Construction never fails on topological problems; call
    :func:`validate` (or :meth:`validated`) to get diagnostics.
    """

    def __init__(self, edges: Iterable[Edge], vertices: Iterable[str] | None = None):
        self.edges: tuple[Edge, ...] = tuple(edges)
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        if vertices is None:
            seen = []
            for e in self.edges:
                for end in (e.tail, e.head):
                    if is_vertex(end) and end not in seen:
                        seen.append(end)
            vertices = seen
        self.vertices: tuple[str, ...] = tuple(vertices)
        self._by_id = {e.id: e for e in self.edges}
        self._in = {v: tuple(e for e in self.edges if e.head == v) for v in self.vertices}
        self._out = {v: tuple(e for e in self.edges if e.tail == v) for v in self.vertices}

    def edge(self, edge_id: str) -> Edge:
        return self._by_id[edge_id]

    def in_list(self, vertex: str) -> tuple[Edge, ...]:
        return self._in[vertex]

    def out_list(self, vertex: str) -> tuple[Edge, ...]:
        return self._out[vertex]

    def degree(self, vertex: str) -> int:
        return len(self._in[vertex]) + len(self._out[vertex])

    def junction(self, vertex: str | None = None) -> Junction:
        if vertex is None:
            if len(self.vertices) != 1:
                raise ValueError("network has several vertices; name one")
            vertex = self.vertices[0]
        return Junction(vertex, self._in[vertex], self._out[vertex])

    def open_ends(self) -> list[tuple[Edge, str, BoundaryCondition]]:
        """``(edge, 'tail'|'head', condition)`` for every boundary end."""
        ends = []
        for e in self.edges:
            if not is_vertex(e.tail):
                ends.append((e, "tail", e.tail))
            if not is_vertex(e.head):
                ends.append((e, "head", e.head))
        return ends

    def vertex_readers(self, vertex: str) -> list[Edge]:
        """Attached edges whose upwind flux evaluates the vertex value.

        With increasing fluxes these are the out-edges, with decreasing
        fluxes the in-edges.  An edge of unknown monotonicity counts as a
        reader, so callers err on the side of checking it.
        """
        readers = []
        for e in self._in[vertex] + self._out[vertex]:
            if e in readers:
                continue
            mono = e.flux.monotonicity_class()
            if ((e.tail == vertex and mono is not Monotonicity.DECREASING)
                    or (e.head == vertex and mono is not Monotonicity.INCREASING)):
                readers.append(e)
        return readers

    def validated(self) -> "Network":
        diags = validate(self)
        if diags:
            raise ValidationError("; ".join(str(d) for d in diags), diags)
        return self

    def __eq__(self, other):
        return (isinstance(other, Network) and self.edges == other.edges
                and self.vertices == other.vertices)

    def __hash__(self):
        return hash((self.edges, self.vertices))

    def __repr__(self):
        return f"Network(vertices={list(self.vertices)}, edges={[e.id for e in self.edges]})"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    subject: str
    message: str

    def __str__(self):
        return f"{self.code}({self.subject}): {self.message}"


def validate(network: Network) -> list[Diagnostic]:
    """Return every violated network invariant; empty when the network is usable."""
    diags: list[Diagnostic] = []
    if not network.edges:
        diags.append(Diagnostic("NoEdges", "network", "network has no edges"))
        return diags
    vertices = set(network.vertices)
    for e in network.edges:
        if not (math.isfinite(e.length) and e.length > 0):
            diags.append(Diagnostic("NonPositiveLength", e.id, f"length {e.length!r}"))
        for name in ("tail", "head"):
            end = getattr(e, name)
            if is_vertex(end):
                if end not in vertices:
                    diags.append(Diagnostic("UnknownVertex", e.id, f"{name} vertex {end!r}"))
            elif isinstance(end, Dirichlet):
                lo, hi = e.flux.domain
                if not lo <= end.value <= hi:
                    diags.append(Diagnostic("DirichletOutOfDomain", e.id,
                                            f"{name} value {end.value!r} outside {e.flux.domain}"))
            elif not isinstance(end, Neumann):
                diags.append(Diagnostic("BadAttachment", e.id, f"{name} is {end!r}"))
    for v in network.vertices:
        n_in, n_out = len(network.in_list(v)), len(network.out_list(v))
        if n_out == 0:
            diags.append(Diagnostic("DeadEndVertex", v, "vertex has no outgoing edge"))
        if n_in == 0:
            diags.append(Diagnostic("SourceVertex", v, "vertex has no incoming edge"))
        if n_in and n_out:
            classes = {e.flux.monotonicity_class() for e in network.in_list(v) + network.out_list(v)}
            if Monotonicity.NONE in classes:
                diags.append(Diagnostic("NonMonotoneFlux", v,
                                        "a flux at this vertex is not strictly monotone on its domain"))
            elif len(classes) > 1:
                diags.append(Diagnostic("MixedMonotonicity", v,
                                        "increasing and decreasing fluxes meet at this vertex"))
    if _components(network) > 1:
        diags.append(Diagnostic("Disconnected", "network", "graph is not connected"))
    return diags


def _components(network: Network) -> int:
    parent: dict = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in network.vertices:
        find(("v", v))
    for e in network.edges:
        find(("e", e.id))
        for end in (e.tail, e.head):
            if is_vertex(end):
                parent[find(("e", e.id))] = find(("v", end))
    return len({find(x) for x in list(parent)})


def _broadcast(value, n, what):
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            raise BadArity(f"expected {n} {what}, got {len(value)}")
        return list(value)
    return [value] * n


def star_network(n_in: int, n_out: int, fluxes: Flux | Sequence[Flux],
                 lengths: float | Sequence[float] = 1.0,
                 bcs: BoundaryCondition | Sequence[BoundaryCondition] = Neumann(),
                 vertex: str = "v") -> Network:
    """One vertex with ``n_in`` incoming and ``n_out`` outgoing edges.

    Edge ids are ``"-n_in" .. "-1"`` and ``"1" .. "n_out"``.  Per-edge
    arguments are ordered the same way; ``bcs`` gives the condition at the
    free end of each edge (tail of incoming, head of outgoing edges).
    """
    if n_in < 1 or n_out < 1:
        raise BadArity("a star needs at least one incoming and one outgoing edge")
    n = n_in + n_out
    fluxes = _broadcast(fluxes, n, "fluxes")
    lengths = _broadcast(lengths, n, "lengths")
    bcs = _broadcast(bcs, n, "boundary conditions")
    ids = [str(k) for k in range(-n_in, 0)] + [str(k) for k in range(1, n_out + 1)]
    edges = []
    for j, eid in enumerate(ids):
        if j < n_in:
            edges.append(Edge(eid, fluxes[j], float(lengths[j]), bcs[j], vertex))
        else:
            edges.append(Edge(eid, fluxes[j], float(lengths[j]), vertex, bcs[j]))
    return Network(edges, [vertex])


def add_roundabout(network: Network, vertex: str, edge_id: str, flux: Flux,
                   length: float = 1.0) -> Network:
    """Return a copy of ``network`` with a self-loop edge attached to ``vertex``."""
    if vertex not in network.vertices:
        raise ValueError(f"unknown vertex {vertex!r}")
    loop = Edge(edge_id, flux, float(length), vertex, vertex)
    return Network(network.edges + (loop,), network.vertices)
