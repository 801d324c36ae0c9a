"""The five benchmark junction problems and their closed-form solutions.

Each edge of every benchmark carries at most one elementary wave (shock,
contact or rarefaction fan) of a quadratic flux, so the exact solution is
stored as one :class:`EdgeWave` per edge plus a piecewise-constant vertex
trace in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import OutsideValidity
from .flux import Burgers, LinearAdvection, QuadraticFlux, ScaledLWR
from .grid import AUTO, Grid, PiecewiseConstant
from .network import Dirichlet, Network, Neumann, add_roundabout, star_network

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True)
class EdgeWave:
    """Riemann wave ``ul | ur`` of ``flux`` emitted from ``(x0, t0)``.

    For ``t <= t0`` the edge holds ``ul`` left of ``x0`` and ``ur`` right of it.
    """

    flux: QuadraticFlux
    ul: float
    ur: float
    x0: float = 0.0
    t0: float = 0.0

    @property
    def kind(self) -> str:
        a2 = self.flux.a2
        if self.ul == self.ur:
            return "constant"
        if a2 == 0.0:
            return "contact"
        if (a2 > 0) == (self.ul > self.ur):
            return "shock"
        return "fan"

    @property
    def speeds(self) -> tuple[float, float]:
        """Speeds of the left and right edge of the wave (equal unless it is a fan)."""
        kind = self.kind
        if kind == "fan":
            return float(self.flux._df(self.ul)), float(self.flux._df(self.ur))
        if kind == "contact":
            return (self.flux.a1,) * 2
        s = self.flux.a2 * (self.ul + self.ur) + self.flux.a1
        return s, s

    def breakpoints(self, t: float) -> list[float]:
        if self.kind == "constant":
            return []
        if t <= self.t0:
            return [self.x0]
        lo, hi = self.speeds
        return sorted({self.x0 + lo * (t - self.t0), self.x0 + hi * (t - self.t0)})

    def __call__(self, x, t: float):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full(x.shape, self.ur)
        if t <= self.t0:
            return np.where(x < self.x0, self.ul, self.ur)
        xi = (x - self.x0) / (t - self.t0)
        lo, hi = self.speeds
        out = np.where(xi < lo, self.ul, self.ur)
        if self.kind == "fan":
            inside = (xi >= lo) & (xi < hi)
            out = np.where(inside, self.flux.derivative_inverse(np.clip(xi, lo, hi)), out)
        return out


def constant_wave(flux: QuadraticFlux, value: float) -> EdgeWave:
    return EdgeWave(flux, value, value)


@dataclass(frozen=True)
class ExactSolution:
    waves: Mapping[str, EdgeWave]
    vertex_trace: Mapping[str, PiecewiseConstant]  # vertex -> value as a function of time
    valid_until: float

    def _check(self, t: float):
        if not 0.0 <= t <= self.valid_until:
            raise OutsideValidity(f"t={t!r} outside [0, {self.valid_until!r}]")

    def evaluate(self, edge_id: str, x, t: float):
        self._check(t)
        return self.waves[edge_id](x, t)

    def vertex_value(self, vertex: str, t: float) -> float:
        self._check(t)
        return float(self.vertex_trace[vertex](t))

    def cell_averages(self, grid: Grid, t: float) -> dict[str, np.ndarray]:
        """Exact cell averages: Gauss-Legendre on the pieces between faces and wave fronts.

        Every piece is constant or linear in ``x``, so the quadrature is exact.
        """
        self._check(t)
        out = {}
        for e in grid.network.edges:
            wave = self.waves[e.id]
            faces = grid.x_faces(e.id)
            inner = [b for b in wave.breakpoints(t) if faces[0] < b < faces[-1]]
            pts = np.union1d(faces, inner)
            a, b = pts[:-1], pts[1:]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            nodes = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
            piece = half * (wave(nodes, t) @ _GAUSS_W)
            cell = np.searchsorted(faces, mid, side="right") - 1
            avg = np.zeros(faces.size - 1)
            np.add.at(avg, cell, piece)
            out[e.id] = avg / np.diff(faces)
        return out


@dataclass(frozen=True)
class Case:
    name: str
    network: Network
    data: Mapping[str, PiecewiseConstant]
    vertex_init: Mapping[str, float | str]
    t_end: float
    exact: ExactSolution | None
    events: Mapping[str, float] = field(default_factory=dict)

    def grid(self, level: int) -> Grid:
        return Grid.from_level(self.network, level)

    def initial_state(self, level: int):
        from .grid import project_initial
        return project_initial(self.grid(level), self.data, self.vertex_init)


def _jump(left: float, right: float, at: float) -> PiecewiseConstant:
    return PiecewiseConstant((at,), (left, right))


def _const(v: float) -> PiecewiseConstant:
    return PiecewiseConstant.constant(v)


def linadv() -> Case:
    f = LinearAdvection(1.0)
    bcs = [Dirichlet(1.0), Dirichlet(2.0)] + [Dirichlet(2.0 / 3.0)] * 3
    net = star_network(2, 3, f, bcs=bcs)
    c_before, c_after = 2.0 / 3.0, 1.0
    t_hit = 0.2
    waves = {"-2": constant_wave(f, 1.0), "-1": EdgeWave(f, 2.0, 1.0, x0=0.8)}
    waves.update({k: EdgeWave(f, c_after, c_before, x0=0.0, t0=t_hit) for k in ("1", "2", "3")})
    exact = ExactSolution(waves, {"v": PiecewiseConstant((t_hit,), (c_before, c_after))},
                          valid_until=1.0)
    data = {"-1": _jump(2.0, 1.0, 0.8), "-2": _const(1.0)}
    data.update({k: _const(c_before) for k in ("1", "2", "3")})
    return Case("linadv", net, data, {"v": c_before}, 0.5, exact, {"t_hit": t_hit})


def burgersshock() -> Case:
    f = Burgers()
    c_before, c_after = math.sqrt(2.0 / 3.0), math.sqrt(5.0 / 3.0)
    bcs = [Dirichlet(1.0), Dirichlet(2.0)] + [Dirichlet(c_before)] * 3
    net = star_network(2, 3, f, bcs=bcs)
    t_hit = 0.2 / 1.5
    waves = {"-2": constant_wave(f, 1.0), "-1": EdgeWave(f, 2.0, 1.0, x0=0.8)}
    waves.update({k: EdgeWave(f, c_after, c_before, x0=0.0, t0=t_hit) for k in ("1", "2", "3")})
    s_out = 0.5 * (c_after + c_before)
    exact = ExactSolution(waves, {"v": PiecewiseConstant((t_hit,), (c_before, c_after))},
                          valid_until=t_hit + 1.0 / s_out)
    data = {"-1": _jump(2.0, 1.0, 0.8), "-2": _const(1.0)}
    data.update({k: _const(c_before) for k in ("1", "2", "3")})
    return Case("burgersshock", net, data, {"v": c_before}, 0.5, exact, {"t_hit": t_hit})


def burgerselementary() -> Case:
    f = Burgers()
    net = star_network(2, 3, f, bcs=Neumann())
    c0 = math.sqrt(2.0 / 3.0)
    waves = {"-1": constant_wave(f, 1.0), "-2": constant_wave(f, 1.0),
             "1": EdgeWave(f, c0, 0.0), "2": constant_wave(f, c0), "3": EdgeWave(f, c0, 2.0)}
    # the fan head travels at speed 2 and reaches the open end at t = 0.5
    exact = ExactSolution(waves, {"v": _const(c0)}, valid_until=0.5)
    data = {"-1": _const(1.0), "-2": _const(1.0), "1": _const(0.0),
            "2": _const(c0), "3": _const(2.0)}
    return Case("burgerselementary", net, data, {"v": AUTO}, 0.3, exact)


ROUNDABOUT_EDGE = "loop"


def burgersroundabout() -> Case:
    f = Burgers()
    net = add_roundabout(star_network(1, 2, f, bcs=Neumann()), "v", ROUNDABOUT_EDGE, f)
    r2 = math.sqrt(2.0)
    s_in = 1.0 / (2.0 - r2)
    t_hit = 1.0 - 1.0 / r2  # the shock starts at x = 0.5
    c0 = math.sqrt(5.0 / 3.0)
    s_out = 0.5 * (c0 + 1.0)
    waves = {"-1": EdgeWave(f, 2.0, r2, x0=0.5)}
    waves.update({k: EdgeWave(f, c0, 1.0, x0=0.0, t0=t_hit) for k in ("1", "2", ROUNDABOUT_EDGE)})
    # valid until the roundabout shock returns to the vertex
    exact = ExactSolution(waves, {"v": PiecewiseConstant((t_hit,), (1.0, c0))},
                          valid_until=t_hit + 1.0 / s_out)
    data = {"-1": _jump(2.0, r2, 0.5), "1": _const(1.0), "2": _const(1.0),
            ROUNDABOUT_EDGE: _const(1.0)}
    return Case("burgersroundabout", net, data, {"v": 1.0}, 0.5, exact,
                {"t_hit": t_hit, "shock_speed": s_in, "t_return": t_hit + 1.0 / s_out})


HOLDEN_RISEBRO_ALPHA = (1.0, 1.0, 4.0, 4.0, 2.0)


def holdenrisebro(alpha=HOLDEN_RISEBRO_ALPHA, s_max: float = 4.0) -> Case:
    fl = [ScaledLWR(a, s_max) for a in alpha]
    net = star_network(2, 3, fl, bcs=Neumann())
    c0 = 0.5 * (3.0 - math.sqrt(7.0))
    values = (0.5, 0.5, 0.0, c0, 1.0)
    ids = ("-2", "-1", "1", "2", "3")
    waves = {k: EdgeWave(f, c0, v) if k in ("1", "2", "3") else constant_wave(f, v)
             for k, f, v in zip(ids, fl, values)}
    fastest = max(max(abs(s) for s in waves[k].speeds) for k in ("1", "3"))
    exact = ExactSolution(waves, {"v": _const(c0)}, valid_until=1.0 / fastest)
    data = {k: _const(v) for k, v in zip(ids, values)}
    return Case("holdenrisebro", net, data, {"v": AUTO}, 0.2, exact)


CASES: dict[str, Callable[[], Case]] = {
    "linadv": linadv,
    "burgersshock": burgersshock,
    "burgerselementary": burgerselementary,
    "burgersroundabout": burgersroundabout,
    "holdenrisebro": holdenrisebro,
}

ALIASES = {
    "linadvshock": "linadv",
    "trafficholdenrisebro": "holdenrisebro",
}


def get_case(name: str) -> Case:
    key = name.lower().replace("_", "").replace("-", "")
    key = ALIASES.get(key, key)
    if key not in CASES:
        raise KeyError(f"unknown case {name!r}; choose from {sorted(CASES)}")
    return CASES[key]()
