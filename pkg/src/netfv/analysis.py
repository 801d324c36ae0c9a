"""Error norms, convergence tables and discrete entropy checks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .cases import Case, ExactSolution
from .errors import SpecMismatch
from .grid import Grid, GridState
from .scheme import NumericalFlux, _neighbours, run


def exact_eval(case: Case, edge_id: str, x, t: float):
    return case.exact.evaluate(edge_id, x, t)


def crandall_majda_q(numflux: NumericalFlux, c_left, c_right, u_left, u_right):
    """Numerical entropy flux ``F(u_l v c_l, u_r v c_r) - F(u_l ^ c_l, u_r ^ c_r)``."""
    hi = numflux(np.maximum(u_left, c_left), np.maximum(u_right, c_right))
    lo = numflux(np.minimum(u_left, c_left), np.minimum(u_right, c_right))
    return hi - lo


@dataclass
class EntropyResiduals:
    edges: dict[str, np.ndarray]
    vertices: dict[str, float]

    def max(self) -> float:
        vals = [float(np.max(r)) for r in self.edges.values()] + list(self.vertices.values())
        return max(vals)


def _germ_neighbours(germ: GridState, e) -> tuple[float, float]:
    # vertex ends use c0, open ends reuse the edge constant as the ghost of c
    c = germ.edges[e.id]
    left = germ.vertices[e.tail] if isinstance(e.tail, str) else float(c[0])
    right = germ.vertices[e.head] if isinstance(e.head, str) else float(c[-1])
    return left, right


def discrete_entropy_residuals(before: GridState, after: GridState, dt: float,
                               germ: GridState) -> EntropyResiduals:
    """``|u^{n+1} - c| - |u^n - c| + dt/dx (Q_right - Q_left)`` per cell and vertex.

    ``germ`` is a discrete stationary state (constant per edge plus vertex
    values).  Non-positive residuals mean the step dissipates entropy.
    """
    grid = before.grid
    if after.grid != grid or germ.grid != grid:
        raise SpecMismatch("states live on different grids")
    net = grid.network
    edge_res, faces = {}, {}
    for e in net.edges:
        u, c = before.edges[e.id], germ.edges[e.id]
        ul, ur = _neighbours(before, e)
        cl, cr = _germ_neighbours(germ, e)
        u_ext = np.concatenate(([ul], u, [ur]))
        c_ext = np.concatenate(([cl], c, [cr]))
        Q = crandall_majda_q(NumericalFlux.for_flux(e.flux), c_ext[:-1], c_ext[1:],
                             u_ext[:-1], u_ext[1:])
        faces[e.id] = Q
        edge_res[e.id] = (np.abs(after.edges[e.id] - c) - np.abs(u - c)
                          + dt / grid.dx * (Q[1:] - Q[:-1]))
    vert_res = {}
    for v in net.vertices:
        c0 = germ.vertices[v]
        q_out = math.fsum(faces[e.id][0] for e in net.out_list(v))
        q_in = math.fsum(faces[e.id][-1] for e in net.in_list(v))
        vert_res[v] = (abs(after.vertices[v] - c0) - abs(before.vertices[v] - c0)
                       + dt / grid.dx0[v] * (q_out - q_in))
    return EntropyResiduals(edge_res, vert_res)


def restrict(fine: GridState, coarse: Grid) -> dict[str, np.ndarray]:
    """Average a fine-grid state onto the cells of a coarser nested grid."""
    ratio = coarse.dx / fine.grid.dx
    r = int(round(ratio))
    if r < 1 or abs(r - ratio) > 1e-9 or fine.grid.network != coarse.network:
        raise SpecMismatch(f"grid dx={fine.grid.dx!r} does not refine dx={coarse.dx!r}")
    return {e: fine.edges[e].reshape(-1, r).mean(axis=1) for e in coarse.cell_counts}


def l1_error_vs(reference, state: GridState, t: float | None = None) -> float:
    """Edge-only L1 distance between ``state`` and a reference on the same cells.

    ``reference`` is a :class:`Case`, an :class:`ExactSolution` (exact cell
    averages at ``t``) or a finer :class:`GridState` (block averages).  The
    vertex cell is not counted.
    """
    t = state.time if t is None else float(t)
    if isinstance(reference, Case):
        reference = reference.exact
    grid = state.grid
    if isinstance(reference, ExactSolution):
        ref = reference.cell_averages(grid, t)
    elif isinstance(reference, GridState):
        if abs(reference.time - t) > 1e-12 * max(1.0, abs(t)):
            raise SpecMismatch(f"reference at t={reference.time!r}, state at t={t!r}")
        ref = restrict(reference, grid)
    else:
        raise TypeError(f"unsupported reference {type(reference).__name__}")
    return grid.dx * math.fsum(float(np.sum(np.abs(state.edges[e.id] - ref[e.id])))
                               for e in grid.network.edges)


def eoc_orders(errors, dxs) -> list[float]:
    """``log(e_{j+1}/e_j) / log(dx_{j+1}/dx_j)`` for consecutive pairs."""
    return [math.log(errors[j + 1] / errors[j]) / math.log(dxs[j + 1] / dxs[j])
            for j in range(len(errors) - 1)]


@dataclass
class EocReport:
    case: str
    levels: list[int]
    dxs: list[float]
    errors: list[float]
    orders: list[float] = field(init=False)

    def __post_init__(self):
        self.orders = eoc_orders(self.errors, self.dxs)

    def order_at(self, level: int) -> float:
        """Order of the pair ending at ``level``."""
        return self.orders[self.levels.index(level) - 1]

    def rows(self) -> list[tuple[int, float, float | None]]:
        return [(lvl, err, None if j == 0 else self.orders[j - 1])
                for j, (lvl, err) in enumerate(zip(self.levels, self.errors))]

    def table(self) -> str:
        lines = [f"{self.case}", f"{'level':>5}  {'L1 error':>12}  {'EOC':>6}"]
        for lvl, err, p in self.rows():
            lines.append(f"{lvl:>5}  {err:>12.5f}  {'' if p is None else f'{p:6.2f}':>6}")
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["level", "dx", "l1_error", "eoc"])
            for (lvl, err, p), dx in zip(self.rows(), self.dxs):
                w.writerow([lvl, repr(dx), repr(err), "" if p is None else repr(p)])


def eoc(case: Case, levels, cfl_factor: float = 1.0, t_end: float | None = None,
        reference: str | int = "exact", executor=None) -> EocReport:
    """Run ``case`` on each level and tabulate L1 errors and orders.

    ``reference`` is ``"exact"`` for the closed-form solution, or an integer
    level above ``max(levels)`` for a fine-grid self-reference.
    """
    levels = [int(x) for x in levels]
    if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"need at least two strictly increasing levels, got {levels}")
    t_end = case.t_end if t_end is None else float(t_end)
    if reference == "exact":
        if case.exact is None:
            raise ValueError(f"case {case.name!r} has no exact solution; pass a reference level")
        ref = case.exact
    else:
        ref_level = int(reference)
        if ref_level <= levels[-1]:
            raise ValueError("the reference level must exceed every computed level")
        ref = run(case.initial_state(ref_level), t_end, cfl_factor, executor=executor).state
    errors, dxs = [], []
    for lvl in levels:
        res = run(case.initial_state(lvl), t_end, cfl_factor, executor=executor)
        errors.append(l1_error_vs(ref, res.state, t_end))
        dxs.append(res.state.grid.dx)
    return EocReport(case.name, levels, dxs, errors)
