"""YAML run configurations.

A config has four top-level blocks plus an optional ``case`` name::

    case: holdenrisebro          # bundled case providing an exact reference (optional)
    network:
      vertices: [v]
      edges:
        - {id: "-1", flux: {kind: burgers}, length: 1.0,
           tail: {boundary: dirichlet, value: 2.0}, head: v}
    initial:
      edges:
        "-1": {breaks: [0.5], values: [2.0, 1.0]}
      vertices: {v: auto}
    solver: {level: 7, cfl_factor: 1.0, t_end: 0.5, snapshot_times: [0.25]}
    outputs: {directory: out, snapshots: true, report: true}

``solver`` takes either ``level`` (``dx = 2**-level``) or ``dx``.  Edge ends
are a vertex id or a mapping with ``boundary: neumann|dirichlet``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import yaml

from .errors import ParseError, ValidationError
from .flux import flux_from_spec
from .grid import AUTO, Grid, PiecewiseConstant, project_initial
from .network import Dirichlet, Edge, Network, Neumann, validate

BUNDLED = ("linadv", "burgersshock", "burgerselementary", "burgersroundabout", "holdenrisebro")


@dataclass(eq=True)
class RunConfig:
    network: Network
    data: dict[str, PiecewiseConstant]
    vertex_init: dict[str, float | str]
    t_end: float
    cfl_factor: float = 1.0
    level: int | None = None
    dx: float | None = None
    snapshot_times: tuple[float, ...] = ()
    output_dir: str = "out"
    write_snapshots: bool = True
    write_report: bool = True
    case: str | None = None

    @property
    def mesh_width(self) -> float:
        return float(self.dx) if self.dx is not None else 2.0 ** (-self.level)

    def grid(self, level: int | None = None) -> Grid:
        if level is not None:
            return Grid.from_level(self.network, level)
        return Grid(self.network, self.mesh_width)

    def initial_state(self, level: int | None = None):
        return project_initial(self.grid(level), self.data, self.vertex_init)


class _Lines:
    """Line numbers (1-based) of nodes in a composed YAML document, keyed by path."""

    def __init__(self, node):
        self.lines: dict[tuple, int] = {}
        self._walk(node, ())

    def _walk(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                self._walk(v, path + (k.value,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                self._walk(v, path + (i,))

    def at(self, path) -> int:
        path = tuple(path)
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path, 1)


def _fail(lines: _Lines, path, msg, cls=ParseError):
    raise cls(f"line {lines.at(path)}: {msg}")


def _get(block: dict, key: str, lines: _Lines, path, default=...):
    if not isinstance(block, dict):
        _fail(lines, path, f"expected a mapping, got {type(block).__name__}")
    if key not in block:
        if default is ...:
            _fail(lines, path, f"missing key {key!r}")
        return default
    return block[key]


def _number(value, lines, path, what) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(lines, path, f"{what} must be a number, got {value!r}")
    return float(value)


def _attachment(spec, lines, path):
    if isinstance(spec, (str, int)) and not isinstance(spec, bool):
        return str(spec)
    if isinstance(spec, dict):
        kind = spec.get("boundary")
        if kind == "neumann":
            return Neumann()
        if kind == "dirichlet":
            return Dirichlet(_number(_get(spec, "value", lines, path), lines, path + ("value",), "value"))
    _fail(lines, path, f"edge end must be a vertex id or a boundary mapping, got {spec!r}")


def _parse_network(block, lines):
    path = ("network",)
    edges_spec = _get(block, "edges", lines, path)
    if not isinstance(edges_spec, list):
        _fail(lines, path + ("edges",), "edges must be a list")
    edges = []
    for i, es in enumerate(edges_spec):
        p = path + ("edges", i)
        eid = str(_get(es, "id", lines, p))
        try:
            flux = flux_from_spec(_get(es, "flux", lines, p))
        except (ValueError, TypeError, KeyError) as exc:
            _fail(lines, p + ("flux",), f"edge {eid}: bad flux: {exc}")
        length = _number(_get(es, "length", lines, p, 1.0), lines, p + ("length",), "length")
        edges.append(Edge(eid, flux, length, _attachment(_get(es, "tail", lines, p), lines, p + ("tail",)),
                          _attachment(_get(es, "head", lines, p), lines, p + ("head",))))
    vertices = _get(block, "vertices", lines, path, None)
    try:
        net = Network(edges, None if vertices is None else [str(v) for v in vertices])
    except ValueError as exc:
        _fail(lines, path + ("edges",), str(exc), ValidationError)
    edge_line = {str(es.get("id")): lines.at(path + ("edges", i)) for i, es in enumerate(edges_spec)}
    vertex_line = ({str(v): lines.at(path + ("vertices", i)) for i, v in enumerate(vertices)}
                   if vertices is not None else {})
    diags = validate(net)
    if diags:
        msgs = [f"line {edge_line.get(d.subject, vertex_line.get(d.subject, lines.at(path)))}: {d}"
                for d in diags]
        raise ValidationError("; ".join(msgs), diags)
    return net


def _parse_initial(block, net, lines):
    path = ("initial",)
    edges = _get(block, "edges", lines, path)
    data = {}
    for key, spec in edges.items():
        p = path + ("edges", key)
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            data[str(key)] = PiecewiseConstant.constant(float(spec))
            continue
        try:
            data[str(key)] = PiecewiseConstant(tuple(_get(spec, "breaks", lines, p, ())),
                                               tuple(_get(spec, "values", lines, p)))
        except (ValueError, TypeError) as exc:
            _fail(lines, p, f"edge {key}: {exc}")
    unknown = sorted(set(data) - {e.id for e in net.edges})
    if unknown:
        _fail(lines, path + ("edges",), f"initial data for unknown edges {unknown}", ValidationError)
    missing = [e.id for e in net.edges if e.id not in data]
    if missing:
        _fail(lines, path + ("edges",), f"no initial data for edges {missing}", ValidationError)
    raw_vertices = _get(block, "vertices", lines, path, {}) or {}
    vertex_init: dict[str, float | str] = {}
    for v in net.vertices:
        val = raw_vertices.get(v, AUTO)
        if isinstance(val, str):
            if val != AUTO:
                _fail(lines, path + ("vertices", v), f"vertex {v}: expected a number or 'auto'")
            vertex_init[v] = AUTO
        else:
            vertex_init[v] = _number(val, lines, path + ("vertices", v), f"vertex {v} value")
    unknown = sorted(set(map(str, raw_vertices)) - set(net.vertices))
    if unknown:
        _fail(lines, path + ("vertices",), f"initial values for unknown vertices {unknown}", ValidationError)
    return data, vertex_init


def _from_tree(doc: Any, lines: _Lines) -> RunConfig:
    if not isinstance(doc, dict):
        _fail(lines, (), "config must be a mapping")
    unknown = sorted(set(doc) - {"case", "network", "initial", "solver", "outputs"})
    if unknown:
        _fail(lines, (), f"unknown top-level keys {unknown}")
    net = _parse_network(_get(doc, "network", lines, ()), lines)
    data, vertex_init = _parse_initial(_get(doc, "initial", lines, ()), net, lines)

    sp = ("solver",)
    solver = _get(doc, "solver", lines, ())
    t_end = _number(_get(solver, "t_end", lines, sp), lines, sp + ("t_end",), "t_end")
    cfl = _number(_get(solver, "cfl_factor", lines, sp, 1.0), lines, sp + ("cfl_factor",), "cfl_factor")
    if not 0.0 < cfl <= 1.0:
        _fail(lines, sp + ("cfl_factor",), f"cfl_factor must lie in (0, 1], got {cfl!r}", ValidationError)
    level, dx = solver.get("level"), solver.get("dx")
    if (level is None) == (dx is None):
        _fail(lines, sp, "give exactly one of 'level' and 'dx'")
    if level is not None and (isinstance(level, bool) or not isinstance(level, int)):
        _fail(lines, sp + ("level",), f"level must be an integer, got {level!r}")
    if dx is not None:
        dx = _number(dx, lines, sp + ("dx",), "dx")
    if not t_end > 0:
        _fail(lines, sp + ("t_end",), "t_end must be positive", ValidationError)
    snaps = tuple(_number(t, lines, sp + ("snapshot_times", i), "snapshot time")
                  for i, t in enumerate(solver.get("snapshot_times", []) or []))
    if any(not 0.0 <= t <= t_end for t in snaps):
        _fail(lines, sp + ("snapshot_times",), "snapshot times must lie in [0, t_end]", ValidationError)

    outputs = doc.get("outputs", {}) or {}
    case = doc.get("case")
    cfg = RunConfig(net, data, vertex_init, t_end, cfl, level, dx, snaps,
                    str(outputs.get("directory", "out")), bool(outputs.get("snapshots", True)),
                    bool(outputs.get("report", True)), None if case is None else str(case))
    try:
        cfg.grid()
    except ValidationError as exc:
        _fail(lines, sp + (("level",) if level is not None else ("dx",)), str(exc), ValidationError)
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML config; errors carry the offending line number."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ParseError(f"{where}{getattr(exc, 'problem', None) or exc}") from None
    if node is None:
        raise ParseError("line 1: empty config")
    return _from_tree(doc, _Lines(node))


def load_config(path_or_name: str) -> RunConfig:
    """Read a config file, or a bundled config by case name."""
    try:
        with open(path_or_name) as fh:
            text = fh.read()
    except FileNotFoundError:
        if path_or_name not in BUNDLED:
            raise
        text = bundled_text(path_or_name)
    return parse_config(text)


def bundled_text(name: str) -> str:
    return resources.files("netfv.configs").joinpath(f"{name}.yaml").read_text()


def _attachment_spec(end):
    return end if isinstance(end, str) else end.to_spec()


def _flux_spec(flux):
    spec = flux.to_spec()
    if "domain" in spec:
        spec["domain"] = [float(x) for x in spec["domain"]]
    return spec


def config_tree(cfg: RunConfig) -> dict:
    tree: dict[str, Any] = {}
    if cfg.case is not None:
        tree["case"] = cfg.case
    tree["network"] = {
        "vertices": list(cfg.network.vertices),
        "edges": [{"id": e.id, "flux": _flux_spec(e.flux), "length": float(e.length),
                   "tail": _attachment_spec(e.tail), "head": _attachment_spec(e.head)}
                  for e in cfg.network.edges],
    }
    tree["initial"] = {
        "edges": {k: {"breaks": list(pc.breaks), "values": list(pc.values)} for k, pc in cfg.data.items()},
        "vertices": dict(cfg.vertex_init),
    }
    solver: dict[str, Any] = {}
    if cfg.level is not None:
        solver["level"] = int(cfg.level)
    else:
        solver["dx"] = float(cfg.dx)
    solver.update(cfl_factor=float(cfg.cfl_factor), t_end=float(cfg.t_end),
                  snapshot_times=[float(t) for t in cfg.snapshot_times])
    tree["solver"] = solver
    tree["outputs"] = {"directory": cfg.output_dir, "snapshots": cfg.write_snapshots,
                       "report": cfg.write_report}
    return tree


def dump_config(cfg: RunConfig) -> str:
    """Serialize to YAML; floats are written with round-trip precision."""
    return yaml.safe_dump(config_tree(cfg), sort_keys=False, default_flow_style=None, width=100)


def case_config(case, level: int = 7, snapshot_times=(), output_dir: str | None = None) -> RunConfig:
    return RunConfig(case.network, dict(case.data), dict(case.vertex_init), case.t_end, 1.0,
                     level, None, tuple(snapshot_times), output_dir or f"out/{case.name}",
                     True, True, case.name)


def config_case(cfg: RunConfig):
    """The bundled case named by the config, or a reference-free case built from it."""
    from .cases import Case, get_case

    if cfg.case is not None:
        case = get_case(cfg.case)
        if case.network == cfg.network and dict(case.data) == cfg.data:
            return case
    return Case(cfg.case or "custom", cfg.network, cfg.data, cfg.vertex_init, cfg.t_end, None)
