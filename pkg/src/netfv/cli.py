"""Command-line entry point: ``netfv run | eoc | germ-check``.

Exit codes: 0 success, 1 usage error, 2 invalid config or input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from pathlib import Path

from .analysis import eoc
from .config import config_case, load_config
from .errors import DomainViolation, NetFVError, ParseError, ValidationError
from .germ import (GermVector, in_monotone_germ, is_discrete_stationary, is_stationary,
                   mutual_consistency)
from .grid import mass, write_snapshot_csv
from .scheme import run

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_levels(text: str) -> list[int]:
    """``"3..10"`` or ``"3,5,7"`` to a strictly increasing list of levels."""
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split("..", 1))
            levels = list(range(a, b + 1))
        else:
            levels = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad --levels {text!r}; use a..b or a,b,c") from None
    if len(levels) < 2 or any(y <= x for x, y in zip(levels, levels[1:])):
        raise UsageError(f"--levels {text!r} must name at least two increasing levels")
    return levels


def _executor(threads: int):
    return ThreadPoolExecutor(threads) if threads > 1 else nullcontext(None)


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "cfl", None) is not None:
        if not 0.0 < args.cfl <= 1.0:
            raise ValidationError(f"--cfl must lie in (0, 1], got {args.cfl!r}")
        cfg.cfl_factor = args.cfl
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = cfg.initial_state(args.level)
    m0 = mass(state)
    with _executor(args.threads) as ex:
        result = run(state, cfg.t_end, cfg.cfl_factor, cfg.snapshot_times, executor=ex)
    if cfg.write_snapshots:
        write_snapshot_csv(state, out / "snapshot_initial.csv")
        for i, snap in enumerate(result.snapshots):
            write_snapshot_csv(snap, out / f"snapshot_{i:03d}.csv")
        write_snapshot_csv(result.state, out / "snapshot_final.csv")
        with open(out / "snapshots.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["file", "time"])
            for i, snap in enumerate(result.snapshots):
                w.writerow([f"snapshot_{i:03d}.csv", repr(snap.time)])
    rep = result.report
    if cfg.write_report:
        rep.write_csv(out / "run_report.csv")
        with open(out / "vertex_history.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex", "t", "value"])
            for v, hist in rep.vertex_history.items():
                for t, val in hist:
                    w.writerow([v, repr(t), repr(val)])
    m1 = mass(result.state)
    residual = m1 - m0 - (rep.boundary_influx - rep.boundary_outflux)
    budget = (f"initial_mass = {m0!r}\nfinal_mass = {m1!r}\n"
              f"boundary_influx = {rep.boundary_influx!r}\nboundary_outflux = {rep.boundary_outflux!r}\n"
              f"budget_residual = {residual!r}\n")
    (out / "budget.txt").write_text(budget)
    print(f"steps: {len(rep.steps)}  t_end: {result.state.time!r}  dx: {state.grid.dx!r}")
    print(budget, end="")
    print(f"outputs written to {out}")
    return EXIT_OK


def cmd_eoc(args) -> int:
    levels = parse_levels(args.levels)
    cfg = _load(args)
    case = config_case(cfg)
    if args.reference is not None:
        reference = args.reference if args.reference == "exact" else int(args.reference)
    else:
        reference = "exact" if case.exact is not None else levels[-1] + 3
    with _executor(args.threads) as ex:
        report = eoc(case, levels, cfg.cfl_factor, cfg.t_end, reference, executor=ex)
    print(report.table())
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "eoc.csv")
    print(f"reference: {'exact solution' if reference == 'exact' else f'level {reference}'}; "
          f"vertex cells excluded from the error")
    return EXIT_OK


def read_vectors(path, junction) -> list[GermVector]:
    """CSV with one column per slot label (``-n_in..-1, 1..n_out``) and an optional ``c0``."""
    labels = [str(k) for k in junction.labels]
    vectors = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = [c.strip() for c in reader.fieldnames or []]
        if sorted(set(cols) - {"c0"}) != sorted(labels):
            raise ParseError(f"{path}: columns {cols} do not match slot labels {labels} (+ optional c0)")
        for lineno, row in enumerate(reader, start=2):
            row = {k.strip(): v for k, v in row.items()}
            try:
                vals = [float(row[k]) for k in labels]
                c0 = float(row["c0"]) if row.get("c0") not in (None, "") else None
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            vectors.append(GermVector.from_values(junction, vals, c0))
    if not vectors:
        raise ParseError(f"{path}: no vectors")
    return vectors


def cmd_germ_check(args) -> int:
    cfg = _load(args)
    net = cfg.network
    vertex = args.vertex or net.vertices[0]
    if vertex not in net.vertices:
        raise ValidationError(f"unknown vertex {vertex!r}")
    junction = net.junction(vertex)
    vectors = read_vectors(args.vectors, junction)

    def mark(flag):
        return "pass" if flag else "fail"

    usable = []
    for i, c in enumerate(vectors):
        try:
            parts = [f"stationary={mark(is_stationary(junction, c))}"]
            parts.append("discrete_stationary=" + ("n/a" if c.c0 is None else
                                                    mark(is_discrete_stationary(junction, c))))
            parts.append(f"monotone_germ={mark(in_monotone_germ(junction, c))}")
            usable.append(True)
        except DomainViolation as exc:
            parts = [f"domain=fail ({exc})"]
            usable.append(False)
        print(f"vector {i}: " + "  ".join(parts))
    print("mutual consistency (1 consistent, 0 not, - outside domain):")
    for i, c in enumerate(vectors):
        row = " ".join("-" if not (usable[i] and usable[j]) else
                       "1" if mutual_consistency(junction, c, d) else "0"
                       for j, d in enumerate(vectors))
        print(f"  {i}: {row}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="netfv", description="Finite volume solver for conservation laws on networks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    threads = max(1, os.cpu_count() or 1)

    def common(sp):
        sp.add_argument("--config", required=True, help="YAML config file or bundled case name")
        sp.add_argument("--out", help="output directory (default: outputs.directory)")
        sp.add_argument("--threads", type=int, default=threads, help="worker threads for edge updates")

    r = sub.add_parser("run", help="run one simulation")
    common(r)
    r.add_argument("--cfl", type=float)
    r.add_argument("--level", type=int, help="override the configured grid level")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eoc", help="convergence study over grid levels")
    common(e)
    e.add_argument("--levels", required=True, help="a..b or a,b,c")
    e.add_argument("--cfl", type=float)
    e.add_argument("--reference", help="'exact' or a fine reference level")
    e.set_defaults(func=cmd_eoc)

    g = sub.add_parser("germ-check", help="check candidate stationary vectors at a vertex")
    g.add_argument("--config", required=True)
    g.add_argument("--vectors", required=True, help="CSV, one vector per row")
    g.add_argument("--vertex")
    g.set_defaults(func=cmd_germ_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NetFVError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
