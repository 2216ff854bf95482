"""Command-line front end: ``intreach <subcommand> [options]``.

CSV output starts with one ``# {json}`` metadata line (spec echo, seed,
version, settings, creation time), then a header row and data rows. JSON
output is ``{"meta": ..., "data": ...}``. Floats carry 17 significant
digits. Setting ``SOURCE_DATE_EPOCH`` pins the creation time, which makes
repeated runs byte-identical.

Exit status: 0 on success, 2 for an invalid spec or arguments, 3 for a
numerical failure. Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .boundary import BoundaryParams, boundary_point
from .errors import NumericalError, ReachError, SpecError
from .harness import (
    InputSchedule,
    center_point,
    containment_audit,
    mc_volume,
    overapprox_gap,
    random_cloud,
    simulate_endpoint,
)
from .implicit import implicit_in_state, implicit_poly, line_intersections, membership
from .model import SystemSpec, load_spec, spec_to_dict
from .support import support_batch, supporting_point

SUBCOMMANDS = ("support", "boundary", "implicit", "lines", "membership", "simulate", "cloud", "audit", "volume", "bench")
SUBCOMMAND_HELP = {
    "support": "support values (and supporting points) along directions",
    "boundary": "boundary samples of every block on a switch-time grid",
    "implicit": "implicit surface polynomials, in rho or state coordinates",
    "lines": "intersection counts of lines through the reach-set centre",
    "membership": "inside / boundary / outside classification of points",
    "simulate": "exact endpoint of a piecewise-constant input schedule",
    "cloud": "random trajectory endpoints",
    "audit": "duality-margin containment audit of a cloud",
    "volume": "Monte Carlo volume per block and in total",
    "bench": "volume and support overshoot of box or polytope outer sets",
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    spec: str | None = None
    t: float | None = None
    grid: int = 50
    samples: int | None = None
    segments: int = 4
    seed: int = 0
    dirs: str | None = None
    points: str | None = None
    schedule: str | None = None
    format: str = "csv"
    tol: float | None = None
    out: str | None = None
    r: int | None = None
    method: str = "box"
    directions: int | None = None
    figure: str | None = None
    supporting_points: bool = False

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(vars(ns)) - names
        if unknown:
            raise SpecError(f"unknown configuration fields: {sorted(unknown)}")
        return cls(**vars(ns))

    def settings(self) -> dict:
        """Effective settings for the metadata header (output paths excluded)."""
        d = asdict(self)
        for k in ("out", "figure", "subcommand"):
            d.pop(k)
        return d


# formatting -----------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return format(float(v), ".17g")
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return float(format(f, ".17g")) if np.isfinite(f) else str(f)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _created() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def _meta(cfg: RunConfig, spec: SystemSpec | None, extra: dict | None = None) -> dict:
    meta = {
        "tool": "intreach",
        "version": __version__,
        "subcommand": cfg.subcommand,
        "seed": cfg.seed,
        "settings": cfg.settings(),
        "spec": spec_to_dict(spec) if spec is not None else None,
        "created": _created(),
    }
    if extra:
        meta.update(extra)
    return _jsonable(meta)


@dataclass
class Table:
    header: list
    rows: list
    extra: dict | None = None
    data: object = None  # JSON payload; defaults to the rows as records

    def payload(self):
        if self.data is not None:
            return self.data
        return [dict(zip(self.header, row)) for row in self.rows]


def _emit(cfg: RunConfig, spec, table: Table, stream) -> None:
    meta = _meta(cfg, spec, table.extra)
    if cfg.format == "json":
        stream.write(json.dumps({"meta": meta, "data": _jsonable(table.payload())}, indent=2))
        stream.write("\n")
        return
    stream.write("# " + json.dumps(meta, separators=(",", ":")) + "\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])


def read_matrix(path: str, width: int | None = None, what: str = "rows") -> np.ndarray:
    """Numeric CSV without header; blank lines and ``#`` comments skipped."""
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read {what} file: {exc}") from None
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith("#"):
            continue
        try:
            rows.append([float(v) for v in rec if v.strip() != ""])
        except ValueError:
            raise SpecError(f"{what} file has a non-numeric entry: {rec}") from None
    if not rows:
        return np.empty((0, width or 0))
    if len({len(r) for r in rows}) != 1:
        raise SpecError(f"{what} file has rows of different lengths")
    M = np.array(rows)
    if width is not None and M.shape[1] != width:
        raise SpecError(f"{what} rows must have {width} entries, got {M.shape[1]}")
    return M


# subcommands ----------------------------------------------------------------


def _need_spec(cfg: RunConfig) -> SystemSpec:
    if cfg.spec is None:
        raise SpecError(f"{cfg.subcommand} needs --spec")
    spec = load_spec(cfg.spec)
    if cfg.t is not None:
        spec = spec.with_t(cfg.t)
    return spec


def cmd_support(cfg: RunConfig, spec: SystemSpec) -> Table:
    d = spec.d
    Y = read_matrix(cfg.dirs, d, "direction") if cfg.dirs else np.vstack([np.eye(d), -np.eye(d)])
    header = [f"y{i + 1}" for i in range(d)] + ["h"]
    with_points = cfg.supporting_points
    if with_points:
        header += [f"x{i + 1}" for i in range(d)]
    h = support_batch(spec, Y) if len(Y) else np.empty(0)
    rows = []
    for y, hv in zip(Y, h):
        row = list(y) + [hv]
        if with_points:
            row += list(supporting_point(spec, y))
        rows.append(row)
    return Table(header, rows)


def boundary_rows(spec: SystemSpec, grid: int) -> tuple[list, list]:
    """Rows ``block, sheet, s..., x...`` over the parameter grid; short blocks pad with blanks."""
    from itertools import combinations_with_replacement

    R = max(spec.r)
    t = float(spec.t)
    header = ["block", "sheet"] + [f"s{q}" for q in range(1, R)] + [f"x{k}" for k in range(1, R + 1)]
    rows = []
    g = np.linspace(0.0, t, grid)
    for j, b in enumerate(spec.blocks):
        for sheet in (1, -1):
            for idx in combinations_with_replacement(range(grid), b.r - 1):
                s = tuple(g[list(idx)])
                x = boundary_point(b, BoundaryParams(sheet, s), t, j).x
                pad_s = [None] * (R - b.r)
                rows.append([j, sheet, *s, *pad_s, *x, *pad_s])
    return header, rows


def cmd_boundary(cfg: RunConfig, spec: SystemSpec) -> Table:
    if cfg.grid < 1:
        raise SpecError("--grid must be >= 1")
    header, rows = boundary_rows(spec, cfg.grid)
    if cfg.figure:
        from .plotting import plot_boundary

        R = max(spec.r)
        recs = [(row[0], row[1], np.array([v for v in row[R + 1 :] if v is not None], float)) for row in rows]
        plot_boundary(recs, cfg.figure, title=f"t = {_fmt(spec.t)}")
    return Table(header, rows)


def cmd_implicit(cfg: RunConfig, spec: SystemSpec | None) -> Table:
    if spec is None and cfg.r is None:
        raise SpecError("implicit needs --r or --spec")
    orders = [cfg.r] if spec is None else sorted(set(spec.r))
    try:
        surfaces = [implicit_poly(r) for r in orders]
    except ValueError as exc:
        raise SpecError(str(exc)) from None
    data: dict = {"surfaces": [s.to_json() for s in surfaces]}
    header = ["kind", "block", "sheet", "coefficient", "monomial"]
    rows = []
    for s in surfaces:
        for exps, c in s.poly.sorted_terms():
            rows.append(["rho", None, None, float(c), _monomial(s.poly.variables, exps)])
    if spec is not None:
        xs = []
        for j, b in enumerate(spec.blocks):
            if b.mu == 0:
                continue
            for sheet in (1, -1):
                P = implicit_in_state(b, sheet, spec.t)
                terms = [{"exponents": list(e), "coefficient": float(c)} for e, c in P.sorted_terms()]
                xs.append({"block": j, "sheet": sheet, "variables": list(P.variables), "terms": terms})
                for e, c in P.sorted_terms():
                    rows.append(["x", j, sheet, float(c), _monomial(P.variables, e)])
        data["state_space"] = xs
    return Table(header, rows, data=data)


def _monomial(variables, exps) -> str:
    parts = [v if e == 1 else f"{v}^{e}" for v, e in zip(variables, exps) if e]
    return "*".join(parts) or "1"


def cmd_lines(cfg: RunConfig, spec: SystemSpec) -> Table:
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    n = cfg.samples or 100
    header = ["line", "block", "n_plus", "n_minus", "total", "generic"]
    rows = []
    t = float(spec.t)
    c_full = center_point(spec)
    for j, (b, c) in enumerate(zip(spec.blocks, spec.split(c_full))):
        if b.mu == 0:
            raise NumericalError(f"degenerate block {j} has no implicit surface")
        V = read_matrix(cfg.dirs, b.r, "direction") if cfg.dirs else rng.standard_normal((n, b.r))
        for i, v in enumerate(V):
            li = line_intersections(b, c, v, t)
            rows.append([i, j, *li.to_row()])
    return Table(header, rows)


def cmd_membership(cfg: RunConfig, spec: SystemSpec) -> Table:
    if not cfg.points:
        raise SpecError("membership needs --points")
    X = read_matrix(cfg.points, spec.d, "point")
    header = [f"x{i + 1}" for i in range(spec.d)] + ["overall"]
    header += [f"block{j}" for j in range(spec.m)] + [f"margin{j}" for j in range(spec.m)]
    rows = []
    for x in X:
        res = membership(spec, x, tol=cfg.tol)
        rows.append([*x, res.overall.value, *(m.value for m in res.blocks), *res.margins])
    return Table(header, rows)


def cmd_simulate(cfg: RunConfig, spec: SystemSpec) -> Table:
    if not cfg.schedule:
        raise SpecError("simulate needs --schedule (rows: start, end, u1..um)")
    M = read_matrix(cfg.schedule, 2 + spec.m, "schedule")
    if len(M) == 0:
        raise SpecError("schedule is empty")
    if np.any(M[1:, 0] != M[:-1, 1]):
        raise SpecError("schedule segments must be contiguous")
    sched = InputSchedule(np.concatenate([M[:, 0], M[-1:, 1]]), M[:, 2:])
    x = simulate_endpoint(spec, sched)
    return Table([f"x{i + 1}" for i in range(spec.d)], [list(x)])


def _cloud(cfg: RunConfig, spec: SystemSpec) -> np.ndarray:
    n = 10_000 if cfg.samples is None else cfg.samples
    return random_cloud(spec, spec.input_set, cfg.segments, n, cfg.seed)


def cmd_cloud(cfg: RunConfig, spec: SystemSpec) -> Table:
    C = _cloud(cfg, spec)
    if cfg.figure:
        from .plotting import plot_cloud

        plot_cloud(spec, C, cfg.figure, title=f"{len(C)} endpoints, {cfg.segments} segments")
    return Table([f"x{i + 1}" for i in range(spec.d)], [list(x) for x in C])


def cmd_audit(cfg: RunConfig, spec: SystemSpec) -> Table:
    C = read_matrix(cfg.points, spec.d, "point") if cfg.points else _cloud(cfg, spec)
    tol = 1e-9 if cfg.tol is None else cfg.tol
    rep = containment_audit(C, spec, tol=tol)
    if cfg.figure and len(C):
        from .plotting import plot_cloud

        plot_cloud(spec, C, cfg.figure, title=f"{rep.n_inside}/{rep.n_samples} inside")
    rows = [[i, m, int(m >= -tol)] for i, m in enumerate(rep.margins)]
    summary = rep.summary()
    data = {"summary": summary, "violations": rep.violations.tolist()}
    return Table(["index", "margin", "inside"], rows, extra={"summary": summary}, data=data)


def cmd_volume(cfg: RunConfig, spec: SystemSpec) -> Table:
    n = 100_000 if cfg.samples is None else cfg.samples
    est = mc_volume(spec, N=n, seed=cfg.seed)
    header = ["block", "volume", "stderr", "accepted", "samples", "box_volume"]
    rows = [[j, v.volume, v.stderr, v.accepted, v.samples, v.box_volume] for j, v in enumerate(est.blocks)]
    rows.append(["total", est.total, est.stderr, None, None, None])
    return Table(header, rows, data=est.to_dict())


def cmd_bench(cfg: RunConfig, spec: SystemSpec) -> Table:
    n = 100_000 if cfg.samples is None else cfg.samples
    method = {"box": "box", "bounding-box": "box", "polytope": "polytope", "support-polytope": "polytope"}.get(cfg.method)
    if method is None:
        raise SpecError(f"unknown --method {cfg.method!r}")
    dirs = read_matrix(cfg.dirs, spec.d, "direction") if cfg.dirs else None
    rep = overapprox_gap(spec, method=method, n_directions=cfg.directions, directions=dirs, N=n, seed=cfg.seed)
    d = rep.to_dict()
    return Table(list(d), [list(d.values())], data=d)


HANDLERS = {
    "support": cmd_support,
    "boundary": cmd_boundary,
    "implicit": cmd_implicit,
    "lines": cmd_lines,
    "membership": cmd_membership,
    "simulate": cmd_simulate,
    "cloud": cmd_cloud,
    "audit": cmd_audit,
    "volume": cmd_volume,
    "bench": cmd_bench,
}


# argument parsing -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SpecError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec", metavar="PATH", help="system spec (JSON)")
    common.add_argument("--t", type=float, metavar="FLOAT", help="override the horizon")
    common.add_argument("--grid", type=int, default=50, metavar="INT", help="boundary parameter grid size")
    common.add_argument("--samples", type=int, metavar="INT", help="sample / line count")
    common.add_argument("--segments", type=int, default=4, metavar="INT", help="input segments per trajectory")
    common.add_argument("--seed", type=int, default=0, metavar="INT")
    common.add_argument("--dirs", metavar="PATH", help="CSV of directions, one per row")
    common.add_argument("--points", metavar="PATH", help="CSV of states, one per row")
    common.add_argument("--schedule", metavar="PATH", help="CSV rows: start, end, u1..um")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, metavar="FLOAT", help="classification tolerance")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--r", type=int, metavar="INT", help="chain length for implicit without a spec")
    common.add_argument("--method", default="box", help="bench: box or polytope")
    common.add_argument("--directions", type=int, metavar="INT", help="bench: random polytope directions")
    common.add_argument("--figure", metavar="PATH", help="also render a figure to this file")
    common.add_argument("--supporting-points", action="store_true", help="support: add supporting points")
    p = _Parser(prog="intreach", description="Exact reach sets of integrator chains.")
    p.add_argument("--version", action="version", version=f"intreach {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=SUBCOMMAND_HELP[name])
    return p


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": code}) + "\n")
    return code


def run(argv=None) -> int:
    try:
        cfg = RunConfig.from_namespace(build_parser().parse_args(argv))
        spec = _need_spec(cfg) if (cfg.spec is not None or cfg.subcommand != "implicit") else None
        table = HANDLERS[cfg.subcommand](cfg, spec)
        if cfg.out:
            with open(cfg.out, "w", newline="") as fh:
                _emit(cfg, spec, table, fh)
        else:
            _emit(cfg, spec, table, sys.stdout)
    except (SpecError, OSError) as exc:
        return _fail(exc, 2)
    except (NumericalError, ArithmeticError) as exc:
        return _fail(exc, 3)
    except ReachError as exc:
        return _fail(exc, 3)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
