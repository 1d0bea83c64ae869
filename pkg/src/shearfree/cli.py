"""Command line interface: ``shearfree {classify,invariants,curvature,verify}``.

Input is a catalog entry (``--catalog NAME --param k=v``), a structure file
(``--file``) or a metric file (``--metric-file``).  Reports are JSON (the
default) or CSV; both are deterministic for fixed input, seed and order.

Exit codes: 0 success, 1 a verification expectation failed, 2 bad input,
3 a numerical failure (singular jet, exhausted order, sampling failure).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from . import catalog as cat
from . import invariants as inv
from . import spacetime as st
from .congruence import Branch, BranchMismatch, OrientedCongruence, classify_branch, structure_functions
from .expr import ParseError, UnboundIdentifier, eval_value, parse
from .forms import Chart, OneForm, SamplingError, complex_shorthands
from .jets import OrderExhausted

SCHEMA_VERSION = 1
DEFAULT_ORDER = 6
DEFAULT_POINTS = 16
DEFAULT_TOL = 1e-6

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class InputError(ValueError):
    """Malformed command line or input document."""


# ----------------------------------------------------------------------
# input documents


def _chart_from_dict(d: Mapping[str, Any], dim: int) -> Chart:
    try:
        names = tuple(d["vars"])
    except (KeyError, TypeError):
        raise InputError("chart needs a 'vars' list") from None
    if len(names) != dim:
        raise InputError(f"chart needs {dim} variables, got {len(names)}")
    bounds = d.get("bounds", [[-1, 1]] * dim)
    if len(bounds) != dim or any(len(b) != 2 for b in bounds):
        raise InputError("chart 'bounds' must hold one [lo, hi] pair per variable")
    defs = {}
    if "x" in names and "y" in names and "z" not in names and "zb" not in names:
        defs = complex_shorthands()
    try:
        return Chart(names, tuple(tuple(b) for b in bounds), domain=d.get("domain", ""), defs=defs)
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise InputError(f"chart: {exc}") from None


def _exprs(items, n: int, what: str) -> tuple[str, ...]:
    if not isinstance(items, list) or len(items) != n or not all(isinstance(s, (str, int, float)) for s in items):
        raise InputError(f"{what} must be a list of {n} expression strings")
    out = tuple(str(s) for s in items)
    for s in out:
        parse(s)
    return out


def _params(d) -> dict[str, float]:
    if d is None:
        return {}
    if not isinstance(d, dict) or not all(isinstance(v, (int, float)) for v in d.values()):
        raise InputError("'params' must map names to numbers")
    return {str(k): float(v) for k, v in d.items()}


def load_structure(doc: Mapping[str, Any], check_points: int = 4) -> OrientedCongruence:
    """Build an oriented congruence from a structure document."""
    if not isinstance(doc, dict) or "lambda" not in doc or "mu" not in doc:
        raise InputError("structure file needs 'chart', 'lambda' and 'mu'")
    chart = _chart_from_dict(doc.get("chart", {}), 3)
    lam = _exprs(doc["lambda"], 3, "'lambda'")
    mu = _exprs(doc["mu"], 3, "'mu'")
    c = OrientedCongruence(chart, OneForm.of(*lam), OneForm.of(*mu), _params(doc.get("params")), doc.get("name", ""))
    try:
        for pt in c.sample(check_points, seed=0):
            L, _ = c.forms_at(pt, 0)
            v = np.asarray(L.value)
            if np.max(np.abs(v.imag)) > 1e-10 * max(1.0, float(np.max(np.abs(v)))):
                raise InputError("lambda must be real-valued")
    except UnboundIdentifier as exc:
        raise InputError(f"unbound identifier {exc}") from None
    return c


def load_metric(doc: Mapping[str, Any]) -> st.MetricItem:
    """Build a metric from ``{"metric": {chart, coframe, eta, ...}}``."""
    if not isinstance(doc, dict) or "metric" not in doc:
        raise InputError("metric file needs a 'metric' object")
    m = doc["metric"]
    if not isinstance(m, dict) or "coframe" not in m:
        raise InputError("'metric' needs 'chart' and 'coframe'")
    chart = _chart_from_dict(m.get("chart", {}), 4)
    rows = m["coframe"]
    if not isinstance(rows, list) or len(rows) != 4:
        raise InputError("'coframe' must hold four rows of four expressions")
    forms = tuple(OneForm.of(*_exprs(r, 4, "each coframe row")) for r in rows)
    eta = np.asarray(m.get("eta", st.PAIRING.tolist()), dtype=float)
    if eta.shape != (4, 4) or not np.allclose(eta, eta.T):
        raise InputError("'eta' must be a symmetric 4x4 matrix")
    weight = m.get("weight")
    if weight is not None:
        parse(str(weight))
    null_coord = m.get("null_coord")
    if null_coord is not None and null_coord not in range(4):
        raise InputError("'null_coord' must be 0..3")
    g = st.Metric4(chart, forms, eta, _params(m.get("params")), m.get("name", ""),
                   None if weight is None else str(weight), null_coord)
    return st.MetricItem(g, float(m.get("Lambda", 0.0)))


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def parse_params(items: Sequence[str] | None) -> dict[str, float]:
    """``["a=1,b=-(3^(1/3))", "c=2"]`` -> ``{"a": 1.0, "b": -1.44…, "c": 2.0}``.

    Unary minus binds tighter than ``^``, so ``-3^(1/3)`` is a complex cube root
    and is rejected.
    """
    out: dict[str, float] = {}
    for item in items or ():
        for part in item.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise InputError(f"--param expects name=value, got {part!r}")
            k, v = part.split("=", 1)
            val = eval_value(parse(v), (), {}, ())
            if abs(val.imag) > 0:
                raise InputError(f"parameter {k.strip()} must be real")
            out[k.strip()] = float(val.real)
    return out


# ----------------------------------------------------------------------
# serialization


def _num(v) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        if v.imag == 0.0:
            return _num(v.real)
        return [_num(v.real), _num(v.imag)]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {str(k): _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    return v


def _flatten(prefix: str, v, out: dict) -> None:
    if isinstance(v, dict):
        for k in sorted(v):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v[k], out)
    elif isinstance(v, list) and len(v) == 2 and all(isinstance(x, float) for x in v) and prefix:
        out[f"{prefix}.re"], out[f"{prefix}.im"] = v
    elif isinstance(v, list):
        for i, x in enumerate(v):
            _flatten(f"{prefix}.{i}", x, out)
    else:
        out[prefix] = v


def _csv(rows: list[dict]) -> str:
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow(["" if r.get(c) is None else r.get(c) for c in cols])
    return buf.getvalue()


def _point_row(i: int, pt, names) -> dict:
    row = {"point": i}
    for n, x in zip(names, pt):
        row[f"coord.{n}"] = x
    return row


# ----------------------------------------------------------------------
# commands


def _header(args, command: str) -> dict:
    src: dict[str, Any] = {}
    if args.catalog:
        src["catalog"] = args.catalog
    if getattr(args, "file", None):
        src["file"] = args.file
    if getattr(args, "metric_file", None):
        src["metric_file"] = args.metric_file
    if args.param:
        src["params"] = dict(sorted(parse_params(args.param).items()))
    return {
        "tool": "shearfree",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "input": src,
        "seed": args.seed,
        "order": args.order,
        "points": args.points,
        "tol": args.tol,
    }


def _congruence_input(args) -> tuple[OrientedCongruence, cat.CatalogItem | None]:
    if bool(args.catalog) == bool(args.file):
        raise InputError("give exactly one of --catalog or --file")
    if args.file:
        if args.param:
            raise InputError("--param applies to catalog entries only")
        return load_structure(_read_json(args.file)), None
    item = cat.catalog_get(args.catalog, parse_params(args.param))
    if item.entry.kind != "congruence":
        raise InputError(f"{args.catalog} is a metric entry; use the curvature command")
    return item.obj, item


def _metric_input(args) -> tuple[st.MetricItem, cat.CatalogItem | None]:
    if bool(args.catalog) == bool(args.metric_file):
        raise InputError("give exactly one of --catalog or --metric-file")
    if args.metric_file:
        if args.param:
            raise InputError("--param applies to catalog entries only")
        return load_metric(_read_json(args.metric_file)), None
    item = cat.catalog_get(args.catalog, parse_params(args.param))
    if item.entry.kind != "metric4":
        raise InputError(f"{args.catalog} is a congruence entry; metrics are built by the metric4 entries")
    return item.obj, item


def cmd_classify(args) -> tuple[dict, list[dict], int]:
    c, _ = _congruence_input(args)
    tol = 1e-8 if args.tol is None else args.tol
    bc = classify_branch(c, n_points=args.points, tol=tol, seed=args.seed)
    rep = _header(args, "classify")
    rep.update(bc.to_dict())
    row = {"branch": bc.branch.value}
    row.update({k: bc.witness[k] for k in ("n_points", "max_abs_a", "max_abs_s", "scale", "tol", "threshold")})
    return rep, [row], EXIT_OK


def _invariants_at(c: OrientedCongruence, pt, branch: Branch, order: int) -> dict:
    out: dict[str, Any] = {}
    if branch == Branch.TwistOnly:
        r = inv.ts_invariants(c, pt, order=order)
        out["ts"] = r.to_dict()
        small = abs(r.k2) <= 1e-8 * max(1.0, r.scale)
        try:
            if small:
                out["k1_branch"] = inv.ts_reduce_k1_branch(c, pt).to_dict()
            else:
                out["k2_branch"] = inv.ts_reduce_k2_branch(c, pt).to_dict()
        except (BranchMismatch, ArithmeticError) as exc:
            out["reduction_error"] = f"{type(exc).__name__}: {exc}"
    elif branch == Branch.ShearOnly:
        out["st"] = inv.st_invariants(c, pt, order=order).to_dict()
        try:
            out["st_reduced"] = inv.st_reduce(c, pt).to_dict()
        except (ValueError, ArithmeticError) as exc:
            out["reduction_error"] = f"{type(exc).__name__}: {exc}"
    else:
        out["generic"] = inv.generic_invariants(c, pt, order=order).to_dict()
    return out


def cmd_invariants(args) -> tuple[dict, list[dict], int]:
    c, item = _congruence_input(args)
    tol = 1e-8 if args.tol is None else args.tol
    bc = classify_branch(c, n_points=max(8, args.points), tol=tol, seed=args.seed)
    if bc.branch == Branch.TwistFreeShearFree:
        raise BranchMismatch("twist-free shear-free structures have no local invariants")
    rep = _header(args, "invariants")
    rep["branch"] = bc.branch.value
    pts = c.sample(args.points, seed=args.seed)
    table, rows = [], []
    for i, pt in enumerate(pts):
        vals = _num(_invariants_at(c, pt, bc.branch, args.order))
        if item is not None:
            q = cat.compute_quantities(item, pt, item.entry.pipelines)
            vals["catalog"] = _num(dict(sorted(q.items())))
        table.append({"point": list(pt), "values": vals})
        row = _point_row(i, pt, c.chart.names)
        _flatten("", vals, row)
        rows.append(row)
    rep["per_point"] = table
    return rep, rows, EXIT_OK


def _curvature_order(args) -> int:
    need = 4 if args.bach else 2
    if args.order is None:
        return need
    if args.order < need:
        raise OrderExhausted(
            f"curvature{' with Bach' if args.bach else ''} needs jet order {need}; got --order {args.order}"
        )
    return args.order


def cmd_curvature(args) -> tuple[dict, list[dict], int]:
    mi, _ = _metric_input(args)
    g = mi.metric
    order = _curvature_order(args)
    tol = 1e-7 if args.tol is None else args.tol
    rep = _header(args, "curvature")
    rep["order_used"] = order
    rep["Lambda"] = mi.Lambda
    table, rows = [], []
    for i, pt in enumerate(mi.sample(args.points, seed=args.seed)):
        cb = st.curvature(g, pt, order - 2)
        ws = st.weyl_spinors(g, pt, cb)
        pv = st.petrov(ws, tol=tol)
        er = st.einstein_residual(g, mi.Lambda, pt, cb)
        sig = g.signature(pt)
        entry: dict[str, Any] = {
            "point": list(pt),
            "signature": list(sig),
            "psi": [[p.real, p.imag] for p in ws.psi],
            "tetrad_error": ws.normalization,
            "petrov": pv.to_dict(),
            "ricci_norm": cb.ricci_norm(),
            "ricci_scalar": complex(cb.ricci_scalar.value).real,
            "einstein": er.to_dict() | {"ok": er.relative < tol},
            "riemann_symmetry": dict(sorted(cb.symmetry_residuals().items())),
        }
        if args.bach:
            B = st.bach(g, pt, cb)
            B2 = st.bach_via_cotton(g, pt, cb)
            scale = max(1.0, cb.scale() ** 2)
            entry["bach"] = {
                "max": float(np.max(np.abs(B))) / scale,
                "vanishes": float(np.max(np.abs(B))) / scale < tol,
                "frame": st.frame_components(g, pt, B).real.tolist(),
                "route_difference": float(np.max(np.abs(B - B2))) / scale,
            }
        entry = _num(entry)
        table.append(entry)
        row = _point_row(i, pt, g.chart.names)
        for k, p in enumerate(ws.psi):
            row[f"psi{k}.re"], row[f"psi{k}.im"] = p.real, p.imag
        row["petrov"] = pv.type
        row["ricci_norm"] = entry["ricci_norm"]
        row["ricci_scalar"] = entry["ricci_scalar"]
        row["einstein_relative"] = entry["einstein"]["relative"]
        row["einstein_Phi"] = entry["einstein"]["Phi"]
        if args.bach:
            row["bach_max"] = entry["bach"]["max"]
            row["bach_route_difference"] = entry["bach"]["route_difference"]
        rows.append(row)
    rep["per_point"] = table
    types = sorted({t["petrov"]["type"] for t in table})
    rep["petrov_types"] = types
    return rep, rows, EXIT_OK


def _verify_job(job: tuple[str, dict, int | None, int, float | None]) -> dict:
    name, params, n, seed, tol = job
    return cat.catalog_verify(name, params, n_points=n, seed=seed, tol=tol).to_dict()


def _verify_jobs(args) -> list[tuple[str, dict, int | None, int, float | None]]:
    cat._load_metric_entries()
    names = cat.catalog_names()
    only: list[str] = []
    for item in (args.only or []) + ([args.catalog] if args.catalog else []):
        only.extend(s.strip() for s in item.split(",") if s.strip())
    for n in only:
        if n not in cat.ENTRIES:
            raise InputError(f"unknown catalog entry {n!r}")
    if only:
        names = [n for n in names if n in only]
    params = parse_params(args.param)
    n_points = args.points_given
    jobs = []
    for n in names:
        if params:
            if len(names) != 1:
                raise InputError("--param with verify needs a single entry (--only NAME)")
            sets = [params]
        else:
            sets = [{}] + [dict(s) for s in cat.ENTRIES[n].sweep]
        for p in sets:
            jobs.append((n, p, n_points, args.seed, args.tol))
    return jobs


def cmd_verify(args) -> tuple[dict, list[dict], int]:
    jobs = _verify_jobs(args)
    workers = args.jobs if args.jobs > 0 else min(len(jobs), os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(_verify_job, jobs))
    else:
        reports = [_verify_job(j) for j in jobs]
    rep = _header(args, "verify")
    rep["reports"] = _num(reports)
    failed = [f"{r['name']}{_pstr(r['params'])}" for r in reports if not r["ok"]]
    rep["n_runs"] = len(reports)
    rep["n_failed"] = len(failed)
    rep["failed"] = failed
    rep["ok"] = not failed
    rows = []
    for r in reports:
        base = {"name": r["name"], "params": json.dumps(r["params"], sort_keys=True)}
        if r.get("error"):
            rows.append(base | {"key": "error", "expected": "", "max_error": "", "n": 0, "ok": False, "note": r["error"]})
        for ch in r["checks"]:
            rows.append(base | {k: ch.get(k, "") for k in ("key", "expected", "max_error", "n", "ok", "note")})
    return rep, rows, EXIT_OK if not failed else EXIT_VERIFY


def _pstr(p: Mapping[str, float]) -> str:
    return "(" + ", ".join(f"{k}={v:g}" for k, v in sorted(p.items())) + ")"


COMMANDS = {
    "classify": cmd_classify,
    "invariants": cmd_invariants,
    "curvature": cmd_curvature,
    "verify": cmd_verify,
}


# ----------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--order", type=int, default=None, help="jet truncation order")
    common.add_argument("--points", type=int, default=None, help="number of sample points")
    common.add_argument("--tol", type=float, default=None, help="tolerance for verdicts")
    common.add_argument("--seed", type=int, default=0, help="sampling seed")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--catalog", default=None, help="catalog entry name")
    common.add_argument("--param", action="append", default=[], help="name=value[,name=value]")

    p = _Parser(prog="shearfree", description="Invariants and curvature of shear-free congruence structures.")
    p.add_argument("--version", action="version", version=f"shearfree {__version__}")
    p.add_argument("--list", action="store_true", help="print the catalog as JSON and exit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name in ("classify", "invariants"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--file", default=None, help="structure file (JSON)")
    sp = sub.add_parser("curvature", parents=[common])
    sp.add_argument("--metric-file", default=None, help="metric file (JSON)")
    sp.add_argument("--bach", action="store_true", help="also compute the Bach tensor")
    sp = sub.add_parser("verify", parents=[common])
    sp.add_argument("--only", action="append", default=[], help="restrict to these entries (comma separated)")
    sp.add_argument("--jobs", type=int, default=0, help="worker processes (0: one per CPU)")
    return p


def _finish_args(args) -> None:
    args.points_given = args.points
    if args.points is None:
        args.points = DEFAULT_POINTS
    if args.command != "curvature" and args.order is None:
        args.order = DEFAULT_ORDER
    if args.points <= 0:
        raise InputError("--points must be positive")
    if args.order is not None and args.order < 0:
        raise InputError("--order must be non-negative")
    if args.tol is not None and not args.tol > 0:
        raise InputError("--tol must be positive")


def render(rep: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        return _csv([_num(r) for r in rows])
    return json.dumps(_num(rep), indent=2, sort_keys=False) + "\n"


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        if args.list:
            out.write(cat.catalog_json() + "\n")
            return EXIT_OK
        if not args.command:
            raise InputError("a command is required: classify, invariants, curvature or verify")
        _finish_args(args)
        rep, rows, code = COMMANDS[args.command](args)
        text = render(rep, rows, args.format)
        if args.output:
            Path(args.output).write_text(text)
        else:
            out.write(text)
        return code
    except ParseError as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_INPUT
    except (InputError, cat.CatalogError, UnboundIdentifier, BranchMismatch) as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (ArithmeticError, SamplingError, np.linalg.LinAlgError) as exc:
        err.write(f"numeric failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
