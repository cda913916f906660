"""Command line interface.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
import warnings

import numpy as np

from . import report as rep
from .clifford import build_structure, hurwitz_radon
from .config import RunConfig
from .errors import FallbackWarning, HTypeError, QuadratureError
from .estimates import hadamard_descent_check, heat_residual, ratio_sweep
from .geometry import distance, geodesic, geodesic_point
from .group import GroupPoint, jz_identities
from .heatkernel import METHODS, KernelEvaluation, QuadratureConfig, kernel

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
ALGEBRA_TOL = 1e-12


class InputError(Exception):
    pass


def _vector(text: str | None, size: int, name: str) -> np.ndarray:
    if text is None or text.strip() == "":
        return np.zeros(size)
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{name} must be comma-separated reals, got {text!r}") from None
    if len(vals) != size:
        raise InputError(f"{name} needs {size} components, got {len(vals)}")
    return np.array(vals)


def _point(args) -> GroupPoint:
    return GroupPoint(_vector(args.x, 2 * args.n, "x"), _vector(args.z, args.m, "z"))


def _num(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.ndarray):
        return [_num(u) for u in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_num(u) for u in v]
    if isinstance(v, np.integer):
        return int(v)
    return v


def _emit(doc, out=None):
    out = out or sys.stdout
    out.write(json.dumps(_num_tree(doc), indent=1, allow_nan=False) + "\n")


def _num_tree(doc):
    if isinstance(doc, dict):
        return {k: _num_tree(v) for k, v in doc.items()}
    if isinstance(doc, list) and any(isinstance(v, dict) for v in doc):
        return [_num_tree(v) for v in doc]
    return _num(doc)


def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(rel_tol=args.rel_tol, abs_tol=args.abs_tol)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("HTYPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"HTYPE_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


# ------------------------------------------------------------------ commands

def cmd_algebra(args) -> int:
    s = build_structure(args.n, args.m)
    rho = hurwitz_radon(2 * args.n)
    errs = jz_identities(s, samples=args.samples, seed=args.seed)
    ok = all(v <= ALGEBRA_TOL for v in errs.values())
    print(f"n={args.n} m={args.m} rho(2n)={rho} admissible=true")
    for name, err in errs.items():
        print(f"{name:14s} {'pass' if err <= ALGEBRA_TOL else 'FAIL'}  max_err={err:.3e}")
    print("result:", "pass" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERIC


def _geodesic_doc(sol):
    return {"xi0": sol.xi0, "eta0": sol.eta0, "theta": sol.theta, "k": sol.k, "length": sol.length}


def cmd_distance(args) -> int:
    s = build_structure(args.n, args.m)
    g = _point(args)
    d = distance(s, g)
    doc = {"n": args.n, "m": args.m, "x": g.x, "z": g.z, "d": d}
    if g.x_norm == 0.0 and g.z_norm == 0.0:
        doc.update(theta=0.0, geodesic=None)
    else:
        sol = geodesic(s, g)
        doc.update(theta=sol.theta, geodesic=_geodesic_doc(sol))
    _emit(doc)
    return EXIT_OK


def cmd_geodesic(args) -> int:
    s = build_structure(args.n, args.m)
    g = _point(args)
    sol = geodesic(s, g, k=args.k)
    ts = np.linspace(0.0, 1.0, args.steps + 1)
    path = [geodesic_point(sol, s, float(t)) for t in ts]
    doc = _geodesic_doc(sol)
    doc["path"] = [{"t": float(t), "x": p.x, "z": p.z} for t, p in zip(ts, path)]
    _emit(doc)
    return EXIT_OK


def _eval_doc(ev: KernelEvaluation):
    return {"p": ev.p, "q1": ev.q1, "q2": ev.q2, "grad_norm": ev.grad_norm,
            "err_estimate": ev.err_estimate, "method": ev.method,
            "details": {k: v for k, v in ev.details.items() if isinstance(v, (int, float, bool))}}


def cmd_kernel(args) -> int:
    g = _point(args)
    cfg = _quad(args)
    if args.method == "all":
        methods = list(METHODS)
    else:
        methods = [m.strip() for m in args.method.split(",")]
    for m in methods:
        if m != "auto" and m not in METHODS:
            raise InputError(f"unknown method {m!r}")
    evals = {}
    skipped = {}
    for m in methods:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", FallbackWarning)
                evals[m] = kernel((args.n, args.m), args.t, g, cfg, method=m)
        except QuadratureError:
            raise
        except HTypeError as exc:
            if len(methods) == 1:
                raise
            skipped[m] = str(exc)
    doc = {"n": args.n, "m": args.m, "t": args.t, "x_norm": g.x_norm, "z_norm": g.z_norm}
    if len(methods) == 1:
        doc.update(_eval_doc(evals[methods[0]]))
    else:
        doc["evaluations"] = {m: _eval_doc(ev) for m, ev in evals.items()}
        doc["skipped"] = skipped
        doc["agreement"] = [
            {"a": a, "b": b, "delta": abs(evals[a].p - evals[b].p),
             "relative": abs(evals[a].p - evals[b].p) / abs(evals[a].p),
             "combined_err": evals[a].err_estimate + evals[b].err_estimate}
            for a, b in itertools.combinations(evals, 2)
        ]
    _emit(doc)
    return EXIT_OK


def _sweep_config(args) -> RunConfig:
    base = RunConfig.from_file(args.config) if args.config else RunConfig()
    flags = {k: getattr(args, k) for k in (
        "n", "m", "t", "target", "d_lo", "d_hi", "n_points", "rel_tol", "abs_tol",
        "output", "format")}
    return RunConfig.from_mapping(flags, base)


def run_sweep(cfg: RunConfig, threads: int = 1) -> tuple[str, object]:
    """Run a sweep campaign; returns the serialized output and the report."""
    report = ratio_sweep(cfg.dims, cfg.t, cfg.d_lo, cfg.d_hi, cfg.n_points, cfg.target,
                         cfg.quadrature(), threads=threads)
    rows = rep.report_rows(report)
    if cfg.format == "json":
        summary = {"ratio_min": report.ratio_min, "ratio_max": report.ratio_max,
                   "failures": len(report.failures)}
        text = rep.format_json(rows, cfg.as_dict(), summary)
    else:
        text = rep.format_csv(rows)
    return text, report


def cmd_sweep(args) -> int:
    cfg = _sweep_config(args)
    text, report = run_sweep(cfg, _threads(args))
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    print(f"ratio_min={report.ratio_min:.17g} ratio_max={report.ratio_max:.17g} "
          f"points={len(report.grid)} failures={len(report.failures)}", file=sys.stderr)
    return EXIT_NUMERIC if report.failures else EXIT_OK


def _read_points(path) -> list[tuple[float, float]]:
    pts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected '|x| |z|'")
            try:
                r, z = float(parts[0]), float(parts[1])
            except ValueError:
                raise InputError(f"{path}:{lineno}: not a number") from None
            if r < 0 or z < 0:
                raise InputError(f"{path}:{lineno}: norms must be nonnegative")
            pts.append((r, z))
    return pts


def cmd_descent(args) -> int:
    pts = _read_points(args.points)
    cfg = _quad(args)
    print("x_norm,z_norm,p_lhs,p_rhs,rel_err")
    for r, z in pts:
        err, lhs, rhs = hadamard_descent_check((args.n, args.m), (r, z), cfg, return_values=True)
        print(",".join(format(v, ".17g") for v in (r, z, lhs, rhs, err)))
    return EXIT_OK


def cmd_residual(args) -> int:
    g = _point(args)
    res = heat_residual((args.n, args.m), args.t, g, args.h)
    _emit({"n": args.n, "m": args.m, "t": args.t, "x": g.x, "z": g.z, "h": args.h,
           "residual": res})
    return EXIT_OK


# ------------------------------------------------------------------ parser

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="htype", description="H-type groups: geometry and heat kernel.")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes for sweeps (default: $HTYPE_THREADS or all cores)")
    sub = p.add_subparsers(dest="command", required=True)

    def dims(sp):
        sp.add_argument("n", type=_positive_int)
        sp.add_argument("m", type=_positive_int)

    def point(sp):
        sp.add_argument("--x", help="horizontal coordinates, comma-separated (default 0)")
        sp.add_argument("--z", help="central coordinates, comma-separated (default 0)")

    def tolerances(sp):
        sp.add_argument("--rel-tol", type=float, default=1e-10)
        sp.add_argument("--abs-tol", type=float, default=1e-14)

    sp = sub.add_parser("algebra", help="build J_z generators and check their identities")
    dims(sp)
    sp.add_argument("--samples", type=_positive_int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_algebra)

    sp = sub.add_parser("distance", help="distance from the origin and its geodesic")
    dims(sp)
    point(sp)
    sp.set_defaults(func=cmd_distance)

    sp = sub.add_parser("geodesic", help="sample the geodesic from the origin")
    dims(sp)
    point(sp)
    sp.add_argument("--k", type=_positive_int, default=1, help="branch index when x = 0")
    sp.add_argument("--steps", type=_positive_int, default=10)
    sp.set_defaults(func=cmd_geodesic)

    sp = sub.add_parser("kernel", help="evaluate p_t and its gradient")
    dims(sp)
    sp.add_argument("t", type=float)
    point(sp)
    sp.add_argument("--method", default="auto",
                    help="auto, one of %s, a comma list, or 'all' to compare" % ", ".join(METHODS))
    tolerances(sp)
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("sweep", help="ratio sweep against the two-sided bounds")
    sp.add_argument("--config", help="key = value file; flags override it")
    sp.add_argument("--n", type=_positive_int)
    sp.add_argument("--m", type=_positive_int)
    sp.add_argument("--t", type=float)
    sp.add_argument("--target", choices=("kernel", "gradient", "vertical"))
    sp.add_argument("--d-lo", type=float)
    sp.add_argument("--d-hi", type=float)
    sp.add_argument("--n-points", type=_positive_int)
    sp.add_argument("--rel-tol", type=float)
    sp.add_argument("--abs-tol", type=float)
    sp.add_argument("--output", help="output path, '-' for stdout")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.add_argument("--threads", type=_positive_int, default=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("descent", help="Hadamard descent check on a points file")
    dims(sp)
    sp.add_argument("points", help="file with one '|x| |z|' pair per line")
    tolerances(sp)
    sp.set_defaults(func=cmd_descent)

    sp = sub.add_parser("residual", help="heat equation residual by finite differences")
    dims(sp)
    sp.add_argument("t", type=float)
    point(sp)
    sp.add_argument("--h", type=float, default=None, help="step (default 1e-3 max(1, |g|))")
    sp.set_defaults(func=cmd_residual)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QuadratureError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, HTypeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
