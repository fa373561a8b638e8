"""Command line interface.

Subcommands: coeffs, kernel, kl, sweep, fit, validate.  Exit codes: 0 on
success, 1 when a numeric check or accuracy target fails, 2 on usage errors,
3 when independent computations of the same quantity disagree.

All floating point output is rendered at 17 significant digits so repeated
runs are byte-identical.
"""

import argparse
import json
import math
import sys

import numpy as np

from .errors import (AccuracyError, ConditioningError, ConsistencyError,
                     InvalidInputError)
from .expansion import c0, expansion_from_jet
from .manifolds import dimension, heat_kernel, parse_manifold, volume, curvature_jet
from .numeric import (QuadratureConfig, fit_coefficients, kl_numeric,
                      parse_sweep_csv, render_sweep_csv, sweep)
from .tensors import load_jet
from .validate import run_checks

_AGREE_TOL = 1e-8


def _fmt(x):
    return "%.17g" % x


def _render_json(obj, indent=0):
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return _fmt(f) if math.isfinite(f) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [_render_json(v, indent + 1) for v in obj]
        if all(len(s) < 24 and "\n" not in s for s in items) and len(items) <= 8:
            return "[" + ", ".join(items) + "]"
        inner = ",\n".join(pad + "  " + s for s in items)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(pad + "  " + json.dumps(str(k)) + ": " + _render_json(v, indent + 1)
                           for k, v in obj.items())
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError("cannot render %r" % type(obj))


def _print_json(obj, out):
    out.write(_render_json(obj) + "\n")


def _jet_for(args, parser):
    if (args.manifold is None) == (args.jet is None):
        parser.error("exactly one of --manifold or --jet is required")
    if args.manifold is not None:
        spec = parse_manifold(args.manifold)
        return curvature_jet(spec), volume(spec)
    return load_jet(args.jet), None


def _cmd_coeffs(args, parser, out):
    jet, vol = _jet_for(args, parser)
    if args.method in ("closed", "both"):
        closed = expansion_from_jet(jet, method="closed_form", vol=vol)
    if args.method in ("wick", "both"):
        wick = expansion_from_jet(jet, method="wick", vol=vol)
    if args.method == "closed":
        _print_json(closed.to_json_obj(), out)
        return 0
    if args.method == "wick":
        _print_json(wick.to_json_obj(), out)
        return 0
    disc = max(abs(a - b) for a, b in zip(closed.c, wick.c))
    obj = {
        "d": jet.dim,
        "vol": vol,
        "method": "both",
        "closed_form": list(closed.c),
        "wick": list(wick.c),
        "max_discrepancy": disc,
    }
    _print_json(obj, out)
    if disc > _AGREE_TOL:
        raise ConsistencyError("closed-form and wick coefficients disagree by %.3e "
                               "(tolerance %.0e)" % (disc, _AGREE_TOL))
    return 0


def _parse_coords(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise InvalidInputError("cannot parse coordinates %r" % text)


def _cmd_kernel(args, parser, out):
    spec = parse_manifold(args.manifold)
    coords = _parse_coords(args.s)
    s = coords[0] if len(coords) == 1 else coords
    ev = heat_kernel(spec, args.t, s, tol=args.tol)
    obj = {
        "t": ev.t,
        "s": list(coords),
        "q": ev.q,
        "terms": ev.terms,
        "tail_bound": ev.tail_bound,
    }
    _print_json(obj, out)
    return 0


def _cmd_kl(args, parser, out):
    spec = parse_manifold(args.manifold)
    cfg = QuadratureConfig(tol=args.quad_tol)
    val = kl_numeric(spec, args.t, cfg, kernel_tol=args.tol)
    out.write(_fmt(val) + "\n")
    return 0


def _cmd_sweep(args, parser, out):
    spec = parse_manifold(args.manifold)
    if args.tmin <= 0 or args.tmax <= args.tmin:
        parser.error("need 0 < tmin < tmax")
    if args.points < 1:
        parser.error("points must be >= 1")
    grid = np.geomspace(args.tmin, args.tmax, args.points)
    rows = sweep(spec, grid, QuadratureConfig(tol=args.quad_tol), kernel_tol=args.tol)
    failed = [r for r in rows if r.error is not None]
    for r in failed:
        sys.stderr.write("warning: t=%s: %s\n" % (_fmt(r.t), r.error))
    text = render_sweep_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 1 if len(failed) == len(rows) else 0


def _recover_geometry(rows):
    """Back out (d, vol) from sweep rows using
    residual - kl = (d/2) ln(2 pi t) - ln vol."""
    pts = [(t, res - kl) for t, kl, res in rows
           if math.isfinite(kl) and math.isfinite(res)]
    if len(pts) < 2 or pts[0][0] == pts[-1][0]:
        raise InvalidInputError("cannot recover dimension from CSV; pass --d and --vol")
    (t0, g0), (t1, g1) = pts[0], pts[-1]
    d_est = 2.0 * (g1 - g0) / (math.log(2 * math.pi * t1) - math.log(2 * math.pi * t0))
    d = int(round(d_est))
    if d < 1 or abs(d_est - d) > 1e-6:
        raise InvalidInputError("recovered dimension %.6f is not a positive integer; "
                                "pass --d and --vol" % d_est)
    vol = math.exp(0.5 * d * math.log(2 * math.pi * t0) - g0)
    return d, vol


def _cmd_fit(args, parser, out):
    if (args.d is None) != (args.vol is None):
        parser.error("--d and --vol must be given together")
    with open(args.infile) as fh:
        rows3 = parse_sweep_csv(fh.read())
    if args.manifold is not None:
        spec = parse_manifold(args.manifold)
        d, vol = dimension(spec), volume(spec)
    elif args.d is not None:
        d, vol = args.d, args.vol
    else:
        d, vol = _recover_geometry(rows3)
    pinned = {}
    for item in args.pin or ():
        try:
            key, _, val = item.partition("=")
            pinned[int(key)] = float(val)
        except ValueError:
            parser.error("--pin expects i=value, got %r" % item)
    if args.pin_c0:
        pinned[0] = c0(d)
    pairs = [(t, kl) for t, kl, _ in rows3 if math.isfinite(kl)]
    rep = fit_coefficients(pairs, d=d, vol=vol, fit_order=args.order, pinned=pinned)
    _print_json(rep.to_json_obj(), out)
    return 0


def _cmd_validate(args, parser, out):
    results = run_checks(quick=args.quick)
    for res in results:
        out.write(res.line() + "\n")
    n_fail = sum(1 for r in results if not r.passed)
    out.write("%d/%d checks passed\n" % (len(results) - n_fail, len(results)))
    return 0 if n_fail == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="heatkl",
        description="Small-time expansion of the KL divergence between the "
                    "heat kernel and the uniform distribution on closed "
                    "manifolds.")
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="expansion coefficients c0, c1, c2")
    p.add_argument("--manifold", help="manifold spec, e.g. sphere:d=2,r=1")
    p.add_argument("--jet", help="curvature jet JSON file")
    p.add_argument("--method", choices=["closed", "wick", "both"], default="closed")
    p.set_defaults(fn=_cmd_coeffs)

    p = sub.add_parser("kernel", help="heat kernel value at (t, s)")
    p.add_argument("--manifold", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--s", required=True,
                   help="geodesic distance, comma separated for several factors")
    p.add_argument("--tol", type=float, default=1e-12,
                   help="kernel series tolerance (default 1e-12)")
    p.set_defaults(fn=_cmd_kernel)

    p = sub.add_parser("kl", help="numeric KL divergence at time t")
    p.add_argument("--manifold", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-14,
                   help="kernel series tolerance inside the quadrature")
    p.add_argument("--quad-tol", type=float, default=1e-9,
                   help="acceptable quadrature self-check error")
    p.set_defaults(fn=_cmd_kl)

    p = sub.add_parser("sweep", help="CSV of numeric KL vs asymptotics on a log grid")
    p.add_argument("--manifold", required=True)
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--tol", type=float, default=1e-14,
                   help="kernel series tolerance inside the quadrature")
    p.add_argument("--quad-tol", type=float, default=1e-9)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("fit", help="fit residual curve from a sweep CSV")
    p.add_argument("--in", dest="infile", required=True, help="sweep CSV path")
    p.add_argument("--order", type=int, default=2, help="highest power of t in the fit")
    p.add_argument("--pin-c0", action="store_true",
                   help="hold the constant term at -d/2 instead of fitting it")
    p.add_argument("--pin", action="append", metavar="I=VALUE",
                   help="hold coefficient i at a fixed value (repeatable)")
    p.add_argument("--manifold", help="recompute d and vol from a manifold spec")
    p.add_argument("--d", type=int, help="dimension (with --vol)")
    p.add_argument("--vol", type=float, help="volume (with --d)")
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("validate", help="run the built-in acceptance checks")
    p.add_argument("--quick", action="store_true",
                   help="smaller sample counts, skip the sweep-based checks")
    p.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, parser, sys.stdout)
    except InvalidInputError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    except (AccuracyError, ConditioningError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except ConsistencyError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 3
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
