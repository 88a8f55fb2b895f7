"""Command-line front end: reproducible Lefschetz experiments with JSON/CSV
artifacts.

Subcommands
-----------
compute      quadrature of one map, JSON report
sweep        t-deformation sweep, CSV (t, integral, oracle, residual, mass_fraction)
verify       fixed-point vs cohomological oracle agreement, JSON
cutlocus     per-node cut margins, CSV
bounds       cut-locus bound report, JSON
bounds-hodge flat/Hodge bounds for a torus map, JSON
suite        the full acceptance matrix with a pass/fail table

Exit codes: 0 success, 2 descriptor parse error, 3 numerical failure
(non-finite density), 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import cutflow, oracles
from .bounds import flat_bound, hodge_bound_flat_torus
from .errors import MQLefschetzError, NonFiniteDensity, ParseError
from .integrand import RadialProfile
from .maps import TorusLinear, parse_manifold, parse_map
from .quadrature import (build_grid, compute_lefschetz, localization_mass,
                         sweep_t)

PROFILE_FLAGS = {"sec": "sec", "tan": "tan", "rational": "rational"}


def _profile_for(g, args) -> RadialProfile:
    frac = args.epsilon_frac
    if isinstance(frac, str) and frac != "cut":
        frac = float(frac)
    if frac == "cut":
        raise ParseError("--epsilon-frac cut is only meaningful for cutlocus")
    if not 0.0 < frac <= 0.5:
        raise ParseError("--epsilon-frac must lie in (0, 0.5]")
    kind = PROFILE_FLAGS.get(args.profile)
    if kind is None:
        raise ParseError(f"unknown profile {args.profile!r}")
    return RadialProfile.for_geometry(g, kind, frac=frac)


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


def cmd_compute(args) -> int:
    g = parse_manifold(args.manifold)
    f = parse_map(args.map, g)
    prof = _profile_for(g, args)
    rep = compute_lefschetz(g, f, prof, resolution=args.res, t=args.t,
                            threads=args.threads)
    _write_json(args.out, rep.to_dict())
    return 0


def cmd_sweep(args) -> int:
    g = parse_manifold(args.manifold)
    f = parse_map(args.map, g)
    prof = _profile_for(g, args)
    t_values = [float(v) for v in args.t.split(",")]
    reports = sweep_t(g, f, prof, resolution=args.res, t_values=t_values,
                      threads=args.threads)
    rows = []
    for rep in reports:
        try:
            mass = localization_mass(g, f, prof, resolution=min(args.res, 256),
                                     t=rep.t, threads=args.threads)
        except MQLefschetzError:
            mass = None
        rows.append((rep.t, rep.integral, rep.oracle, rep.residual, mass))
    out = args.out or "sweep.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "integral", "oracle", "residual", "mass_fraction"])
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    spread = max(r[1] for r in rows) - min(r[1] for r in rows)
    print(f"wrote {out}; integral spread over t: {spread:.3e}")
    return 0


def cmd_verify(args) -> int:
    g = parse_manifold(args.manifold)
    f = parse_map(args.map, g)
    fixed = oracles.find_fixed_points(g, f)
    if isinstance(fixed, oracles.FixedSubmanifold):
        oracle_fp = oracles.fixed_submanifold_sum(
            [(fixed.euler_characteristic, float(fixed.normal_sign))])
    else:
        oracle_fp = oracles.fixed_point_lefschetz_sum(fixed)
    oracle_cohom = oracles.cohomological_lefschetz(f)
    _write_json(args.out, {"oracle_fp": oracle_fp, "oracle_cohom": oracle_cohom,
                           "agree": oracle_fp == oracle_cohom})
    return 0


def cmd_cutlocus(args) -> int:
    g = parse_manifold(args.manifold)
    f = parse_map(args.map, g)
    est = cutflow.cut_set_estimate(g, f, build_grid(g, args.res))
    out = args.out or "cut.csv"
    width = est.nodes.shape[1]
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"coord{i + 1}" for i in range(width)]
                        + ["margin", "in_C_f"])
        for node, margin, flag in zip(est.nodes, est.margins, est.mask):
            writer.writerow([_fmt(float(v)) for v in node]
                            + [_fmt(float(margin)), int(flag)])
    print(f"wrote {out}; {est.summary.classification}, "
          f"{est.summary.cluster_count} cluster(s)")
    return 0


def cmd_bounds(args) -> int:
    g = parse_manifold(args.manifold)
    f = parse_map(args.map, g)
    rep = cutflow.bound_check(g, f, resolution=args.res)
    _write_json(args.out, rep.to_dict())
    return 0


def cmd_bounds_hodge(args) -> int:
    g = parse_manifold(args.manifold)
    f = parse_map(args.map, g)
    if not isinstance(f, TorusLinear):
        raise ParseError("bounds-hodge needs a torus_linear map")
    lef = oracles.cohomological_lefschetz(f)
    fb = flat_bound(g, f)
    hb = hodge_bound_flat_torus(f)
    _write_json(args.out, {
        "L": lef, "flat_bound": fb, "hodge_bound": hb,
        "satisfied": abs(lef) <= fb + 1e-9 and abs(lef) <= hb + 1e-9})
    return 0


def cmd_suite(args) -> int:
    """Condensed acceptance matrix; exit 0 iff every row passes."""
    rng = np.random.default_rng(args.seed)
    rows = []

    def record(name, value, oracle, tol):
        ok = abs(value - oracle) <= tol
        rows.append((name, oracle, value, abs(value - oracle), ok))

    gc = parse_manifold("circle")
    for n in (-2, 0, 2, 3, 5):
        for kind in ("sec", "rational"):
            rep = compute_lefschetz(gc, parse_map(f"circle_power:{n}", gc),
                                    RadialProfile.for_geometry(gc, kind),
                                    resolution=4096)
            record(f"circle z^{n} [{kind}]", rep.integral, 1 - n, 1e-4)
    gt = parse_manifold("torus:6.283185307179586,6.283185307179586")
    for m in ((2, 0, 0, 3), (2, 1, 1, 1), (0, 1, -1, 0)):
        f = parse_map("torus_linear:" + ",".join(map(str, m)), gt)
        rep = compute_lefschetz(gt, f, resolution=256)
        record(f"torus {m}", rep.integral, rep.oracle, 1e-3)
    gs = parse_manifold("sphere")
    for desc, oracle in (("sphere_rotation:0,0,1:1.0", 2),
                         ("sphere_reflection:0,0,1", 0),
                         ("suspension:2", 3), ("identity", 2)):
        rep = compute_lefschetz(gs, parse_map(desc, gs), resolution=args.res)
        record(desc, rep.integral, oracle, 1e-3 if "susp" not in desc else 1e-2)
    for n in (2, 3, 4):
        f = parse_map(f"suspension:{n}", gs)
        br = cutflow.bound_check(gs, f, resolution=128)
        record(f"susp({n}) |C(f)|", br.cut_count, n - 1, 0)
        record(f"susp({n}) sgn sum", br.sgn_sum, br.lefschetz - br.chi, 0)
    del rng
    width = max(len(r[0]) for r in rows)
    print(f"{'case'.ljust(width)}  oracle      value         residual   status")
    all_ok = True
    for name, oracle, value, residual, ok in rows:
        all_ok &= ok
        print(f"{name.ljust(width)}  {oracle!s:>6}  {value:12.6f}  "
              f"{residual:10.2e}   {'pass' if ok else 'FAIL'}")
    print(f"suite: {'all passed' if all_ok else 'FAILURES PRESENT'}")
    return 0 if all_ok else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lefschetz",
        description="Lefschetz numbers by quadrature of Mathai-Quillen pullbacks")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, res=256):
        p.add_argument("--manifold", required=True,
                       help="circle[:r] | torus:p1,p2 | sphere | hyperbolic_patch")
        p.add_argument("--map", required=True, dest="map",
                       help="e.g. circle_power:3, torus_linear:2,0,0,3, suspension:2")
        p.add_argument("--res", type=int, default=res)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("compute", help="single quadrature report")
    common(p)
    p.add_argument("--profile", default="sec", choices=sorted(PROFILE_FLAGS))
    p.add_argument("--epsilon-frac", default=0.45)
    p.add_argument("--t", type=float, default=1.0)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", help="t-deformation sweep to CSV")
    common(p)
    p.add_argument("--profile", default="sec", choices=sorted(PROFILE_FLAGS))
    p.add_argument("--epsilon-frac", default=0.45)
    p.add_argument("--t", default="0.25,0.5,1,2,4,8,16,32")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="oracle cross-check")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cutlocus", help="cut margins to CSV")
    common(p, res=512)
    p.add_argument("--epsilon-frac", default="cut")
    p.set_defaults(func=cmd_cutlocus)

    p = sub.add_parser("bounds", help="cut-locus bound report")
    common(p, res=128)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("bounds-hodge", help="flat + Hodge bounds (torus)")
    common(p)
    p.set_defaults(func=cmd_bounds_hodge)

    p = sub.add_parser("suite", help="acceptance matrix")
    p.add_argument("--res", type=int, default=192)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteDensity as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except MQLefschetzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
