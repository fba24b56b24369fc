"""Command-line front end: check, sweep, validate, frame.

Exit codes: 0 clean, 1 at least one failed check, 2 bad input.
"""
import argparse
import sys

import numpy as np

from .checks import CHECK_NAMES
from .harness import (
    QUANTITIES,
    build_context,
    evaluate_quantity,
    parse_fixed,
    report_to_json,
    run_check,
    run_sweep,
    sweep_to_csv,
)
from .manifest import ManifestError, resolve_manifest


def _load(ref):
    return resolve_manifest(ref)


def _add_manifest_arg(sub):
    sub.add_argument("manifest", help="manifest path or shipped manifest name")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="seqwarp",
        description="verify warped submanifold identities on sampled chart points",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run the check battery over Halton samples")
    _add_manifest_arg(p_check)
    p_check.add_argument("--samples", type=int, default=200)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--tol", type=float, default=None, help="override every tolerance")
    p_check.add_argument("--sin-floor", type=float, default=0.1, dest="sin_floor")
    p_check.add_argument("--checks", default=None, help="comma-separated subset of check names")
    p_check.add_argument("--report", default=None, help="write the JSON report here")

    p_sweep = sub.add_parser("sweep", help="evaluate one quantity on a rectangular grid")
    _add_manifest_arg(p_sweep)
    p_sweep.add_argument("--grid", required=True, help='e.g. "u1=0:2:50,t1=0.1:1.5:50"')
    p_sweep.add_argument("--quantity", required=True)
    p_sweep.add_argument("--out", required=True, help="CSV output path")
    p_sweep.add_argument("--fixed", default="", help='pin unswept coordinates, "u2=1.3"')

    p_val = sub.add_parser("validate", help="load a manifest and report every problem")
    _add_manifest_arg(p_val)

    p_frame = sub.add_parser("frame", help="print adapted-frame data at one chart point")
    _add_manifest_arg(p_frame)
    p_frame.add_argument("--point", required=True, help='"u1=1,u2=2,t1=1.0472,..."')

    return parser


def cmd_check(args):
    man = _load(args.manifest)
    checks = None
    if args.checks is not None:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in checks if c not in CHECK_NAMES]
        if unknown:
            raise ValueError(
                f"unknown check names: {', '.join(unknown)}; available: {', '.join(CHECK_NAMES)}"
            )
    report = run_check(
        man,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        sin_floor=args.sin_floor,
        checks=checks,
    )
    for name in CHECK_NAMES:
        if name not in report["checks"]:
            continue
        entry = report["checks"][name]
        status = entry["status"]
        if status == "skipped":
            print(f"skipped  {name:<16} {entry['reason']}")
        elif "min_gap" in entry:
            print(f"{status:<8} {name:<16} min gap {entry['min_gap']: .3e}")
        elif status == "reported":
            print(f"{status:<8} {name:<16} max |value| {entry['max_residual']:.3e}")
        else:
            print(f"{status:<8} {name:<16} max residual {entry['max_residual']:.3e}")
    print(f"manifest {report['manifest']['name']}: "
          + ("all checks pass" if report["all_pass"] else "FAILURES above"))
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report_to_json(report))
    return 0 if report["all_pass"] else 1


def cmd_sweep(args):
    man = _load(args.manifest)
    header, rows = run_sweep(man, args.grid, args.quantity, fixed_src=args.fixed)
    with open(args.out, "w") as fh:
        fh.write(sweep_to_csv(header, rows))
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_validate(args):
    man = _load(args.manifest)
    dims = "x".join(str(d) for d in man.partition.dims)
    print(f"ok {man.name}: ambient E^{man.ambient.real_dim}, factors {dims}, "
          f"ordering {man.ordering}")
    return 0


def cmd_frame(args):
    man = _load(args.manifest)
    assign = parse_fixed(args.point, man)
    missing = [c for c in man.chart if c not in assign]
    if missing:
        raise ValueError(f"point is missing coordinates: {', '.join(missing)}")
    point = np.array([[assign[c] for c in man.chart]])
    ctx = build_context(man, point)
    geom = ctx.geom

    print(f"manifest {man.name} at " + ", ".join(f"{c}={assign[c]:g}" for c in man.chart))
    if geom.singular[0]:
        print("induced metric is singular at this point")
        return 1
    print(f"warping: f={ctx.warping.f[0]:.12g}  h={ctx.warping.h[0]:.12g}")
    if ctx.m3:
        print(f"slant angle: theta={ctx.theta[0]:.12g}  cos={np.cos(ctx.theta[0]):.12g}")
    g = geom.g[0]
    print("induced metric diagonal: " + "  ".join(f"{g[i, i]:.12g}" for i in range(len(g))))
    off = np.abs(g - np.diag(np.diag(g))).max()
    print(f"largest off-diagonal metric entry: {off:.3e}")
    print("adapted frame (rows, chart components):")
    labels = []
    for b, d in enumerate(ctx.geom.spec.partition.dims):
        labels.extend(f"block{b}[{k}]" for k in range(d))
    for label, row in zip(labels, geom.frame.tangent[0]):
        print(f"  {label:<10} " + " ".join(f"{v: .6g}" for v in row))
    print("per-point quantities:")
    for name in sorted(QUANTITIES):
        try:
            vals, singular = evaluate_quantity(ctx, name)
        except ValueError:
            continue
        tag = "  (singular)" if singular[0] else ""
        print(f"  {name:<24} {vals[0]: .12g}{tag}")
    return 0


COMMANDS = {
    "check": cmd_check,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "frame": cmd_frame,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ManifestError as exc:
        print(f"manifest error in {args.manifest}:", file=sys.stderr)
        for line in exc.errors:
            print(f"  - {line}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
