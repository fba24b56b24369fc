"""Orchestration: sample a manifest's domain, run the battery, build reports.

Reports are plain dicts serialized with sorted keys and no timestamps, so
two runs with the same inputs produce byte-identical JSON.
"""
import json

import numpy as np

from .checks import CheckContext, run_checks
from .geometry import BatchGeometry, gauss_equation_residual, mean_curvature
from .sampling import halton_points, scale_to_box
from .split import anti_invariance_pairing, slant_angle_per_point, slant_angle_spread, split_J
from .warped import WarpingFunctions

SCHEMA_VERSION = 1

# residual checks compare max |value| < tol; gap checks need min value > -tol
DEFAULT_TOLERANCES = {
    "gauss_eq": 1e-6,
    "prop21_1": 1e-8,
    "prop21_2": 1e-8,
    "prop21_3": 1e-8,
    "prop21_4": 1e-6,
    "lemma_3_4": 1e-8,
    "lemma_3_5": 1e-8,
    "lemma_3_6": 1e-8,
    "lemma_3_7": 1e-8,
    "lemma_3_8": 1e-8,
    "lemma_3_9": 1e-8,
    "lemma_3_10": 1e-8,
    "chen_3_11": 1e-8,
    "equality_3_13": 1e-8,
    "equality_3_14": 1e-8,
    "equality_3_15": 1e-8,
    "equality_3_16": 1e-8,
    "ls_2_8": 1e-8,
    "eq_4_3": 1e-8,
    "eq_4_4": 1e-8,
    "eq_4_5": 1e-8,
    "eq_4_6": 1e-6,
    "thm42": 1e-8,
    "nonexist_3_1": 1e-8,
}


def sample_points(manifest, samples, seed):
    """Halton points over the declared box; the seed offsets the sequence."""
    lo, hi = manifest.domain_box()
    unit = halton_points(len(manifest.chart), samples, start=seed + 1)
    return scale_to_box(unit, lo, hi)


def build_context(manifest, points, sin_floor=0.1):
    geom = BatchGeometry(manifest.immersion_spec(), points)
    if manifest.f_expr is None or manifest.h_expr is None:
        raise ValueError(
            f"manifest {manifest.name!r} declares no warping functions; the check battery needs them"
        )
    warping = WarpingFunctions(geom, manifest.f_expr, manifest.h_expr)
    return CheckContext(geom, warping, sin_floor=sin_floor, ordering=manifest.ordering)


def _point_dict(manifest, point):
    return {name: float(v) for name, v in zip(manifest.chart, point)}


def run_check(manifest, samples=200, seed=0, tol=None, sin_floor=0.1, checks=None):
    """Evaluate the battery over Halton samples; returns the report dict."""
    points = sample_points(manifest, samples, seed)
    ctx = build_context(manifest, points, sin_floor=sin_floor)
    geom = ctx.geom
    degenerate = geom.singular
    results = run_checks(ctx, which=checks)

    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(manifest.tolerances)
    if tol is not None:
        tolerances = {name: float(tol) for name in tolerances}

    report_checks = {}
    any_fail = False
    for res in results:
        tolerance = tolerances[res.name]
        entry = {"kind": res.kind, "tolerance": tolerance}
        if res.details:
            entry["details"] = _jsonable(res.details)
        if res.kind == "skipped":
            entry["status"] = "skipped"
            entry["reason"] = res.reason
            report_checks[res.name] = entry
            continue
        excluded = degenerate.copy()
        if res.singular is not None:
            excluded |= res.singular
        keep = ~excluded
        entry["samples_evaluated"] = int(keep.sum())
        entry["singular_points_excluded"] = int(excluded.sum())
        if not keep.any():
            entry["status"] = "skipped"
            entry["reason"] = "all samples degenerate or singular"
            report_checks[res.name] = entry
            continue
        vals = res.values[keep]
        kept_points = points[keep]
        if res.kind == "gap":
            k = int(np.argmin(vals))
            entry["min_gap"] = float(vals[k])
            entry["argmin_point"] = _point_dict(manifest, kept_points[k])
            ok = vals[k] > -tolerance
        else:
            k = int(np.argmax(np.abs(vals)))
            entry["max_residual"] = float(np.abs(vals[k]))
            entry["argmax_point"] = _point_dict(manifest, kept_points[k])
            ok = np.abs(vals[k]) < tolerance
        if res.kind == "reported":
            entry["status"] = "reported"
        else:
            entry["status"] = "pass" if ok else "fail"
            any_fail = any_fail or not ok
        report_checks[res.name] = entry

    report = {
        "schema_version": SCHEMA_VERSION,
        "manifest": {
            "name": manifest.name,
            "sha256": manifest.sha256,
            "ordering": manifest.ordering,
            "factor_dims": list(manifest.partition.dims),
            "ambient_dim": manifest.ambient.real_dim,
        },
        "options": {
            "samples": int(samples),
            "seed": int(seed),
            "sin_floor": float(sin_floor),
            "tolerances": {k: tolerances[k] for k in sorted(tolerances)},
            "checks": sorted(checks) if checks is not None else "all",
        },
        "sampling": {
            "degenerate_points": int(degenerate.sum()),
            "degenerate_indices": [int(i) for i in np.nonzero(degenerate)[0][:20]],
        },
        "warping": {
            "f_nonconstant": bool(ctx.warping.properness()["f_nonconstant"]),
            "h_nonconstant": bool(ctx.warping.properness()["h_nonconstant"]),
        },
        "checks": report_checks,
        "all_pass": not any_fail,
    }
    return report


def report_to_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# ---------------------------------------------------------------------------
# per-point quantity registry, shared by sweep and frame inspection


def _quantity_chen(ctx, field):
    from .checks import chen_inequality

    gap, _ = chen_inequality(ctx)
    vals = {"gap": gap.gap, "lhs": gap.lhs, "rhs": gap.rhs}[field]
    return vals, gap.singular


def _quantity_thm42(ctx, field):
    from .checks import theorem42_check

    if ctx.m2 == 0 or ctx.m3 == 0:
        raise ValueError("needs both non-holomorphic factors")
    t = theorem42_check(ctx)
    return t[field], t["singular"]


def _no_singular(vals):
    return vals, np.zeros(len(vals), dtype=bool)


QUANTITIES = {
    "chen_gap": lambda ctx: _quantity_chen(ctx, "gap"),
    "chen_lhs": lambda ctx: _quantity_chen(ctx, "lhs"),
    "chen_rhs": lambda ctx: _quantity_chen(ctx, "rhs"),
    "slant_theta": lambda ctx: _no_singular(ctx.theta),
    "slant_spread": lambda ctx: _no_singular(
        slant_angle_spread(ctx.geom, block=2) if ctx.m3 else np.zeros(ctx.geom.npts)
    ),
    "holomorphic_defect": lambda ctx: _no_singular(_holo_defect(ctx.geom)),
    "anti_invariance_defect": lambda ctx: _no_singular(_anti_defect(ctx.geom)),
    "anti_invariance_pairing": lambda ctx: _no_singular(anti_invariance_pairing(ctx.geom)),
    "gauss_residual": lambda ctx: _no_singular(gauss_equation_residual(ctx.geom)),
    "sff_norm_sq": lambda ctx: _no_singular(ctx.sff_norms.total),
    "mean_curvature_norm": lambda ctx: _no_singular(
        np.linalg.norm(mean_curvature(ctx.geom), axis=1)
    ),
    "warp_f": lambda ctx: _no_singular(ctx.warping.f),
    "warp_h": lambda ctx: _no_singular(ctx.warping.h),
    "grad_ln_f_sq": lambda ctx: _no_singular(ctx.grad_ln_f_sq),
    "tangent_grad_ln_h_sq": lambda ctx: _no_singular(ctx.tangent_grad_ln_h_sq),
    "thm42_gap": lambda ctx: _quantity_thm42(ctx, "gap_thm42"),
    "eq_4_3_residual": lambda ctx: _quantity_thm42(ctx, "res43_model"),
    "eq_4_6_residual": lambda ctx: _quantity_thm42(ctx, "gap_identity"),
}


def _holo_defect(geom):
    from .split import _block_probe_vectors

    if geom.spec.partition.dims[0] == 0:
        return np.zeros(geom.npts)
    X = _block_probe_vectors(geom, 0, 24, 1)
    return split_J(geom, X).normal_norm.max(axis=1)


def _anti_defect(geom):
    from .split import _block_probe_vectors

    if geom.spec.partition.dims[1] == 0:
        return np.zeros(geom.npts)
    Z = _block_probe_vectors(geom, 1, 24, 1)
    return split_J(geom, Z).tangential_norm.max(axis=1)


def evaluate_quantity(ctx, name):
    """(values, singular) arrays for one registered per-point quantity."""
    try:
        fn = QUANTITIES[name]
    except KeyError:
        raise ValueError(
            f"unknown quantity {name!r}; available: {', '.join(sorted(QUANTITIES))}"
        ) from None
    vals, singular = fn(ctx)
    return np.asarray(vals, dtype=float), np.asarray(singular, dtype=bool)


def parse_grid(grid_src, manifest):
    """\"u1=0:2:50,t1=0.1:1.5:25\" -> ordered [(name, lo, hi, count)]."""
    axes = []
    seen = set()
    for part in grid_src.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"grid axis {part!r}: expected name=lo:hi:count")
        name, spec = part.split("=", 1)
        name = name.strip()
        if name not in manifest.chart:
            raise ValueError(f"grid axis {name!r} is not a chart coordinate")
        if name in seen:
            raise ValueError(f"grid axis {name!r} given twice")
        seen.add(name)
        pieces = spec.split(":")
        if len(pieces) != 3:
            raise ValueError(f"grid axis {name!r}: expected name=lo:hi:count")
        try:
            lo, hi, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
        except ValueError as exc:
            raise ValueError(f"grid axis {name!r}: {exc}") from None
        if count < 1:
            raise ValueError(f"grid axis {name!r}: count must be at least 1")
        axes.append((name, lo, hi, count))
    if not axes:
        raise ValueError("empty grid: expected at least one name=lo:hi:count axis")
    return axes


def parse_fixed(fixed_src, manifest):
    """\"u2=1.3,t3=0.7\" -> {name: value}."""
    out = {}
    if not fixed_src:
        return out
    for part in fixed_src.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"fixed value {part!r}: expected name=value")
        name, val = part.split("=", 1)
        name = name.strip()
        if name not in manifest.chart:
            raise ValueError(f"fixed coordinate {name!r} is not a chart coordinate")
        out[name] = float(val)
    return out


def run_sweep(manifest, grid_src, quantity, fixed_src="", sin_floor=0.1):
    """Rectangular grid evaluation.  Returns (header, rows) for CSV output.

    Unswept coordinates sit at the domain midpoint unless fixed explicitly;
    rows come out in row-major order of the grid axes as given.
    """
    axes = parse_grid(grid_src, manifest)
    fixed = parse_fixed(fixed_src, manifest)
    for name, *_ in axes:
        if name in fixed:
            raise ValueError(f"coordinate {name!r} is both swept and fixed")

    coords_1d = [np.linspace(lo, hi, count) for _, lo, hi, count in axes]
    mesh = np.meshgrid(*coords_1d, indexing="ij")
    flat = [m.ravel() for m in mesh]
    npts = flat[0].size

    points = np.empty((npts, len(manifest.chart)))
    axis_names = [a[0] for a in axes]
    for j, name in enumerate(manifest.chart):
        if name in axis_names:
            points[:, j] = flat[axis_names.index(name)]
        elif name in fixed:
            points[:, j] = fixed[name]
        else:
            lo, hi = manifest.domain[name]
            points[:, j] = 0.5 * (lo + hi)

    ctx = build_context(manifest, points, sin_floor=sin_floor)
    vals, singular = evaluate_quantity(ctx, quantity)
    singular = singular | ctx.geom.singular

    header = list(manifest.chart) + [quantity, "singular"]
    rows = []
    for t in range(npts):
        row = [f"{points[t, j]:.17g}" for j in range(len(manifest.chart))]
        row.append(f"{vals[t]:.17g}")
        row.append("1" if singular[t] else "0")
        rows.append(row)
    return header, rows


def sweep_to_csv(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"
