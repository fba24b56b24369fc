"""Manifest files: declarative immersion setups the harness can load.

A manifest is a TOML document with sections [ambient], [chart],
[chart.domain], [immersion], and optionally [warping], [base_metrics],
and [tolerances].  Validation collects every problem it can find before
failing, so a broken file reports all its errors at once.
"""
import hashlib

try:
    import tomllib
except ImportError:
    import tomli as tomllib

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .ambient import KaehlerAmbient
from .checks import CHECK_NAMES
from .exprs import free_variables, parse_expression
from .geometry import FactorPartition, ImmersionSpec

ORDERINGS = ("T-perp-theta", "theta-perp-T", "perp-theta-T")


class ManifestError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class Manifest:
    name: str
    path: str
    sha256: str
    ambient: KaehlerAmbient
    chart: tuple
    partition: FactorPartition
    domain: dict
    components: list
    ordering: str = "T-perp-theta"
    f_expr: str | None = None
    h_expr: str | None = None
    g2_exprs: list | None = None
    g3_exprs: list | None = None
    tolerances: dict = field(default_factory=dict)

    def immersion_spec(self):
        return ImmersionSpec(
            self.chart, self.components, self.ambient, partition=self.partition
        )

    def domain_box(self):
        """(lo, hi) arrays in chart order."""
        import numpy as np

        lo = np.array([self.domain[n][0] for n in self.chart])
        hi = np.array([self.domain[n][1] for n in self.chart])
        return lo, hi


def _expr_errors(source, chart, where, errors):
    """Parse one expression; record problems under the given key path."""
    try:
        ast = parse_expression(source, chart)
    except Exception as exc:
        errors.append(f"{where}: {exc}")
        return None
    return ast


def load_manifest(path):
    """Read and validate one manifest file; raises ManifestError."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ManifestError([f"parse: {exc}"]) from exc

    errors = []
    if doc.get("schema") != 1:
        errors.append("schema: expected 1")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: missing or empty")
        name = path.stem

    amb_sec = doc.get("ambient")
    ambient = None
    if not isinstance(amb_sec, dict):
        errors.append("ambient: section missing")
    else:
        N = amb_sec.get("real_dim")
        if not isinstance(N, int) or N <= 0 or N % 2:
            errors.append(f"ambient.real_dim: need a positive even integer, got {N!r}")
        else:
            pairing = amb_sec.get("complex_structure", "consecutive_pairs")
            c = amb_sec.get("holomorphic_curvature", 0.0)
            if not isinstance(c, (int, float)):
                errors.append("ambient.holomorphic_curvature: need a number")
                c = 0.0
            if pairing != "consecutive_pairs":
                errors.append(
                    f"ambient.complex_structure: only 'consecutive_pairs' is supported in manifests, got {pairing!r}"
                )
            else:
                ambient = KaehlerAmbient(N, c=float(c))

    chart_sec = doc.get("chart")
    chart = ()
    partition = None
    domain = {}
    ordering = "T-perp-theta"
    if not isinstance(chart_sec, dict):
        errors.append("chart: section missing")
    else:
        names = chart_sec.get("names")
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            errors.append("chart.names: need a list of coordinate names")
            names = []
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            errors.append(f"chart.names: duplicate coordinate {dup[0]!r}")
        chart = tuple(names)
        factors = chart_sec.get("factors")
        if not isinstance(factors, list) or len(factors) != 3:
            errors.append("chart.factors: need exactly three factor lists")
        else:
            seen = {}
            for b, f in enumerate(factors):
                for coord in f:
                    if coord in seen:
                        errors.append(
                            f"chart.factors: coordinate {coord!r} appears in factors {seen[coord]} and {b}"
                        )
                    seen[coord] = b
                    if coord not in chart:
                        errors.append(f"chart.factors: unknown coordinate {coord!r}")
            flat = [coord for f in factors for coord in f]
            if sorted(flat) == sorted(chart) and len(flat) == len(chart):
                try:
                    partition = FactorPartition(chart, tuple(tuple(f) for f in factors))
                except Exception as exc:
                    errors.append(f"chart.factors: {exc}")
            elif not errors:
                missing = sorted(set(chart) - set(flat))
                errors.append(f"chart.factors: coordinates not covered: {missing}")
        ordering = chart_sec.get("ordering", "T-perp-theta")
        if ordering not in ORDERINGS:
            errors.append(
                f"chart.ordering: {ordering!r} not one of {', '.join(ORDERINGS)}"
            )
        dom = chart_sec.get("domain")
        if not isinstance(dom, dict):
            errors.append("chart.domain: section missing")
        else:
            for coord in chart:
                box = dom.get(coord)
                if (
                    not isinstance(box, list)
                    or len(box) != 2
                    or not all(isinstance(v, (int, float)) for v in box)
                ):
                    errors.append(f"chart.domain.{coord}: need [lo, hi]")
                elif not box[0] < box[1]:
                    errors.append(f"chart.domain.{coord}: lo must be below hi")
                else:
                    domain[coord] = (float(box[0]), float(box[1]))
            for coord in dom:
                if coord not in chart:
                    errors.append(f"chart.domain: unknown coordinate {coord!r}")

    imm_sec = doc.get("immersion")
    components = []
    if not isinstance(imm_sec, dict):
        errors.append("immersion: section missing")
    else:
        components = imm_sec.get("components")
        if not isinstance(components, list) or not all(
            isinstance(cpt, str) for cpt in components
        ):
            errors.append("immersion.components: need a list of expressions")
            components = []
        else:
            if ambient is not None and len(components) != ambient.real_dim:
                errors.append(
                    f"immersion: expected {ambient.real_dim} coordinates, found {len(components)}"
                )
            for k, src in enumerate(components):
                _expr_errors(src, chart, f"immersion.components[{k}]", errors)

    f_expr = h_expr = None
    warp_sec = doc.get("warping")
    if warp_sec is not None:
        if not isinstance(warp_sec, dict):
            errors.append("warping: need a section")
        else:
            f_expr = warp_sec.get("f")
            h_expr = warp_sec.get("h")
            f_ast = h_ast = None
            if not isinstance(f_expr, str):
                errors.append("warping.f: need an expression string")
                f_expr = None
            else:
                f_ast = _expr_errors(f_expr, chart, "warping.f", errors)
            if not isinstance(h_expr, str):
                errors.append("warping.h: need an expression string")
                h_expr = None
            else:
                h_ast = _expr_errors(h_expr, chart, "warping.h", errors)
            if partition is not None:
                if f_ast is not None:
                    extra = free_variables(f_ast) - set(partition.factors[0])
                    if extra:
                        errors.append(f"warping.f: may not depend on {sorted(extra)}")
                if h_ast is not None:
                    allowed = set(partition.factors[0]) | set(partition.factors[1])
                    extra = free_variables(h_ast) - allowed
                    if extra:
                        errors.append(f"warping.h: may not depend on {sorted(extra)}")

    g2_exprs = g3_exprs = None
    base_sec = doc.get("base_metrics")
    if base_sec is not None:
        if not isinstance(base_sec, dict):
            errors.append("base_metrics: need a section")
        else:
            for key, block in (("g2", 1), ("g3", 2)):
                vals = base_sec.get(key)
                if vals is None:
                    continue
                if not isinstance(vals, list) or not all(
                    isinstance(v, str) for v in vals
                ):
                    errors.append(f"base_metrics.{key}: need a list of expressions")
                    continue
                if partition is not None and len(vals) != partition.dims[block]:
                    errors.append(
                        f"base_metrics.{key}: expected {partition.dims[block]} entries, found {len(vals)}"
                    )
                for k, src in enumerate(vals):
                    _expr_errors(src, chart, f"base_metrics.{key}[{k}]", errors)
                if key == "g2":
                    g2_exprs = vals
                else:
                    g3_exprs = vals

    tolerances = {}
    tol_sec = doc.get("tolerances")
    if tol_sec is not None:
        if not isinstance(tol_sec, dict):
            errors.append("tolerances: need a section")
        else:
            for key, val in tol_sec.items():
                if key not in CHECK_NAMES:
                    errors.append(f"tolerances: unknown check {key!r}")
                elif not isinstance(val, (int, float)) or val <= 0:
                    errors.append(f"tolerances.{key}: need a positive number")
                else:
                    tolerances[key] = float(val)

    if errors:
        raise ManifestError(errors)

    return Manifest(
        name=name,
        path=str(path),
        sha256=hashlib.sha256(raw).hexdigest(),
        ambient=ambient,
        chart=chart,
        partition=partition,
        domain=domain,
        components=list(components),
        ordering=ordering,
        f_expr=f_expr,
        h_expr=h_expr,
        g2_exprs=g2_exprs,
        g3_exprs=g3_exprs,
        tolerances=tolerances,
    )


def shipped_manifest_dir():
    return resources.files("seqwarp") / "manifests"


def list_shipped():
    """Names of the manifest files bundled with the package."""
    return sorted(
        p.name[: -len(".toml")]
        for p in shipped_manifest_dir().iterdir()
        if p.name.endswith(".toml")
    )


def shipped_path(name):
    p = shipped_manifest_dir() / f"{name}.toml"
    if not p.is_file():
        raise FileNotFoundError(
            f"no shipped manifest {name!r}; available: {', '.join(list_shipped())}"
        )
    return Path(str(p))


def resolve_manifest(ref):
    """Load a manifest from a path, or by shipped name when no file matches."""
    p = Path(ref)
    if p.is_file():
        return load_manifest(p)
    if "/" not in str(ref) and not str(ref).endswith(".toml"):
        return load_manifest(shipped_path(str(ref)))
    raise FileNotFoundError(f"manifest file not found: {ref}")
