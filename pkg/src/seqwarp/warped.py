"""Block-metric structure g1 + f^2 g2 + h^2 g3 and its classical identities.

The first factor carries its induced metric, the second is scaled by f
(a function of the first factor), the third by h (a function of the first
two).  Everything here consumes a BatchGeometry plus declared warping
expressions and reports pointwise residuals.
"""
from dataclasses import dataclass

import numpy as np

from .exprs import evaluate_values, free_variables, jet_coefficients, parse_expression
from .geometry import _partial_tables

PROPER_TOL = 1e-8


def _scalar_jets(geom, expr):
    """Value, gradient, and Hessian-of-partials arrays for a chart scalar."""
    if isinstance(expr, str):
        expr = parse_expression(expr, geom.spec.chart)
    space = geom.space
    coeffs = jet_coefficients(expr, space, geom.points, geom.spec.chart)
    pr, pf, _, _ = _partial_tables(space)
    vals = coeffs[:, 0].copy()
    d1 = coeffs[:, space.var_rank].copy()
    m = space.nvars
    d2 = coeffs[:, pr.ravel()].reshape(geom.npts, m, m) * pf[None, :, :]
    return vals, d1, d2


class WarpingFunctions:
    """Declared warping factors evaluated on the batch, with derivatives.

    f may only depend on first-factor coordinates, h on the first two
    factors; both must stay positive on the batch.
    """

    def __init__(self, geom, f_expr, h_expr):
        self.geom = geom
        chart = geom.spec.chart
        part = geom.spec.partition
        if isinstance(f_expr, str):
            f_expr = parse_expression(f_expr, chart)
        if isinstance(h_expr, str):
            h_expr = parse_expression(h_expr, chart)
        b1 = set(part.factors[0])
        b12 = b1 | set(part.factors[1]) if part.nfactors > 1 else b1
        bad_f = free_variables(f_expr) - b1
        if bad_f:
            raise ValueError(f"first warping factor may not depend on {sorted(bad_f)}")
        bad_h = free_variables(h_expr) - b12
        if bad_h:
            raise ValueError(f"second warping factor may not depend on {sorted(bad_h)}")
        self.f_expr, self.h_expr = f_expr, h_expr
        self.f, self.df, self.d2f = _scalar_jets(geom, f_expr)
        self.h, self.dh, self.d2h = _scalar_jets(geom, h_expr)
        for name, vals in (("f", self.f), ("h", self.h)):
            if vals.min() <= 0.0:
                t = int(np.argmin(vals))
                raise ValueError(
                    f"warping factor {name} is nonpositive at {geom.points[t].tolist()}"
                )
        self.d_ln_f = self.df / self.f[:, None]
        self.d_ln_h = self.dh / self.h[:, None]
        self.d2_ln_f = self.d2f / self.f[:, None, None] - np.einsum(
            "ti,tj->tij", self.d_ln_f, self.d_ln_f
        )
        self.d2_ln_h = self.d2h / self.h[:, None, None] - np.einsum(
            "ti,tj->tij", self.d_ln_h, self.d_ln_h
        )

    @property
    def grad_ln_f(self):
        """Contravariant chart components of grad(ln f)."""
        return np.einsum("tij,tj->ti", self.geom.ginv, self.d_ln_f)

    @property
    def grad_ln_h(self):
        return np.einsum("tij,tj->ti", self.geom.ginv, self.d_ln_h)

    def grad_norm_sq(self, which="f"):
        d = self.d_ln_f if which == "f" else self.d_ln_h
        return np.einsum("ti,tij,tj->t", d, self.geom.ginv, d)

    def tangent_grad_norm_sq(self, which="h"):
        """Norm^2 of the gradient component along the first factor's frame."""
        d = self.d_ln_f if which == "f" else self.d_ln_h
        E = self.geom.frame.block(0)
        comps = np.einsum("tki,ti->tk", E, d)
        return np.einsum("tk,tk->t", comps, comps)

    def properness(self, tol=PROPER_TOL):
        """Whether each warping factor is genuinely nonconstant on the batch."""
        return {
            "f_nonconstant": bool(np.sqrt(self.grad_norm_sq("f")).max() > tol),
            "h_nonconstant": bool(np.sqrt(self.grad_norm_sq("h")).max() > tol),
        }


@dataclass
class BlockMetricReport:
    """How closely the induced metric matches g1 + f^2 g2 + h^2 g3."""

    off_block_norm: float
    diag_defect: float
    f_extracted: np.ndarray | None
    f_spread: float
    f_match: float
    h_extracted: np.ndarray | None
    h_spread: float
    h_match: float

    def as_dict(self):
        return {
            "off_block_norm": self.off_block_norm,
            "diag_defect": self.diag_defect,
            "f_spread": self.f_spread,
            "f_match": self.f_match,
            "h_spread": self.h_spread,
            "h_match": self.h_match,
        }


def _extract_scale(geom, block, base_vals):
    """Per-point scale^2 from diagonal ratios, plus spread and off-diag size."""
    idx = geom.spec.partition.indices[block]
    diag = geom.g[:, idx, idx]
    ratios = diag / base_vals
    mean = ratios.mean(axis=1)
    spread = float(np.abs(ratios - mean[:, None]).max()) if len(idx) else 0.0
    sub = geom.g[np.ix_(range(geom.npts), idx, idx)]
    off = sub - np.einsum("tk,kl->tkl", diag, np.eye(len(idx)))
    return mean, spread, float(np.abs(off).max()) if len(idx) else 0.0


def evaluate_base_metric(geom, exprs, block):
    """Diagonal base-metric entries on the batch; must stay positive."""
    idx = geom.spec.partition.indices[block]
    if len(exprs) != len(idx):
        raise ValueError(
            f"base metric for block {block} needs {len(idx)} entries, got {len(exprs)}"
        )
    out = np.empty((geom.npts, len(idx)))
    for k, e in enumerate(exprs):
        if isinstance(e, str):
            e = parse_expression(e, geom.spec.chart)
        out[:, k] = evaluate_values(e, geom.points, geom.spec.chart)
    if out.size and out.min() <= 0.0:
        raise ValueError(f"base metric for block {block} is nonpositive somewhere")
    return out


def verify_block_metric(geom, warping, g2_vals, g3_vals):
    """Compare the induced metric against the declared block structure."""
    part = geom.spec.partition
    block_of = np.empty(geom.spec.dim, dtype=int)
    for b, idx in enumerate(part.indices):
        for i in idx:
            block_of[i] = b
    cross = block_of[:, None] != block_of[None, :]
    off_block = float(np.abs(geom.g * cross[None]).max()) if cross.any() else 0.0

    f_mean = h_mean = None
    f_spread = f_match = h_spread = h_match = 0.0
    diag_defect = 0.0
    if part.nfactors > 1 and part.dims[1] > 0:
        f2, f_spread, d2off = _extract_scale(geom, 1, g2_vals)
        diag_defect = max(diag_defect, d2off)
        f_mean = np.sqrt(f2)
        f_match = float(np.abs(f_mean - warping.f).max())
    if part.nfactors > 2 and part.dims[2] > 0:
        h2, h_spread, d3off = _extract_scale(geom, 2, g3_vals)
        diag_defect = max(diag_defect, d3off)
        h_mean = np.sqrt(h2)
        h_match = float(np.abs(h_mean - warping.h).max())
    return BlockMetricReport(
        off_block_norm=off_block,
        diag_defect=diag_defect,
        f_extracted=f_mean,
        f_spread=f_spread,
        f_match=f_match,
        h_extracted=h_mean,
        h_spread=h_spread,
        h_match=h_match,
    )


def _norm_g(geom, vecs):
    """g-norms of chart vectors indexed (npts, ..., m)."""
    return np.sqrt(
        np.maximum(np.einsum("t...i,tij,t...j->t...", vecs, geom.g, vecs), 0.0)
    )


def connection_identity_residuals(geom, warping):
    """Mixed-block Christoffel identities of the doubly warped structure.

    prop21_1: nabla_X Z = X(ln f) Z for X in factor 1, Z in factor 2.
    prop21_2: nabla_X W = X(ln h) W for X in factor 1, W in factor 3.
    prop21_3: nabla_Z W = Z(ln h) W for Z in factor 2, W in factor 3.
    Each value is the per-point max g-norm of the defect vector; None when
    a factor involved is empty.
    """
    part = geom.spec.partition
    m = geom.spec.dim
    out = {}
    specs = [
        ("prop21_1", 0, 1, warping.d_ln_f),
        ("prop21_2", 0, 2, warping.d_ln_h),
        ("prop21_3", 1, 2, warping.d_ln_h),
    ]
    for name, ba, bb, dln in specs:
        if part.nfactors <= max(ba, bb) or part.dims[ba] == 0 or part.dims[bb] == 0:
            out[name] = None
            continue
        ia = list(part.indices[ba])
        ib = list(part.indices[bb])
        G = geom.Gamma[np.ix_(range(geom.npts), ia, ib, range(m))]
        want = np.zeros_like(G)
        for kb, b in enumerate(ib):
            want[:, :, kb, b] = dln[:, ia]
        diff = G - want
        norms = _norm_g(geom, diff)
        out[name] = norms.reshape(geom.npts, -1).max(axis=1)
    return out


def _sub_christoffel(geom, idx):
    """Christoffel symbols of the metric restricted to a coordinate subset."""
    sl = list(idx)
    gsub = geom.g[np.ix_(range(geom.npts), sl, sl)]
    dgsub = geom.dg[np.ix_(range(geom.npts), sl, sl, sl)]
    ginvsub = np.linalg.inv(gsub)
    half = 0.5 * (
        np.einsum("tacb->tabc", dgsub)
        + np.einsum("tbca->tabc", dgsub)
        - np.einsum("tcab->tabc", dgsub)
    )
    return np.einsum("tdc,tabc->tabd", ginvsub, half), ginvsub


def hessian_on_base(geom, d1, d2):
    """Hessian of a scalar with respect to the first-two-factor submetric.

    d1, d2 are full-chart partial arrays; only base entries are used.
    Returns (npts, mb, mb) over the base coordinate subset.
    """
    part = geom.spec.partition
    idx = [i for b in range(min(2, part.nfactors)) for i in part.indices[b]]
    Gsub, _ = _sub_christoffel(geom, idx)
    d1s = d1[:, idx]
    d2s = d2[np.ix_(range(geom.npts), idx, idx)]
    return d2s - np.einsum("tabc,tc->tab", Gsub, d1s)


def laplacian_perp(geom, d1, d2):
    """Trace of the base Hessian over the second-factor frame block."""
    part = geom.spec.partition
    if part.nfactors < 2 or part.dims[1] == 0:
        raise ValueError("perpendicular trace needs a nonempty second factor")
    H = hessian_on_base(geom, d1, d2)
    idx = [i for b in range(2) for i in part.indices[b]]
    # second-factor frame vectors of a block metric have no third-factor
    # components, so restricting to base coordinates loses nothing
    Es = geom.frame.block(1)[:, :, idx]
    return np.einsum("tka,tab,tkb->t", Es, H, Es)


def leaf_laplacian(geom, d1, d2, block=1):
    """Laplacian of a scalar along one factor's leaf, in the induced metric."""
    part = geom.spec.partition
    idx = list(part.indices[block])
    if not idx:
        return np.zeros(geom.npts)
    Gsub, ginvsub = _sub_christoffel(geom, idx)
    d1s = d1[:, idx]
    d2s = d2[np.ix_(range(geom.npts), idx, idx)]
    H = d2s - np.einsum("tabc,tc->tab", Gsub, d1s)
    return np.einsum("tab,tab->t", ginvsub, H)


def curvature_identity_residual(geom, warping):
    """Mixed curvature against the base Hessian of the outer warping factor.

    For base coordinate vectors X, Z and a third-factor vector W:
    R(X, W)Z = (1/h) Hess_h(X, Z) W under the curvature convention used
    here.  Returns the per-point max g-norm of the defect; None if either
    side of the pairing is empty.
    """
    part = geom.spec.partition
    if part.nfactors < 3 or part.dims[2] == 0:
        return None
    base = [i for b in range(2) for i in part.indices[b]]
    if not base:
        return None
    tail = list(part.indices[2])
    m = geom.spec.dim
    H = hessian_on_base(geom, warping.dh, warping.d2h)
    R = geom.curvature_up[np.ix_(range(geom.npts), base, tail, base, range(m))]
    # R[t, a, y, z, d] - (1/h) H[t, a, z] delta[y, d]
    want = np.zeros_like(R)
    for ky, y in enumerate(tail):
        want[:, :, ky, :, y] = H / warping.h[:, None, None]
    diff = R - want
    norms = _norm_g(geom, diff)
    return norms.reshape(geom.npts, -1).max(axis=1)
