"""Submanifold invariants of a parametrized immersion, batched over points.

Everything derives from order-3 jets of the component functions: metric,
Christoffel symbols, second fundamental form, intrinsic curvature, and
orthonormal frames adapted to a factor partition of the chart.

Curvature sign convention: R(X,Y)Z = [nabla_X, nabla_Y]Z - nabla_[X,Y]Z,
so on the unit round sphere g(R(X,Y)Y,X) = +1 for orthonormal X, Y.
"""
from functools import cached_property

import numpy as np

from . import jetcore
from .exprs import free_variables, jet_coefficients, parse_expression

RANK_TOL = 1e-8
FRAME_TOL = 1e-10


class FactorPartition:
    """Ordered split of the chart into up to three coordinate blocks.

    Blocks may be empty; together they must cover the chart exactly once,
    in declaration order.
    """

    def __init__(self, chart, factors):
        self.chart = tuple(chart)
        self.factors = tuple(tuple(f) for f in factors)
        flat = [name for f in self.factors for name in f]
        if flat != list(self.chart):
            raise ValueError(
                f"factors {self.factors} must concatenate to the chart {self.chart}"
            )
        pos = {name: i for i, name in enumerate(self.chart)}
        self.indices = tuple(tuple(pos[name] for name in f) for f in self.factors)
        self.dims = tuple(len(f) for f in self.factors)

    @property
    def nfactors(self):
        return len(self.factors)

    def block_of(self, coord_index):
        for b, idx in enumerate(self.indices):
            if coord_index in idx:
                return b
        raise IndexError(coord_index)


class ImmersionSpec:
    """Chart names, one expression per ambient component, and the ambient."""

    def __init__(self, chart, components, ambient, partition=None):
        self.chart = tuple(chart)
        if len(set(self.chart)) != len(self.chart):
            raise ValueError("chart names must be distinct")
        self.ambient = ambient
        parsed = []
        for comp in components:
            if isinstance(comp, str):
                comp = parse_expression(comp, self.chart)
            parsed.append(comp)
        self.components = tuple(parsed)
        if len(self.components) != ambient.real_dim:
            raise ValueError(
                f"{len(self.components)} components for ambient dimension {ambient.real_dim}"
            )
        used = set().union(*(free_variables(c) for c in self.components)) if parsed else set()
        extra = used - set(self.chart)
        if extra:
            raise ValueError(f"components use unknown coordinates {sorted(extra)}")
        if partition is None:
            partition = FactorPartition(self.chart, [self.chart])
        self.partition = partition

    @property
    def dim(self):
        return len(self.chart)


def _partial_tables(space):
    """Rank and multiplicity tables for extracting 2nd and 3rd partials."""
    m = space.nvars
    pr = np.empty((m, m), dtype=np.intp)
    pf = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            pr[i, j], pf[i, j] = space.partial_rank((i, j))
    tr = np.empty((m, m, m), dtype=np.intp)
    tf = np.empty((m, m, m))
    for i in range(m):
        for j in range(m):
            for k in range(m):
                tr[i, j, k], tf[i, j, k] = space.partial_rank((i, j, k))
    return pr, pf, tr, tf


def gram_schmidt(g, seeds, tol=FRAME_TOL):
    """Orthonormalize seed chart vectors in the metric g, batched.

    g has shape (npts, m, m), seeds (k, m) or (npts, k, m).  Returns
    (npts, k, m).  A seed that collapses below tol raises.
    """
    npts, m, _ = g.shape
    seeds = np.asarray(seeds, dtype=float)
    if seeds.ndim == 2:
        seeds = np.broadcast_to(seeds, (npts,) + seeds.shape)
    k = seeds.shape[1]
    out = np.empty((npts, k, m))
    for a in range(k):
        v = seeds[:, a, :].copy()
        for b in range(a):
            u = out[:, b, :]
            coef = np.einsum("ti,tij,tj->t", v, g, u)
            v -= coef[:, None] * u
        norm2 = np.einsum("ti,tij,tj->t", v, g, v)
        if np.any(norm2 < tol * tol):
            raise ValueError(f"frame vector {a} degenerates under orthonormalization")
        out[:, a, :] = v / np.sqrt(norm2)[:, None]
    return out


class AdaptedFrame:
    """Orthonormal tangent frame in factor order plus a full normal frame.

    tangent[t, k, :] holds chart components, tangent_ambient[t, k, :] the
    same vectors pushed to the ambient, normal[t, r, :] an orthonormal
    basis of the normal space built from ambient axes (largest residual
    first, ties to the lowest axis index).
    """

    def __init__(self, geom):
        part = geom.spec.partition
        m = geom.spec.dim
        order = [i for idx in part.indices for i in idx]
        seeds = np.eye(m)[order]
        self.tangent = gram_schmidt(geom.g, seeds)
        self.tangent_ambient = np.einsum("tki,tia->tka", self.tangent, geom.jac)
        self.block_slices = []
        start = 0
        for d in part.dims:
            self.block_slices.append(slice(start, start + d))
            start += d
        self._build_normal(geom)

    def _build_normal(self, geom):
        N = geom.spec.ambient.real_dim
        npts, m, _ = self.tangent_ambient.shape
        U = self.tangent_ambient.copy()
        basis = np.eye(N)
        for _ in range(N - m):
            proj = np.einsum("tka,tkb->tab", U, U)
            res = basis[None, :, :] - proj
            norms = np.linalg.norm(res, axis=2)
            pick = np.argmax(norms, axis=1)
            w = res[np.arange(npts), pick, :]
            # second orthogonalization pass tightens the numerics
            w -= np.einsum("tk,tka->ta", np.einsum("tka,ta->tk", U, w), U)
            n = np.linalg.norm(w, axis=1)
            if np.any(n < FRAME_TOL):
                raise ValueError("normal space collapsed; immersion is degenerate here")
            U = np.concatenate([U, (w / n[:, None])[:, None, :]], axis=1)
        self.normal = U[:, m:, :]
        self.full = U

    def block(self, b):
        """Chart components of the frame vectors spanning factor b."""
        return self.tangent[:, self.block_slices[b], :]

    def block_ambient(self, b):
        return self.tangent_ambient[:, self.block_slices[b], :]

    def orthonormality_defect(self):
        gram = np.einsum("tka,tla->tkl", self.full, self.full)
        eye = np.eye(gram.shape[1])
        return np.abs(gram - eye).max()


class BatchGeometry:
    """All pointwise invariants for a batch of chart points."""

    def __init__(self, spec, points, rank_tol=RANK_TOL):
        self.spec = spec
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[None, :]
        if points.shape[1] != spec.dim:
            raise ValueError(f"points have {points.shape[1]} coordinates, chart has {spec.dim}")
        self.points = points
        self.npts = points.shape[0]
        m = spec.dim
        N = spec.ambient.real_dim
        space = jetcore.jet_space(m, 3)
        self.space = space
        jets = np.empty((N, self.npts, space.ncoef))
        for a, comp in enumerate(spec.components):
            jets[a] = jet_coefficients(comp, space, points, spec.chart)
        self.jets = jets
        self.x = jets[:, :, 0].T.copy()

        pr, pf, tr, tf = _partial_tables(space)
        var_rank = space.var_rank
        # jac[t, i, a] = d x_a / d u_i
        self.jac = jets[:, :, var_rank].transpose(1, 2, 0).copy()
        d2 = jets[:, :, pr.ravel()].reshape(N, self.npts, m, m) * pf[None, None, :, :]
        self.d2 = d2.transpose(1, 2, 3, 0)
        d3 = jets[:, :, tr.ravel()].reshape(N, self.npts, m, m, m) * tf[None, None]
        self.d3 = d3.transpose(1, 2, 3, 4, 0)

        self.g = np.einsum("tia,tja->tij", self.jac, self.jac)
        self.svals = np.linalg.svd(self.jac, compute_uv=False)
        self.singular = self.svals[:, -1] < rank_tol
        safe_g = self.g.copy()
        if np.any(self.singular):
            safe_g[self.singular] = np.eye(m)
        self.ginv = np.linalg.inv(safe_g)

        # tangential projector in ambient components, then the shape tensor
        self.proj = np.einsum("tia,tij,tjb->tab", self.jac, self.ginv, self.jac)
        self.B = self.d2 - np.einsum("tab,tijb->tija", self.proj, self.d2)

        # dg[t, c, i, j] = d g_ij / d u_c
        self.dg = np.einsum("tcia,tja->tcij", self.d2, self.jac)
        self.dg = self.dg + self.dg.transpose(0, 1, 3, 2)
        # half[t, a, b, c] = (d_a g_cb + d_b g_ca - d_c g_ab) / 2
        half = 0.5 * (
            np.einsum("tacb->tabc", self.dg)
            + np.einsum("tbca->tabc", self.dg)
            - np.einsum("tcab->tabc", self.dg)
        )
        # Gamma[t, a, b, d]: upper index last
        self.Gamma = np.einsum("tdc,tabc->tabd", self.ginv, half)
        self._half = half

    @cached_property
    def frame(self):
        return AdaptedFrame(self)

    @cached_property
    def d2g(self):
        # d2g[t, a, b, i, j] = d^2 g_ij / du_a du_b
        d3, d2, jac = self.d3, self.d2, self.jac
        out = np.einsum("tabix,tjx->tabij", d3, jac)
        out = out + out.transpose(0, 1, 2, 4, 3)
        cross = np.einsum("tbix,tajx->tabij", d2, d2)
        out += cross + cross.transpose(0, 1, 2, 4, 3)
        return out

    @cached_property
    def dGamma(self):
        # dGamma[t, e, a, b, d] = d Gamma^d_ab / du_e
        dginv = -np.einsum("tij,tejk,tkl->teil", self.ginv, self.dg, self.ginv)
        dhalf = 0.5 * (
            np.einsum("teacb->teabc", self.d2g)
            + np.einsum("tebca->teabc", self.d2g)
            - np.einsum("tecab->teabc", self.d2g)
        )
        return np.einsum("tedc,tabc->teabd", dginv, self._half) + np.einsum(
            "tdc,teabc->teabd", self.ginv, dhalf
        )

    @cached_property
    def curvature_up(self):
        """R[t, a, b, c, d] with the last index raised: R(e_a, e_b)e_c = R^d e_d."""
        G = self.Gamma
        # dGamma layout [t, e, a, b, d]: d_a Gamma^d_bc is dGamma[t, a, b, c, d]
        return (
            self.dGamma
            - np.einsum("tbacd->tabcd", self.dGamma)
            + np.einsum("tbce,taed->tabcd", G, G)
            - np.einsum("tace,tbed->tabcd", G, G)
        )

    @cached_property
    def curvature(self):
        """Rlow[t, a, b, c, d] = g(R(e_a, e_b) e_c, e_d) in chart coordinates."""
        return np.einsum("tabce,ted->tabcd", self.curvature_up, self.g)

    def metric_compat_defect(self):
        """Max violation of nabla g = 0, a Christoffel self-check."""
        cov = self.dg - np.einsum("tcie,tej->tcij", self.Gamma, self.g) - np.einsum(
            "tcje,tie->tcij", self.Gamma, self.g
        )
        return np.abs(cov).max()


def geometry(spec, points, rank_tol=RANK_TOL):
    return BatchGeometry(spec, points, rank_tol=rank_tol)


def geometry_at(spec, point, rank_tol=RANK_TOL):
    """Single-point convenience wrapper."""
    return BatchGeometry(spec, np.asarray(point, dtype=float)[None, :], rank_tol=rank_tol)


def mean_curvature(geom):
    """H[t, a] = (1/m) g^{ij} B_ij^a, an ambient normal vector."""
    m = geom.spec.dim
    return np.einsum("tij,tija->ta", geom.ginv, geom.B) / m


def weingarten(geom, xi):
    """Shape operator of a normal field: A[t, i, j] with one index raised.

    xi has shape (npts, N); g(A X, Y) = <B(X,Y), xi>.
    """
    form = np.einsum("tija,ta->tij", geom.B, xi)
    return np.einsum("tik,tkj->tij", geom.ginv, form)


def ambient_curvature_matrix(geom):
    """Rbar[t, a, b, c, d] of the constant-curvature model on chart vectors."""
    amb = geom.spec.ambient
    npts, m = geom.npts, geom.spec.dim
    if amb.c == 0.0:
        return np.zeros((npts, m, m, m, m))
    K = np.einsum("tia,ab,tjb->tij", geom.jac, amb.J.T, geom.jac)
    # K[i, j] = <J e_i, e_j>; the model tensor in lowered chart indices
    g = geom.g
    out = np.einsum("tbc,tad->tabcd", g, g) - np.einsum("tac,tbd->tabcd", g, g)
    out += np.einsum("tbc,tad->tabcd", K, K) - np.einsum("tac,tbd->tabcd", K, K)
    out += 2.0 * np.einsum("tba,tcd->tabcd", K, K)
    return 0.25 * amb.c * out


def gauss_equation_residual(geom):
    """Pointwise max-abs defect of the curvature/shape-tensor relation.

    Rbar(X,Y,Z,W) = R(X,Y,Z,W) - <B(X,W),B(Y,Z)> + <B(Y,W),B(X,Z)>
    on coordinate vectors; zero for an exact immersion into the model.
    """
    BB = np.einsum("tija,tkla->tijkl", geom.B, geom.B)
    res = (
        ambient_curvature_matrix(geom)
        - geom.curvature
        + np.einsum("tadbc->tabcd", BB)
        - np.einsum("tbdac->tabcd", BB)
    )
    return np.abs(res).reshape(geom.npts, -1).max(axis=1)
