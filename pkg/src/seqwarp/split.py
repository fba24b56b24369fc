"""Tangential/normal splitting of the complex structure along an immersion.

For a tangent vector X, JX decomposes as TX + FX with TX tangent and FX
normal.  The angle between JX and the tangent space (or a chosen
distribution) classifies directions: complex, totally real, or slant.
"""
from dataclasses import dataclass

import numpy as np

from .sampling import sphere_probes

TYPE_TOL = 1e-6
SPREAD_TOL = 1e-6


def push_tangent(geom, chart_vecs):
    """Ambient components of chart vectors; accepts (k, m) or (npts, k, m)."""
    chart_vecs = np.asarray(chart_vecs, dtype=float)
    if chart_vecs.ndim == 2:
        chart_vecs = np.broadcast_to(
            chart_vecs, (geom.npts,) + chart_vecs.shape
        )
    return np.einsum("tki,tia->tka", chart_vecs, geom.jac)


def tangential_chart_components(geom, X):
    """Chart components of the tangential part of ambient vectors (npts,k,N)."""
    return np.einsum("tij,tja,tka->tki", geom.ginv, geom.jac, X)


@dataclass
class SplitVector:
    """JX = tangential + normal, all in ambient components."""

    tangential: np.ndarray
    normal: np.ndarray

    @property
    def tangential_norm(self):
        return np.linalg.norm(self.tangential, axis=-1)

    @property
    def normal_norm(self):
        return np.linalg.norm(self.normal, axis=-1)


def split_J(geom, X):
    """Split J applied to tangent ambient vectors X of shape (npts, k, N)."""
    X = np.asarray(X, dtype=float)
    squeeze = X.ndim == 2
    if squeeze:
        X = X[:, None, :]
    JX = geom.spec.ambient.apply_J(X)
    T = np.einsum("tab,tkb->tka", geom.proj, JX)
    F = JX - T
    if squeeze:
        T, F = T[:, 0], F[:, 0]
    return SplitVector(T, F)


def wirtinger_angle(geom, X, reference="full_tangent_space", block=None):
    """Angle between JX and a reference subspace, per point and direction.

    reference "full_tangent_space": angle to the whole tangent space.
    reference "slant_distribution": angle to the span of one factor's
    frame block (the last factor unless block says otherwise).
    Returns radians in [0, pi/2], shape (npts, k).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[:, None, :]
    norms = np.linalg.norm(X, axis=-1)
    JX = geom.spec.ambient.apply_J(X)
    if reference == "full_tangent_space":
        proj = np.einsum("tab,tkb->tka", geom.proj, JX)
    elif reference == "slant_distribution":
        if block is None:
            block = geom.spec.partition.nfactors - 1
        E = geom.frame.block_ambient(block)
        coef = np.einsum("tra,tka->tkr", E, JX)
        proj = np.einsum("tkr,tra->tka", coef, E)
    else:
        raise ValueError(f"unknown reference {reference!r}")
    cos = np.linalg.norm(proj, axis=-1) / norms
    return np.arccos(np.clip(cos, 0.0, 1.0))


@dataclass
class SlantReport:
    """Angle statistics of one factor block under J."""

    block: int
    dim: int
    kind: str
    theta_mean: float
    theta_min: float
    theta_max: float
    cos_mean: float
    direction_spread: float
    point_spread: float

    def as_dict(self):
        return {
            "block": self.block,
            "dim": self.dim,
            "kind": self.kind,
            "theta_mean": self.theta_mean,
            "theta_min": self.theta_min,
            "theta_max": self.theta_max,
            "cos_mean": self.cos_mean,
            "direction_spread": self.direction_spread,
            "point_spread": self.point_spread,
        }


def _block_probe_vectors(geom, block, nprobes, probe_start):
    E = geom.frame.block_ambient(block)
    d = E.shape[1]
    weights = sphere_probes(d, nprobes, start=probe_start)
    return np.einsum("pr,tra->tpa", weights, E)


def classify_distributions(
    geom, nprobes=24, probe_start=1, type_tol=TYPE_TOL, spread_tol=SPREAD_TOL
):
    """Per-factor slant statistics from deterministic probe directions."""
    reports = []
    for b in range(geom.spec.partition.nfactors):
        if geom.spec.partition.dims[b] == 0:
            continue
        X = _block_probe_vectors(geom, b, nprobes, probe_start)
        theta = wirtinger_angle(geom, X)
        cos = np.cos(theta)
        dir_spread = float((cos.max(axis=1) - cos.min(axis=1)).max())
        per_point = cos.mean(axis=1)
        point_spread = float(per_point.max() - per_point.min())
        cmean = float(cos.mean())
        smean = float(np.sin(theta).mean())
        if smean < type_tol and dir_spread < spread_tol:
            kind = "complex"
        elif cmean < type_tol and dir_spread < spread_tol:
            kind = "totally_real"
        elif dir_spread < spread_tol and point_spread < spread_tol:
            kind = "slant"
        elif dir_spread < spread_tol:
            kind = "pointwise_slant"
        else:
            kind = "generic"
        reports.append(
            SlantReport(
                block=b,
                dim=geom.spec.partition.dims[b],
                kind=kind,
                theta_mean=float(theta.mean()),
                theta_min=float(theta.min()),
                theta_max=float(theta.max()),
                cos_mean=cmean,
                direction_spread=dir_spread,
                point_spread=point_spread,
            )
        )
    return reports


def slant_angle_per_point(geom, block=None, nprobes=24, probe_start=1):
    """Mean probe angle of a block relative to its own span, in radians."""
    if block is None:
        block = geom.spec.partition.nfactors - 1
    X = _block_probe_vectors(geom, block, nprobes, probe_start)
    return wirtinger_angle(geom, X, "slant_distribution", block=block).mean(axis=1)


def slant_angle_spread(geom, block=None, nprobes=24, probe_start=1):
    """Largest per-point range of the probe angles, a coherence measure."""
    if block is None:
        block = geom.spec.partition.nfactors - 1
    X = _block_probe_vectors(geom, block, nprobes, probe_start)
    theta = wirtinger_angle(geom, X, "slant_distribution", block=block)
    return theta.max(axis=1) - theta.min(axis=1)


@dataclass
class DistributionDefects:
    """How far the three blocks sit from their intended J-behavior."""

    holomorphic_defect: float
    anti_invariance_defect: float
    anti_invariance_pairing: float

    def as_dict(self):
        return {
            "holomorphic_defect": self.holomorphic_defect,
            "anti_invariance_defect": self.anti_invariance_defect,
            "anti_invariance_pairing": self.anti_invariance_pairing,
        }


def distribution_defects(geom, nprobes=24, probe_start=1):
    """Block 0 should be J-invariant; block 1 should be J-normal.

    holomorphic_defect: largest normal part of JX over unit X in block 0.
    anti_invariance_defect: largest tangential part of JZ over unit Z in
    block 1.  anti_invariance_pairing: largest raw pairing <J d_b, d_c>
    between a block-1 coordinate vector and any coordinate vector; unlike
    the defect this is not normalized by the metric.
    """
    part = geom.spec.partition
    holo = 0.0
    anti = 0.0
    if part.nfactors >= 1 and part.dims[0] > 0:
        X = _block_probe_vectors(geom, 0, nprobes, probe_start)
        holo = float(split_J(geom, X).normal_norm.max())
    if part.nfactors >= 2 and part.dims[1] > 0:
        Z = _block_probe_vectors(geom, 1, nprobes, probe_start)
        anti = float(split_J(geom, Z).tangential_norm.max())
    pairing = 0.0
    if part.nfactors >= 2 and part.dims[1] > 0:
        pairing = float(anti_invariance_pairing(geom).max())
    return DistributionDefects(holo, anti, pairing)


def anti_invariance_pairing(geom, block=1):
    """Largest raw pairing <J d_b, d_c> of a block-1 coordinate vector
    against any coordinate vector, per point; not metric-normalized."""
    part = geom.spec.partition
    rows = list(part.indices[block])
    if not rows:
        return np.zeros(geom.npts)
    K = np.einsum("tia,ab,tjb->tij", geom.jac, geom.spec.ambient.J.T, geom.jac)
    return np.abs(K[:, rows, :]).reshape(geom.npts, -1).max(axis=1)


def point_type(geom, nprobes=24, probe_start=1, tol=TYPE_TOL):
    """Whole-tangent-space type at each point: complex, totally_real, generic."""
    m = geom.spec.dim
    weights = sphere_probes(m, nprobes, start=probe_start)
    X = np.einsum("pk,tka->tpa", weights, geom.frame.tangent_ambient)
    theta = wirtinger_angle(geom, X)
    out = []
    for t in range(geom.npts):
        if np.sin(theta[t]).max() < tol:
            out.append("complex")
        elif np.cos(theta[t]).max() < tol:
            out.append("totally_real")
        else:
            out.append("generic")
    return out
