"""Flat even-dimensional ambient space with a compatible complex structure.

The ambient metric is always the standard Euclidean one.  A nonzero
holomorphic sectional curvature ``c`` only changes the curvature tensor used
on the right-hand side of curvature identities; no curved model chart is
provided.
"""
import numpy as np

_J_TOL = 1e-12


def standard_complex_structure(n, pairing="consecutive_pairs", matrix=None):
    """2n x 2n complex structure; consecutive_pairs sends e1 -> e2, e2 -> -e1.

    With ``pairing="explicit_matrix"`` the supplied matrix is validated
    against J^2 = -I and orthogonality and returned as a copy.
    """
    if n < 1:
        raise ValueError("need n >= 1 complex dimensions")
    N = 2 * n
    if pairing == "consecutive_pairs":
        J = np.zeros((N, N))
        for k in range(n):
            J[2 * k + 1, 2 * k] = 1.0
            J[2 * k, 2 * k + 1] = -1.0
        return J
    if pairing == "explicit_matrix":
        J = np.asarray(matrix, dtype=float)
        if J.shape != (N, N):
            raise ValueError(f"explicit matrix must be {N}x{N}, got {J.shape}")
        if np.abs(J @ J + np.eye(N)).max() > _J_TOL:
            raise ValueError("explicit matrix violates J^2 = -I")
        if np.abs(J.T @ J - np.eye(N)).max() > _J_TOL:
            raise ValueError("explicit matrix is not orthogonal")
        return J.copy()
    raise ValueError(f"unknown pairing {pairing!r}")


class KaehlerAmbient:
    """Even real dimension, orthogonal complex structure, curvature constant."""

    def __init__(self, real_dim, J=None, c=0.0):
        if real_dim % 2 != 0 or real_dim < 2:
            raise ValueError(f"ambient dimension must be even and positive, got {real_dim}")
        self.real_dim = real_dim
        if J is None:
            J = standard_complex_structure(real_dim // 2)
        else:
            J = standard_complex_structure(real_dim // 2, "explicit_matrix", J)
        self.J = J
        self.c = float(c)

    def apply_J(self, X):
        """J X for component arrays of shape (..., N)."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.real_dim:
            raise ValueError(f"vector dimension {X.shape[-1]} != ambient {self.real_dim}")
        return X @ self.J.T


def ambient_curvature(amb, X, Y, Z):
    """Curvature operator of the constant-holomorphic-curvature model.

    R(X,Y)Z = (c/4){<Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY + 2<X,JY>JZ},
    with the Euclidean inner product; identically zero in the flat case.
    Accepts component arrays of shape (..., N) and broadcasts.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    for V in (X, Y, Z):
        if V.shape[-1] != amb.real_dim:
            raise ValueError(f"vector dimension {V.shape[-1]} != ambient {amb.real_dim}")
    if amb.c == 0.0:
        return np.zeros(np.broadcast_shapes(X.shape, Y.shape, Z.shape))
    JX = amb.apply_J(X)
    JY = amb.apply_J(Y)
    JZ = amb.apply_J(Z)
    dot = lambda a, b: np.sum(a * b, axis=-1, keepdims=True)
    out = dot(Y, Z) * X - dot(X, Z) * Y
    out += dot(JY, Z) * JX - dot(JX, Z) * JY
    out += 2.0 * dot(X, JY) * JZ
    return 0.25 * amb.c * out


def curvature_inner(amb, X, Y, Z, W):
    """<R(X,Y)Z, W> in the Euclidean inner product."""
    if amb.c == 0.0:
        shape = np.broadcast_shapes(
            np.shape(X)[:-1], np.shape(Y)[:-1], np.shape(Z)[:-1], np.shape(W)[:-1]
        )
        return np.zeros(shape)
    return np.sum(ambient_curvature(amb, X, Y, Z) * np.asarray(W, dtype=float), axis=-1)
