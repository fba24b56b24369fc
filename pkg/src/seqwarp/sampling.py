"""Deterministic low-discrepancy sampling used for chart points and probes."""
import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _radical_inverse(base, index):
    inv = 0.0
    f = 1.0 / base
    while index > 0:
        inv += f * (index % base)
        index //= base
        f /= base
    return inv


def halton_points(dim, count, start=1):
    """count x dim array of Halton points in (0,1); start shifts the index."""
    if dim > len(_PRIMES):
        raise ValueError(f"at most {len(_PRIMES)} dimensions supported")
    out = np.empty((count, dim))
    for j in range(dim):
        base = _PRIMES[j]
        for i in range(count):
            out[i, j] = _radical_inverse(base, start + i)
    return out


def scale_to_box(unit, lo, hi):
    """Map (0,1)^d points into the box [lo, hi] componentwise."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + unit * (hi - lo)


def sphere_probes(dim, count, start=1):
    """Deterministic unit vectors: Box-Muller applied to Halton pairs."""
    if dim < 1:
        raise ValueError("need a positive dimension")
    npairs = (dim + 1) // 2
    u = halton_points(2 * npairs, count, start=start)
    # keep the logarithm away from zero
    u1 = np.clip(u[:, 0::2], 1e-12, 1.0 - 1e-12)
    u2 = u[:, 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    normals = np.empty((count, 2 * npairs))
    normals[:, 0::2] = r * np.cos(2.0 * np.pi * u2)
    normals[:, 1::2] = r * np.sin(2.0 * np.pi * u2)
    normals = normals[:, :dim]
    norms = np.linalg.norm(normals, axis=1)
    # a zero draw cannot occur with the clip above, but stay defensive
    norms[norms == 0.0] = 1.0
    return normals / norms[:, None]
