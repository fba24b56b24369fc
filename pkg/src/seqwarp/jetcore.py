"""Dense truncated multivariate Taylor jets, batched over evaluation points.

A jet stores the Taylor coefficients of a scalar function about a batch of
points: ``coeffs[p, r]`` is (d^alpha f / alpha!) at point p, where r indexes
the multi-index alpha in graded lexicographic order.  Degree is capped at 3
and the variable count at 6, which covers every chart this package evaluates.

The product is the only hot operation; it dispatches to a compiled kernel
when one was built, otherwise to the numpy fallback.  Everything else is
plain array code.
"""
import itertools
import math

import numpy as np

try:
    from ._jetcore import mul_into as _mul_into
    BACKEND = "compiled"
except ImportError:
    from ._jetcore_py import mul_into as _mul_into
    BACKEND = "python"

from ._jetcore_py import mul_into as _mul_into_py

MAX_VARS = 6
MAX_ORDER = 3

_SPACE_CACHE = {}


def jet_space(nvars, order=MAX_ORDER):
    key = (nvars, order)
    space = _SPACE_CACHE.get(key)
    if space is None:
        space = _SPACE_CACHE[key] = JetSpace(nvars, order)
    return space


class JetSpace:
    """Index tables for jets in ``nvars`` variables truncated at ``order``."""

    def __init__(self, nvars, order=MAX_ORDER):
        if not 1 <= nvars <= MAX_VARS:
            raise ValueError(f"jet spaces support 1 to {MAX_VARS} variables, got {nvars}")
        if not 1 <= order <= MAX_ORDER:
            raise ValueError(f"jet spaces support orders 1 to {MAX_ORDER}, got {order}")
        self.nvars = nvars
        self.order = order
        self.alphas = sorted(
            (a for a in itertools.product(range(order + 1), repeat=nvars) if sum(a) <= order),
            key=lambda a: (sum(a), a),
        )
        self.ncoef = len(self.alphas)
        self.rank = {alpha: r for r, alpha in enumerate(self.alphas)}
        self.degrees = np.array([sum(a) for a in self.alphas])
        # alpha! per rank; shared by derivative extraction and the FD oracle
        self.alpha_factorials = np.array(
            [math.prod(math.factorial(k) for k in a) for a in self.alphas], dtype=float
        )
        unit = lambda v: tuple(1 if w == v else 0 for w in range(nvars))
        self.var_rank = np.array([self.rank[unit(v)] for v in range(nvars)], dtype=np.intp)
        self._build_product_table()

    def _build_product_table(self):
        triples = []
        for i, a in enumerate(self.alphas):
            da = sum(a)
            for j, b in enumerate(self.alphas):
                if da + sum(b) > self.order:
                    continue
                s = tuple(x + y for x, y in zip(a, b))
                triples.append((self.rank[s], i, j))
        triples.sort()
        kk, ii, jj = zip(*triples)
        self.mul_kk = np.ascontiguousarray(kk, dtype=np.intp)
        self.mul_ii = np.ascontiguousarray(ii, dtype=np.intp)
        self.mul_jj = np.ascontiguousarray(jj, dtype=np.intp)
        self.mul_starts = np.ascontiguousarray(
            np.searchsorted(self.mul_kk, np.arange(self.ncoef)), dtype=np.intp
        )

    def partial_rank(self, vars_):
        """Rank and alpha! multiplier for the mixed partial along ``vars_``."""
        alpha = [0] * self.nvars
        for v in vars_:
            alpha[v] += 1
        if sum(alpha) > self.order:
            raise ValueError(f"partial of order {sum(alpha)} exceeds jet order {self.order}")
        r = self.rank[tuple(alpha)]
        return r, self.alpha_factorials[r]


def constant(space, values, npts=None):
    """Jet of a constant; ``values`` is a scalar or a length-npts array."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        if npts is None:
            npts = 1
        values = np.full(npts, float(values))
    out = np.zeros((values.shape[0], space.ncoef))
    out[:, 0] = values
    return out


def variable(space, v, values):
    """Jet of the v-th chart coordinate evaluated at ``values``."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    out = np.zeros((values.shape[0], space.ncoef))
    out[:, 0] = values
    out[:, space.var_rank[v]] = 1.0
    return out


def mul(space, a, b):
    out = np.empty_like(a)
    _mul_into(a, b, out, space.mul_ii, space.mul_jj, space.mul_kk, space.mul_starts)
    return out


def mul_py(space, a, b):
    out = np.empty_like(a)
    _mul_into_py(a, b, out, space.mul_ii, space.mul_jj, space.mul_kk, space.mul_starts)
    return out


def compose(space, coeffs, d0, d1, d2, d3):
    """Jet of phi(f) from the jet of f and derivatives of phi at f's value.

    ``d0..d3`` are arrays of phi^(k) evaluated at coeffs[:, 0].  Uses the
    truncated composition phi(c+v) = d0 + d1 v + d2 v^2/2 + d3 v^3/6 where v
    is the jet with its constant column zeroed; powers beyond the truncation
    order vanish automatically.
    """
    v = coeffs.copy()
    v[:, 0] = 0.0
    v2 = mul(space, v, v)
    v3 = mul(space, v2, v)
    out = v * d1[:, None]
    out += v2 * (0.5 * d2)[:, None]
    out += v3 * (d3 / 6.0)[:, None]
    out[:, 0] += d0
    return out


def derivative(space, coeffs, vars_):
    """Mixed partial along ``vars_`` (a sequence of variable indices)."""
    r, fact = space.partial_rank(vars_)
    return coeffs[:, r] * fact


class Jet:
    """Single-point view of a coefficient row: value plus symmetric partials."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space, coeffs):
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float).reshape(-1)

    @property
    def value(self):
        return float(self.coeffs[0])

    @property
    def order(self):
        return self.space.order

    @property
    def num_vars(self):
        return self.space.nvars

    def partial(self, *vars_):
        r, fact = self.space.partial_rank(vars_)
        return float(self.coeffs[r] * fact)
