"""Shared test utilities: error metrics and random expression generators."""
import math

import numpy as np

from seqwarp.exprs import evaluate_jet


def rel_err(a, b):
    """Max absolute difference normalized by the scale of the reference jet."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b).max() / max(1.0, np.abs(a).max())


def random_monomials(rng, nvars, degree=4, count=12):
    """List of (coeff, exponent-tuple) with total degree <= degree."""
    out = []
    for _ in range(count):
        while True:
            exps = tuple(int(rng.integers(0, degree + 1)) for _ in range(nvars))
            if sum(exps) <= degree:
                break
        out.append((float(rng.uniform(-2.0, 2.0)), exps))
    return out


def monomials_to_source(monomials, chart):
    parts = []
    for coeff, exps in monomials:
        factors = [repr(coeff)]
        for name, e in zip(chart, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        parts.append("*".join(factors))
    return "+".join(parts) if parts else "0"


def poly_jet_oracle(monomials, space, point):
    """Taylor coefficients of a polynomial, by direct binomial expansion.

    Exact up to rounding; independent of the jet arithmetic under test.
    """
    point = np.asarray(point, dtype=float)
    coeffs = np.zeros(space.ncoef)
    for r, alpha in enumerate(space.alphas):
        total = 0.0
        for coeff, exps in monomials:
            term = coeff
            for p, e, a in zip(point, exps, alpha):
                if a > e:
                    term = 0.0
                    break
                term *= math.comb(e, a) * p ** (e - a)
            total += term
        coeffs[r] = total
    return coeffs


def random_safe_expression(rng, chart, depth=3):
    """Random expression tree whose values stay finite on [0.1, 3]^m charts.

    Arguments of ln, sqrt and the divisor of / are shifted away from their
    domain boundaries, so nested finite differencing never steps outside.
    """

    def atom():
        if rng.random() < 0.6:
            return ("var", chart[int(rng.integers(len(chart)))])
        return ("num", float(np.round(rng.uniform(0.2, 2.5), 3)))

    def build(d):
        if d == 0:
            return atom()
        r = rng.random()
        if r < 0.16:
            return ("add", build(d - 1), build(d - 1))
        if r < 0.32:
            return ("sub", build(d - 1), build(d - 1))
        if r < 0.50:
            return ("mul", build(d - 1), build(d - 1))
        if r < 0.58:
            safe_div = ("add", ("num", 2.0), ("fun", "sin", build(d - 1)))
            return ("div", build(d - 1), safe_div)
        if r < 0.66:
            return ("fun", "sin", build(d - 1))
        if r < 0.74:
            return ("fun", "cos", build(d - 1))
        if r < 0.80:
            return ("fun", "exp", ("mul", ("num", 0.3), ("fun", "sin", build(d - 1))))
        if r < 0.85:
            return ("fun", "ln", ("add", ("num", 1.6), ("fun", "cos", build(d - 1))))
        if r < 0.90:
            return ("fun", "sqrt", ("add", ("num", 1.6), ("fun", "sin", build(d - 1))))
        if r < 0.95:
            return ("neg", build(d - 1))
        q = float(rng.choice(np.array([2.0, 3.0, 2.0])))
        return ("pow", ("fun", "cos", build(d - 1)), q)

    return build(depth)


def random_safe_case(rng, max_vars=4, depth=3, coeff_cap=1e6):
    """(expr, chart, point) with every jet coefficient finite and bounded."""
    while True:
        m = int(rng.integers(1, max_vars + 1))
        chart = tuple(f"z{i + 1}" for i in range(m))
        expr = random_safe_expression(rng, chart, depth=depth)
        point = rng.uniform(0.3, 1.8, size=m)
        try:
            jet = evaluate_jet(expr, point, chart)
        except ArithmeticError:
            continue
        c = jet.coeffs
        if np.all(np.isfinite(c)) and np.abs(c).max() < coeff_cap:
            return expr, chart, point


def load_case(name, count=6, start=1):
    """Geometry, warping, and check context for one shipped manifest."""
    from seqwarp.checks import CheckContext
    from seqwarp.geometry import BatchGeometry
    from seqwarp.manifest import resolve_manifest
    from seqwarp.sampling import halton_points, scale_to_box
    from seqwarp.warped import WarpingFunctions

    man = resolve_manifest(name)
    lo, hi = man.domain_box()
    pts = scale_to_box(halton_points(len(man.chart), count, start=start), lo, hi)
    geom = BatchGeometry(man.immersion_spec(), pts)
    warping = WarpingFunctions(geom, man.f_expr, man.h_expr)
    ctx = CheckContext(geom, warping, ordering=man.ordering)
    return man, geom, warping, ctx
