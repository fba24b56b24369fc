"""Warped block metrics: extraction, connection and curvature identities."""
import numpy as np
import pytest

from seqwarp.ambient import KaehlerAmbient
from seqwarp.geometry import BatchGeometry, FactorPartition, ImmersionSpec
from seqwarp.warped import (
    WarpingFunctions,
    _scalar_jets,
    connection_identity_residuals,
    curvature_identity_residual,
    evaluate_base_metric,
    hessian_on_base,
    laplacian_perp,
    leaf_laplacian,
    verify_block_metric,
)


def _spec(chart, comps, N, factors):
    part = FactorPartition(chart, factors)
    return ImmersionSpec(chart, comps, KaehlerAmbient(N), partition=part)


def _cylinder_polar():
    # dv^2 + du^2 + u^2 dt^2: trivial f, h = u
    return _spec(
        ("v", "u", "t"),
        ("v", "0", "u*cos(t)", "u*sin(t)", "0", "0"),
        6,
        (("v",), ("u",), ("t",)),
    )


def _sphere_as_warped():
    # d th^2 + sin(th)^2 d ph^2: empty middle factor, h = sin(th)
    return _spec(
        ("th", "ph"),
        ("sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)", "0"),
        4,
        (("th",), (), ("ph",)),
    )


class TestWarpingFunctions:
    def test_values_and_gradients(self):
        spec = _spec(("u", "v"), ("u", "v", "0", "0"), 4, (("u",), ("v",)))
        geom = BatchGeometry(spec, np.array([[0.5, 1.0], [1.5, 2.0]]))
        w = WarpingFunctions(geom, "exp(0.5*u)", "1+u^2")
        assert np.allclose(w.f, np.exp(0.5 * geom.points[:, 0]))
        assert np.allclose(np.sqrt(w.grad_norm_sq("f")), 0.5, atol=1e-12)
        assert w.properness() == {"f_nonconstant": True, "h_nonconstant": True}
        flat = WarpingFunctions(geom, "2", "3")
        assert flat.properness() == {"f_nonconstant": False, "h_nonconstant": False}

    def test_dependency_validation(self):
        spec = _spec(("u", "v"), ("u", "v", "0", "0"), 4, (("u",), ("v",)))
        geom = BatchGeometry(spec, np.array([[0.5, 1.0]]))
        with pytest.raises(ValueError, match="may not depend"):
            WarpingFunctions(geom, "1+v^2", "1")
        WarpingFunctions(geom, "1", "1+v^2")  # h may use the second factor

    def test_positivity_enforced(self):
        spec = _spec(("u",), ("u", "0"), 2, (("u",),))
        geom = BatchGeometry(spec, np.array([[2.0]]))
        with pytest.raises(ValueError, match="nonpositive"):
            WarpingFunctions(geom, "1-u", "1")

    def test_tangent_gradient_restriction(self):
        # h depends on both factors; the first-factor component is 1/h * dh/du
        spec = _spec(("u", "v"), ("u", "v", "0", "0"), 4, (("u",), ("v",)))
        geom = BatchGeometry(spec, np.array([[1.0, 2.0]]))
        w = WarpingFunctions(geom, "1", "exp(u+0.5*v)")
        assert w.tangent_grad_norm_sq("h")[0] == pytest.approx(1.0, abs=1e-12)
        assert w.grad_norm_sq("h")[0] == pytest.approx(1.25, abs=1e-12)


class TestBlockMetric:
    def test_clean_cylinder(self):
        spec = _cylinder_polar()
        geom = BatchGeometry(spec, np.array([[0.2, 1.5, 0.8], [1.0, 0.7, 2.0]]))
        w = WarpingFunctions(geom, "1", "u")
        g2 = evaluate_base_metric(geom, ["1"], 1)
        g3 = evaluate_base_metric(geom, ["1"], 2)
        rep = verify_block_metric(geom, w, g2, g3)
        assert rep.off_block_norm < 1e-13
        assert rep.f_match < 1e-13
        assert rep.h_match < 1e-13
        assert np.allclose(rep.h_extracted, geom.points[:, 1])

    def test_cross_term_detected(self):
        spec = _spec(("u", "v"), ("u", "v+0.1*u", "0", "0"), 4, (("u",), ("v",)))
        geom = BatchGeometry(spec, np.array([[1.0, 1.0]]))
        w = WarpingFunctions(geom, "1", "1")
        g2 = evaluate_base_metric(geom, ["1"], 1)
        rep = verify_block_metric(geom, w, g2, np.zeros((1, 0)))
        assert rep.off_block_norm == pytest.approx(0.1, abs=1e-13)

    def test_base_metric_validation(self):
        spec = _cylinder_polar()
        geom = BatchGeometry(spec, np.array([[0.2, 1.5, 0.8]]))
        with pytest.raises(ValueError, match="entries"):
            evaluate_base_metric(geom, ["1", "1"], 1)
        with pytest.raises(ValueError, match="nonpositive"):
            evaluate_base_metric(geom, ["-1"], 1)


class TestConnectionIdentities:
    def test_cylinder_polar(self):
        spec = _cylinder_polar()
        rng = np.random.default_rng(0)
        pts = np.column_stack(
            [rng.uniform(-1, 1, 5), rng.uniform(0.5, 2.0, 5), rng.uniform(0, 3, 5)]
        )
        geom = BatchGeometry(spec, pts)
        w = WarpingFunctions(geom, "1", "u")
        res = connection_identity_residuals(geom, w)
        for name in ("prop21_1", "prop21_2", "prop21_3"):
            assert res[name].max() < 1e-10, name

    def test_empty_factor_returns_none(self):
        spec = _sphere_as_warped()
        geom = BatchGeometry(spec, np.array([[1.0, 0.5]]))
        w = WarpingFunctions(geom, "1", "sin(th)")
        res = connection_identity_residuals(geom, w)
        assert res["prop21_1"] is None
        assert res["prop21_3"] is None
        assert res["prop21_2"].max() < 1e-10

    def test_violated_for_wrong_warping(self):
        spec = _cylinder_polar()
        geom = BatchGeometry(spec, np.array([[0.0, 1.5, 0.8]]))
        w = WarpingFunctions(geom, "1", "u^2")
        res = connection_identity_residuals(geom, w)
        assert res["prop21_3"].max() > 0.1


class TestHessianAndLaplacian:
    def test_radial_square_hessian(self):
        # Hess(r^2) = 2 g in flat polar coordinates
        spec = _spec(("u", "t"), ("u*cos(t)", "u*sin(t)", "0", "0"), 4, (("u",), ("t",)))
        pts = np.array([[1.3, 0.4], [0.6, 2.0]])
        geom = BatchGeometry(spec, pts)
        _, d1, d2 = _scalar_jets(geom, "u^2")
        H = hessian_on_base(geom, d1, d2)
        assert np.allclose(H, 2.0 * geom.g, atol=1e-11)

    def test_full_laplacian_in_polar(self):
        spec = _spec(("u", "t"), ("u*cos(t)", "u*sin(t)", "0", "0"), 4, (("u", "t"),))
        geom = BatchGeometry(spec, np.array([[1.3, 0.4], [0.6, 2.0]]))
        _, d1, d2 = _scalar_jets(geom, "u^2")
        lap = leaf_laplacian(geom, d1, d2, block=0)
        assert np.allclose(lap, 4.0, atol=1e-11)

    def test_perp_trace_matches_hand_value(self):
        # base metric dv^2 + du^2, second-factor frame is d/du
        spec = _cylinder_polar()
        geom = BatchGeometry(spec, np.array([[0.3, 1.2, 0.7]]))
        _, d1, d2 = _scalar_jets(geom, "u^3")
        lap = laplacian_perp(geom, d1, d2)
        assert lap[0] == pytest.approx(6.0 * 1.2, abs=1e-11)

    def test_perp_trace_empty_block(self):
        spec = _sphere_as_warped()
        geom = BatchGeometry(spec, np.array([[1.0, 0.5]]))
        _, d1, d2 = _scalar_jets(geom, "th")
        with pytest.raises(ValueError, match="second factor"):
            laplacian_perp(geom, d1, d2)


class TestCurvatureIdentity:
    def test_sphere_warped_structure(self):
        # the classical dx^2 + h(x)^2 dy^2 case with h = sin
        spec = _sphere_as_warped()
        rng = np.random.default_rng(1)
        pts = np.column_stack([rng.uniform(0.4, 2.6, 6), rng.uniform(0, 6, 6)])
        geom = BatchGeometry(spec, pts)
        w = WarpingFunctions(geom, "1", "sin(th)")
        res = curvature_identity_residual(geom, w)
        assert res.max() < 1e-9

    def test_flat_cylinder(self):
        spec = _cylinder_polar()
        geom = BatchGeometry(spec, np.array([[0.1, 1.4, 0.9]]))
        w = WarpingFunctions(geom, "1", "u")
        res = curvature_identity_residual(geom, w)
        assert res.max() < 1e-10

    def test_mixed_curvature_sign_pinned(self):
        # R(d_th, d_ph)d_th = (h''/h) d_ph with h = sin: the component is -1.
        # The opposite sign convention would give +1, so the identity is a
        # genuine two-sided sign check, not a symmetric residual.
        spec = _sphere_as_warped()
        geom = BatchGeometry(spec, np.array([[1.1, 0.3]]))
        assert geom.curvature_up[0, 0, 1, 0, 1] == pytest.approx(-1.0, abs=1e-9)

    def test_empty_third_factor(self):
        spec = _spec(("u", "v"), ("u", "v", "0", "0"), 4, (("u",), ("v",)))
        geom = BatchGeometry(spec, np.array([[0.5, 1.0]]))
        w = WarpingFunctions(geom, "1", "1")
        assert curvature_identity_residual(geom, w) is None
