"""Immersion invariants against textbook closed forms and finite differences."""
import numpy as np
import pytest

from seqwarp.ambient import KaehlerAmbient, curvature_inner
from seqwarp.geometry import (
    BatchGeometry,
    FactorPartition,
    ImmersionSpec,
    ambient_curvature_matrix,
    gauss_equation_residual,
    geometry_at,
    gram_schmidt,
    mean_curvature,
    weingarten,
)


def _spec(chart, comps, N, c=0.0, factors=None):
    part = FactorPartition(chart, factors) if factors else None
    return ImmersionSpec(chart, comps, KaehlerAmbient(N, c=c), partition=part)


def _sphere_spec(radius=1.0):
    r = repr(float(radius))
    return _spec(
        ("th", "ph"),
        (f"{r}*sin(th)*cos(ph)", f"{r}*sin(th)*sin(ph)", f"{r}*cos(th)", "0"),
        4,
    )


def _sphere_points(n=6, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack([rng.uniform(0.4, 2.6, n), rng.uniform(0.1, 5.9, n)])


class TestFirstOrder:
    def test_planar_patch_is_euclidean(self):
        spec = _spec(("u1", "u2"), ("u1", "u2", "0", "0"), 4)
        geom = BatchGeometry(spec, np.array([[0.3, -1.2], [2.0, 0.5]]))
        assert np.allclose(geom.g, np.eye(2)[None], atol=1e-14)
        assert np.abs(geom.B).max() == 0.0
        assert np.abs(geom.Gamma).max() == 0.0
        assert np.abs(geom.curvature).max() == 0.0

    def test_polar_chart_christoffels(self):
        spec = _spec(("u", "t"), ("u*cos(t)", "u*sin(t)", "0", "0"), 4)
        pts = np.array([[1.5, 0.7], [0.8, 2.1]])
        geom = BatchGeometry(spec, pts)
        for k, (u, _) in enumerate(pts):
            assert geom.g[k] == pytest.approx(np.diag([1.0, u * u]), abs=1e-13)
            # Gamma^u_tt = -u, Gamma^t_ut = 1/u, everything else zero
            want = np.zeros((2, 2, 2))
            want[1, 1, 0] = -u
            want[0, 1, 1] = want[1, 0, 1] = 1.0 / u
            assert geom.Gamma[k] == pytest.approx(want, abs=1e-12)
        # flat plane in curved-looking coordinates
        assert np.abs(geom.curvature).max() < 1e-11

    def test_circle_mean_curvature(self):
        spec = _spec(("t",), ("2*cos(t)", "2*sin(t)", "0", "0"), 4)
        geom = BatchGeometry(spec, np.array([[0.3], [1.9]]))
        H = mean_curvature(geom)
        assert np.linalg.norm(H, axis=1) == pytest.approx([0.5, 0.5], abs=1e-13)

    def test_singular_point_flagged(self):
        spec = _spec(("u1", "u2"), ("u1^2", "u2", "0", "0"), 4)
        geom = BatchGeometry(spec, np.array([[0.0, 1.0], [1.0, 1.0]]))
        assert geom.singular.tolist() == [True, False]


class TestSecondOrder:
    def test_unit_sphere_curvature(self):
        geom = BatchGeometry(_sphere_spec(), _sphere_points())
        th = geom.points[:, 0]
        assert np.allclose(geom.g[:, 0, 0], 1.0, atol=1e-12)
        assert np.allclose(geom.g[:, 1, 1], np.sin(th) ** 2, atol=1e-12)
        # sectional curvature +1: R(e_th, e_ph, e_ph, e_th) = det g
        want = np.sin(th) ** 2
        assert np.allclose(geom.curvature[:, 0, 1, 1, 0], want, atol=1e-9)

    def test_radius_scaling(self):
        geom = BatchGeometry(_sphere_spec(2.0), _sphere_points(4, seed=3))
        th = geom.points[:, 0]
        # K = 1/R^2, det g = R^4 sin^2
        want = 4.0 * np.sin(th) ** 2
        assert np.allclose(geom.curvature[:, 0, 1, 1, 0], want, atol=1e-8)
        H = mean_curvature(geom)
        assert np.allclose(np.linalg.norm(H, axis=1), 0.5, atol=1e-10)

    def test_sphere_shape_operator(self):
        geom = BatchGeometry(_sphere_spec(), _sphere_points(5, seed=1))
        # with the outward position normal, A = -identity
        A = weingarten(geom, geom.x)
        assert np.allclose(A, -np.eye(2)[None], atol=1e-10)

    def test_flat_torus(self):
        spec = _spec(("a", "b"), ("cos(a)", "sin(a)", "cos(b)", "sin(b)"), 4)
        rng = np.random.default_rng(2)
        geom = BatchGeometry(spec, rng.uniform(0, 6, size=(5, 2)))
        assert np.allclose(geom.g, np.eye(2)[None], atol=1e-13)
        assert np.abs(geom.curvature).max() < 1e-12
        H = mean_curvature(geom)
        assert np.allclose(np.linalg.norm(H, axis=1), np.sqrt(0.5), atol=1e-12)

    def test_metric_compatibility(self):
        geom = BatchGeometry(_sphere_spec(), _sphere_points(8, seed=5))
        assert geom.metric_compat_defect() < 1e-11

    def test_christoffel_derivative_vs_fd(self):
        spec = _spec(
            ("u", "v"),
            ("u*cos(v)", "u*sin(v)", "0.5*u^2", "exp(0.3*v)"),
            4,
        )
        p = np.array([1.2, 0.8])
        geom = geometry_at(spec, p)
        h = 1e-5
        for c in range(2):
            dp = np.zeros(2)
            dp[c] = h
            gp = geometry_at(spec, p + dp).Gamma[0]
            gm = geometry_at(spec, p - dp).Gamma[0]
            fd = (gp - gm) / (2 * h)
            assert np.abs(geom.dGamma[0, c] - fd).max() < 1e-6

    def test_gauss_equation_flat_ambient(self):
        specs = [
            _sphere_spec(),
            _spec(("a", "b"), ("cos(a)", "sin(a)", "cos(b)", "sin(b)"), 4),
            _spec(("u", "v"), ("u", "v", "u^2-v^2", "u*v"), 4),
        ]
        for spec in specs:
            rng = np.random.default_rng(7)
            pts = rng.uniform(0.4, 1.8, size=(6, 2))
            geom = BatchGeometry(spec, pts)
            assert gauss_equation_residual(geom).max() < 1e-9

    def test_gauss_equation_curved_ambient(self):
        # flat immersion, nonzero model curvature on the right-hand side:
        # the residual measures deviation from that model.  A totally real
        # plane sees only the c/4 sectional term; a J-invariant plane the
        # full holomorphic value c.
        real_plane = _spec(("u", "v"), ("u", "0", "v", "0"), 4, c=2.0)
        res = gauss_equation_residual(BatchGeometry(real_plane, np.array([[0.2, 0.4]])))
        assert res[0] == pytest.approx(0.5, abs=1e-12)
        holo_plane = _spec(("u", "v"), ("u", "v", "0", "0"), 4, c=2.0)
        res = gauss_equation_residual(BatchGeometry(holo_plane, np.array([[0.2, 0.4]])))
        assert res[0] == pytest.approx(2.0, abs=1e-12)

    def test_ambient_matrix_matches_vector_formula(self):
        spec = _spec(("u", "v"), ("u*cos(v)", "u*sin(v)", "u", "v"), 4, c=1.7)
        geom = BatchGeometry(spec, np.array([[1.1, 0.6], [0.7, 1.9]]))
        Rbar = ambient_curvature_matrix(geom)
        amb = spec.ambient
        for t in range(2):
            for a in range(2):
                for b in range(2):
                    for c in range(2):
                        for d in range(2):
                            want = curvature_inner(
                                amb,
                                geom.jac[t, a],
                                geom.jac[t, b],
                                geom.jac[t, c],
                                geom.jac[t, d],
                            )
                            assert Rbar[t, a, b, c, d] == pytest.approx(want, abs=1e-12)


class TestFrames:
    def test_plane_frame_is_canonical(self):
        spec = _spec(("u1", "u2"), ("u1", "u2", "0", "0"), 4)
        geom = BatchGeometry(spec, np.array([[0.3, 0.9]]))
        fr = geom.frame
        assert np.allclose(fr.tangent[0], np.eye(2), atol=1e-14)
        assert np.allclose(fr.normal[0], np.eye(4)[2:], atol=1e-14)

    def test_warped_chart_frame_blocks(self):
        spec = _spec(
            ("u", "t"),
            ("u*cos(t)", "u*sin(t)", "0", "0"),
            4,
            factors=(("u",), ("t",)),
        )
        geom = BatchGeometry(spec, np.array([[2.0, 0.3]]))
        fr = geom.frame
        assert np.allclose(fr.block(0)[0], [[1.0, 0.0]], atol=1e-13)
        assert np.allclose(fr.block(1)[0], [[0.0, 0.5]], atol=1e-13)

    def test_full_frame_orthonormal(self):
        geom = BatchGeometry(_sphere_spec(), _sphere_points(10, seed=9))
        assert geom.frame.orthonormality_defect() < 1e-10

    def test_normal_frame_deterministic(self):
        pts = _sphere_points(4, seed=11)
        n1 = BatchGeometry(_sphere_spec(), pts).frame.normal
        n2 = BatchGeometry(_sphere_spec(), pts).frame.normal
        assert np.array_equal(n1, n2)

    def test_gram_schmidt_rejects_degenerate(self):
        g = np.eye(2)[None]
        seeds = np.array([[1.0, 0.0], [1.0, 1e-14]])
        with pytest.raises(ValueError, match="degenerates"):
            gram_schmidt(g, seeds)

    def test_partition_validation(self):
        with pytest.raises(ValueError, match="concatenate"):
            FactorPartition(("a", "b"), (("b",), ("a",)))
        part = FactorPartition(("a", "b", "c"), (("a",), ("b", "c")))
        assert part.dims == (1, 2)
        assert part.block_of(2) == 1


class TestSpecValidation:
    def test_component_count_checked(self):
        with pytest.raises(ValueError, match="components"):
            _spec(("u",), ("u", "u"), 4)

    def test_unknown_coordinate_rejected(self):
        with pytest.raises(Exception):
            _spec(("u",), ("u", "w", "0", "0"), 4)

    def test_point_view_matches_batch(self):
        spec = _sphere_spec()
        pts = _sphere_points(3, seed=13)
        batch = BatchGeometry(spec, pts)
        single = geometry_at(spec, pts[1])
        assert np.allclose(single.B[0], batch.B[1], atol=1e-14)
        assert np.allclose(single.curvature[0], batch.curvature[1], atol=1e-14)
