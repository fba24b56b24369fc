"""Complex structure construction and the constant-curvature model tensor."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqwarp.ambient import (
    KaehlerAmbient,
    ambient_curvature,
    curvature_inner,
    standard_complex_structure,
)


class TestComplexStructure:
    def test_one_pair(self):
        assert np.array_equal(standard_complex_structure(1), [[0.0, -1.0], [1.0, 0.0]])

    def test_pairing_action(self):
        J = standard_complex_structure(3)
        e = np.eye(6)
        for k in range(3):
            assert np.array_equal(J @ e[2 * k], e[2 * k + 1])
            assert np.array_equal(J @ e[2 * k + 1], -e[2 * k])

    def test_squares_to_minus_identity(self):
        for n in (1, 2, 5):
            J = standard_complex_structure(n)
            assert np.array_equal(J @ J, -np.eye(2 * n))

    def test_explicit_matrix_validation(self):
        good = standard_complex_structure(2)
        got = standard_complex_structure(2, "explicit_matrix", good)
        assert np.array_equal(got, good)
        with pytest.raises(ValueError, match="J\\^2"):
            standard_complex_structure(2, "explicit_matrix", np.eye(4))
        # shear-conjugated J squares to -I but loses orthogonality
        shear = np.array([[1.0, 1.0], [0.0, 1.0]])
        skew = shear @ standard_complex_structure(1) @ np.linalg.inv(shear)
        with pytest.raises(ValueError, match="orthogonal"):
            standard_complex_structure(1, "explicit_matrix", skew)

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValueError):
            KaehlerAmbient(5)


def _unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


class TestCurvatureTensor:
    def test_flat_case_vanishes(self):
        amb = KaehlerAmbient(6)
        rng = np.random.default_rng(0)
        X, Y, Z = (rng.normal(size=6) for _ in range(3))
        assert np.abs(ambient_curvature(amb, X, Y, Z)).max() == 0.0

    def test_holomorphic_sections_have_curvature_c(self):
        # the section spanned by X, JX realizes the extreme value
        amb = KaehlerAmbient(8, c=4.0)
        rng = np.random.default_rng(1)
        for _ in range(5):
            X = _unit(rng, 8)
            JX = amb.apply_J(X)
            sec = curvature_inner(amb, X, JX, JX, X)
            assert sec == pytest.approx(4.0, abs=1e-12)

    def test_totally_real_sections_have_quarter_c(self):
        amb = KaehlerAmbient(4, c=4.0)
        X = np.array([1.0, 0.0, 0.0, 0.0])
        Y = np.array([0.0, 0.0, 1.0, 0.0])
        assert amb.apply_J(X) @ Y == 0.0
        assert curvature_inner(amb, X, Y, Y, X) == pytest.approx(1.0, abs=1e-14)

    def test_orthonormal_section_formula(self):
        amb = KaehlerAmbient(6, c=-2.0)
        rng = np.random.default_rng(5)
        for _ in range(10):
            X = _unit(rng, 6)
            Y = rng.normal(size=6)
            Y -= (Y @ X) * X
            Y /= np.linalg.norm(Y)
            a = amb.apply_J(X) @ Y
            want = 0.25 * amb.c * (1.0 + 3.0 * a * a)
            assert curvature_inner(amb, X, Y, Y, X) == pytest.approx(want, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-4, 4, allow_nan=False))
    def test_symmetries(self, seed, c):
        amb = KaehlerAmbient(6, c=c)
        rng = np.random.default_rng(seed)
        X, Y, Z, W = (rng.normal(size=6) for _ in range(4))
        r = lambda a, b, u, v: curvature_inner(amb, a, b, u, v)
        assert r(X, Y, Z, W) == pytest.approx(-r(Y, X, Z, W), abs=1e-9)
        assert r(X, Y, Z, W) == pytest.approx(-r(X, Y, W, Z), abs=1e-9)
        assert r(X, Y, Z, W) == pytest.approx(r(Z, W, X, Y), abs=1e-9)
        # first Bianchi identity
        total = (
            ambient_curvature(amb, X, Y, Z)
            + ambient_curvature(amb, Y, Z, X)
            + ambient_curvature(amb, Z, X, Y)
        )
        assert np.abs(total).max() < 1e-9

    def test_batch_broadcasting(self):
        amb = KaehlerAmbient(4, c=1.0)
        rng = np.random.default_rng(9)
        X = rng.normal(size=(7, 4))
        Y = rng.normal(size=(7, 4))
        Z = rng.normal(size=(7, 4))
        batch = ambient_curvature(amb, X, Y, Z)
        for t in range(7):
            single = ambient_curvature(amb, X[t], Y[t], Z[t])
            assert np.allclose(batch[t], single, atol=1e-13)
