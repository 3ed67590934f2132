import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import reference
from tractopaint.exceptions import InvalidInput, InvalidParameter, OutOfBounds
from tractopaint.tensorfield import (
    TensorField,
    coherence,
    eigen2,
    gradient_orientation_field,
    structure_tensor,
)

finite = st.floats(-10, 10, allow_nan=False)


def same_axis(v, expected, tol=1e-9):
    return abs(abs(v[0] * expected[0] + v[1] * expected[1]) - 1.0) < tol


class TestEigen2:
    def test_diagonal(self):
        es = eigen2(1, 0, 0)
        assert (es.lambda1, es.lambda2) == (0.0, 1.0)
        assert same_axis(es.v1, (0, 1))
        assert not es.degenerate

    def test_off_diagonal(self):
        es = eigen2(2, 1, 2)
        assert es.lambda1 == pytest.approx(1.0, abs=1e-12)
        assert es.lambda2 == pytest.approx(3.0, abs=1e-12)
        assert same_axis(es.v1, (1 / math.sqrt(2), -1 / math.sqrt(2)))

    def test_isotropic(self):
        es = eigen2(1, 0, 1)
        assert es.lambda1 == es.lambda2 == 1.0
        assert es.degenerate
        assert es.v1 == (1.0, 0.0)

    def test_zero_tensor(self):
        es = eigen2(0, 0, 0)
        assert es.degenerate and es.lambda1 == es.lambda2 == 0.0

    @pytest.mark.parametrize("bad", [(float("nan"), 0, 0), (0, float("inf"), 0), (0, 0, -float("inf"))])
    def test_non_finite(self, bad):
        with pytest.raises(InvalidInput):
            eigen2(*bad)

    @given(finite, finite, finite)
    def test_reconstruction_and_order(self, a, b, c):
        es = eigen2(a, b, c)
        assert es.lambda1 <= es.lambda2
        v1, v2 = np.array(es.v1), np.array(es.v2)
        assert abs(np.linalg.norm(v1) - 1) < 1e-9 and abs(np.linalg.norm(v2) - 1) < 1e-9
        assert abs(v1 @ v2) < 1e-9
        s = np.array([[a, b], [b, c]])
        rec = es.lambda1 * np.outer(v1, v1) + es.lambda2 * np.outer(v2, v2)
        # degenerate tensors snap to the isotropic case within 1e-12 * max(1, |mean|)
        floor = 4e-12 * max(1.0, abs(a + c))
        assert np.linalg.norm(rec - s) <= 1e-7 * np.linalg.norm(s) + floor

    @given(finite, finite, finite)
    def test_agrees_with_lapack(self, a, b, c):
        es = eigen2(a, b, c)
        w = np.linalg.eigvalsh(np.array([[a, b], [b, c]]))
        assert np.allclose([es.lambda1, es.lambda2], w, atol=1e-9)


class TestCoherence:
    def test_rank_one(self):
        assert coherence(0, 1) == 1.0

    def test_isotropic(self):
        assert coherence(1, 1) == 0.0

    def test_formula(self):
        assert coherence(1, 3) == 0.25

    def test_flat(self):
        assert coherence(0, 0) == 0.0

    def test_negative_round_off_clamped(self):
        assert coherence(-1e-10, 2.0) == 1.0

    @given(st.floats(0, 1e6), st.floats(0, 1e6))
    def test_range(self, a, b):
        lo, hi = sorted((a, b))
        assert 0.0 <= coherence(lo, hi) <= 1.0

    @given(st.floats(1e-3, 1e6))
    def test_one_only_for_rank_one(self, lam):
        assert coherence(0.0, lam) == 1.0
        assert coherence(lam * 1e-3, lam) < 1.0


def uniform_field(tensor, shape=(4, 4)):
    return TensorField(*(np.full(shape, v, dtype=float) for v in tensor))


class TestOrientationAt:
    def test_lattice(self):
        s = uniform_field((1, 0, 0)).orientation_at(2, 1)
        assert same_axis(s.direction, (0, 1)) and s.coherence == 1.0

    def test_between_equal_pixels(self):
        s = uniform_field((1, 0, 0)).orientation_at(1.5, 2)
        assert same_axis(s.direction, (0, 1)) and s.coherence == 1.0

    def test_blend_is_degenerate(self):
        sxx = np.array([[1.0, 0.0]])
        syy = np.array([[0.0, 1.0]])
        field = TensorField(sxx, np.zeros((1, 2)), syy)
        assert field.tensor_at(0.5, 0) == (0.5, 0.0, 0.5)
        s = field.orientation_at(0.5, 0)
        assert s.degenerate and s.coherence == 0.0

    def test_out_of_bounds(self):
        with pytest.raises(OutOfBounds):
            uniform_field((1, 0, 0)).orientation_at(3.5, 0)

    def test_coherence_map_matches_pointwise(self):
        rng = np.random.default_rng(5)
        img = rng.uniform(0, 255, (12, 14))
        field = structure_tensor(img)
        cmap = field.coherence_map()
        for y in range(0, 12, 3):
            for x in range(0, 14, 3):
                assert cmap[y, x] == pytest.approx(field.orientation_at(x, y).coherence, abs=1e-12)

    def test_field_is_read_only(self):
        field = uniform_field((1, 0, 0))
        with pytest.raises(ValueError):
            field.sxx[0, 0] = 2.0


class TestStructureTensor:
    def test_constant_image(self):
        field = structure_tensor(np.full((16, 16), 99.0))
        for comp in (field.sxx, field.sxy, field.syy):
            assert np.all(np.abs(comp) < 1e-20)

    def test_ramp(self, ramp_x):
        field = structure_tensor(ramp_x)
        inner = (slice(7, -7), slice(7, -7))
        assert np.allclose(field.sxx[inner], 1.0, atol=1e-3)
        assert np.allclose(field.sxy[inner], 0.0, atol=1e-3)
        assert np.allclose(field.syy[inner], 0.0, atol=1e-3)

    def test_ramp_against_reference(self, ramp_x):
        field = structure_tensor(ramp_x)
        ref = reference.structure_tensor(ramp_x)
        for got, want in zip((field.sxx, field.sxy, field.syy), ref):
            assert np.allclose(got, want, rtol=0, atol=1e-9)

    def test_vertical_stripes(self, stripes):
        field = structure_tensor(stripes)
        ref = reference.structure_tensor(stripes)
        inner = (slice(8, -8), slice(8, -8))
        assert np.allclose(field.sxy[inner], 0.0, atol=1e-9)
        assert np.all(field.sxx[inner] > 100 * np.maximum(field.syy[inner], 1e-12))
        for got, want in zip((field.sxx, field.sxy, field.syy), ref):
            assert np.allclose(got, want, rtol=0, atol=1e-9)

    def test_psd(self):
        rng = np.random.default_rng(6)
        field = structure_tensor(rng.uniform(0, 255, (30, 30)))
        assert np.all(field.sxx >= 0) and np.all(field.syy >= 0)
        det = field.sxx * field.syy - field.sxy**2
        assert np.all(det >= -1e-6 * (field.sxx + field.syy) ** 2)

    @pytest.mark.parametrize("kw", [{"sigma_d": 0}, {"rho": -1}, {"rho": float("nan")}])
    def test_bad_sigma(self, kw):
        with pytest.raises(InvalidParameter):
            structure_tensor(np.zeros((5, 5)), **kw)

    def test_rotation_90(self):
        yy, xx = np.mgrid[0:64, 0:64].astype(float)
        theta = math.radians(30)
        img = np.sin(2 * np.pi * (xx * math.cos(theta) + yy * math.sin(theta)) / 9)
        a = structure_tensor(img)
        b = structure_tensor(np.rot90(img).copy())
        # rot90 maps (x, y) -> (y, W-1-x): R = [[0, 1], [-1, 0]]
        inner = (slice(8, -8), slice(8, -8))
        assert np.allclose(b.sxx[inner], np.rot90(a.syy)[inner], atol=1e-3)
        assert np.allclose(b.syy[inner], np.rot90(a.sxx)[inner], atol=1e-3)
        assert np.allclose(b.sxy[inner], -np.rot90(a.sxy)[inner], atol=1e-3)


class TestGradientField:
    def test_ramp_direction(self, ramp_x):
        field = gradient_orientation_field(ramp_x)
        s = field.orientation_at(15.5, 16)
        assert same_axis(s.direction, (0, 1), tol=1e-9)
        assert s.coherence == pytest.approx(1.0)

    def test_constant(self):
        field = gradient_orientation_field(np.full((8, 8), 3.0))
        assert np.all(field.coherence_map() == 0.0)

    def test_rho_limit(self):
        rng = np.random.default_rng(7)
        img = rng.uniform(0, 255, (24, 24))
        g = gradient_orientation_field(img)
        s = structure_tensor(img, rho=0.05)
        for a, b in ((g.sxx, s.sxx), (g.sxy, s.sxy), (g.syy, s.syy)):
            assert np.allclose(a, b, rtol=0, atol=1e-2)

    def test_rank_one(self):
        rng = np.random.default_rng(8)
        g = gradient_orientation_field(rng.uniform(0, 255, (10, 10)))
        assert np.allclose(g.sxx * g.syy - g.sxy**2, 0.0, atol=1e-6 * np.max(g.sxx + g.syy) ** 2)

    def test_bad_sigma(self):
        with pytest.raises(InvalidParameter):
            gradient_orientation_field(np.zeros((3, 3)), 0)
