"""Homography estimation and projective warps against loop-based oracles."""

import numpy as np
import pytest

from moirebench.errors import DegenerateCornersError, ImageValueError
from moirebench.geometry import (
    apply_homography,
    homography_from_corners,
    warp_projective,
)
from moirebench.pipeline import sample_projective_transform
from moirebench.seeding import rng_from

from reference_impl import warp_reference

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


class TestHomographyFromCorners:
    def test_identity(self):
        h = homography_from_corners(UNIT_SQUARE, UNIT_SQUARE)
        assert np.allclose(h, np.eye(3), atol=1e-12)

    def test_pure_translation(self):
        dst = UNIT_SQUARE + [3.0, -2.0]
        h = homography_from_corners(UNIT_SQUARE, dst)
        expect = np.array([[1, 0, 3], [0, 1, -2], [0, 0, 1]], dtype=float)
        assert np.allclose(h, expect, atol=1e-9)

    @pytest.mark.parametrize("seed", range(8))
    def test_interpolates_corners_exactly(self, seed):
        rng = rng_from(seed, "corners")
        src = np.array([[0, 0], [63, 0], [63, 63], [0, 63]], dtype=float)
        dst = src + rng.uniform(-5, 5, size=(4, 2))
        h = homography_from_corners(src, dst)
        assert np.allclose(apply_homography(h, src), dst, atol=1e-8)
        assert abs(h[2, 2] - 1.0) < 1e-12

    def test_collinear_corners_raise(self):
        src = np.array([[0, 0], [1, 0], [2, 0], [0, 1]], dtype=float)
        with pytest.raises(DegenerateCornersError):
            homography_from_corners(src, src)


class TestWarpProjective:
    def test_identity_is_bit_exact(self):
        img = rng_from(1, "warp").uniform(size=(17, 13))
        out = warp_projective(img, np.eye(3), (13, 17))
        assert np.array_equal(out, img)

    def test_integer_translation_shifts(self):
        img = rng_from(2, "warp").uniform(size=(12, 12))
        h = np.array([[1, 0, 3], [0, 1, 2], [0, 0, 1]], dtype=float)
        out = warp_projective(img, h, (12, 12))
        # out(x, y) = img(x - 3, y - 2); zero fill elsewhere
        assert np.allclose(out[2:, 3:], img[:-2, :-3], atol=1e-12)
        assert np.all(out[:2, :] == 0.0)
        assert np.all(out[:, :3] == 0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_reference_warp(self, seed):
        rng = rng_from(seed, "warpref")
        img = rng.uniform(size=(14, 11))
        src = np.array([[0, 0], [10, 0], [10, 13], [0, 13]], dtype=float)
        dst = src + rng.uniform(-1.5, 1.5, size=(4, 2))
        h = homography_from_corners(src, dst)
        got = warp_projective(img, h, (11, 14))
        want = warp_reference(img, h, 11, 14)
        assert np.allclose(got, want, atol=1e-10)

    def test_rgb_planes_warp_independently(self):
        rng = rng_from(3, "warp")
        img = rng.uniform(size=(10, 10, 3))
        h = np.array([[1, 0, 0.5], [0, 1, 0.25], [0, 0, 1]], dtype=float)
        out = warp_projective(img, h, (10, 10))
        for c in range(3):
            assert np.allclose(
                out[..., c], warp_projective(img[..., c], h, (10, 10)), atol=1e-12
            )

    def test_nearest_mode(self):
        img = np.zeros((6, 6))
        img[2, 2] = 1.0
        h = np.array([[1, 0, 0.4], [0, 1, 0.4], [0, 0, 1]], dtype=float)
        out = warp_projective(img, h, (6, 6), interp="nearest")
        # 0.4 rounds back to the same source pixel
        assert out[2, 2] == 1.0

    def test_bad_interp_rejected(self):
        with pytest.raises(ImageValueError):
            warp_projective(np.zeros((4, 4)), np.eye(3), (4, 4), interp="cubic")


class TestSampledTransforms:
    @pytest.mark.parametrize("seed", range(12))
    def test_corner_offsets_within_disc(self, seed):
        rng = rng_from(seed, "disc")
        h = sample_projective_transform(rng, (200, 120), radius_ratio=0.2)
        corners = np.array([[0, 0], [199, 0], [199, 119], [0, 119]], dtype=float)
        moved = apply_homography(h, corners)
        dist = np.hypot(*(moved - corners).T)
        assert np.all(dist <= 0.2 * 120 + 1e-9)

    def test_deterministic_under_seed(self):
        a = sample_projective_transform(rng_from(7, "t"), 64)
        b = sample_projective_transform(rng_from(7, "t"), 64)
        assert np.array_equal(a, b)

    def test_ratio_validation(self):
        with pytest.raises(ImageValueError):
            sample_projective_transform(rng_from(0, "t"), 64, radius_ratio=0.6)
