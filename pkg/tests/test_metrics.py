import math

import numpy as np
import pytest

import reference as ref
from fisheyelab.errors import ValidationError
from fisheyelab.images import make_sample_image
from fisheyelab.metrics import psnr, ssim


def pair(rng, size=16):
    a = rng.random((size, size, 3), dtype=np.float64).astype(np.float32)
    b = rng.random((size, size, 3), dtype=np.float64).astype(np.float32)
    return a, b


class TestPsnr:
    def test_identical_images_give_infinity(self, rng):
        a, _ = pair(rng)
        assert psnr(a, a.copy()) == math.inf

    def test_constant_tenth_offset_is_twenty_db(self):
        # double precision keeps MSE at 0.01 to machine accuracy
        gt = np.full((8, 8, 3), 0.5)
        out = np.full((8, 8, 3), 0.6)
        assert abs(psnr(out, gt) - 20.0) < 1e-9

    def test_symmetric(self, rng):
        a, b = pair(rng)
        assert psnr(a, b) == psnr(b, a)

    def test_noise_lowers_value(self, rng):
        img = make_sample_image(16, seed=3)
        little = np.clip(img + 0.01 * rng.standard_normal(img.shape), 0, 1).astype(np.float32)
        lots = np.clip(img + 0.2 * rng.standard_normal(img.shape), 0, 1).astype(np.float32)
        assert psnr(little, img) > psnr(lots, img)

    def test_matches_scalar_oracle(self, rng):
        for _ in range(20):
            a, b = pair(rng)
            assert ref.rel_err(np.asarray(psnr(a, b)), np.asarray(ref.psnr(a, b))) < 1e-12

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValidationError):
            psnr(rng.random((8, 8, 3), dtype=np.float32), rng.random((8, 9, 3), dtype=np.float32))


class TestSsim:
    def test_self_similarity_is_one(self):
        img = make_sample_image(32, seed=1)
        assert abs(ssim(img, img.copy()) - 1.0) < 1e-9

    def test_negated_contrast_scores_low(self):
        img = make_sample_image(32, seed=2)
        assert ssim((1.0 - img).astype(np.float32), img) < 0.5

    def test_noise_lowers_value(self, rng):
        img = make_sample_image(32, seed=4)
        noisy = np.clip(img + 0.1 * rng.standard_normal(img.shape), 0, 1).astype(np.float32)
        assert ssim(noisy, img) < 1.0

    def test_matches_scalar_oracle(self, rng):
        for _ in range(20):
            a, b = pair(rng, size=16)
            assert ref.rel_err(np.asarray(ssim(a, b)), np.asarray(ref.ssim(a, b))) < 1e-9

    def test_window_must_fit(self, rng):
        small = rng.random((8, 8, 3), dtype=np.float32)
        with pytest.raises(ValidationError):
            ssim(small, small.copy())
