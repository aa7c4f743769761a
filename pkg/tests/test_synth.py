import numpy as np
import pytest
import torch

from fisheyelab.blocks import warp as torch_warp
from fisheyelab.images import ImageBufferError, make_sample_image
from fisheyelab.radial import DEFAULT_BASE_PARAMS, DistortionParams, build_degree_ladder
from fisheyelab.synth import corner_radius, rectification_flow, synthesize_fisheye


def identity_params(size):
    return DistortionParams(k=(1.0, 0.0, 0.0, 0.0), norm_radius=corner_radius(size))


def barrel_params(size, degree=9):
    return build_degree_ladder()[degree].with_norm_radius(corner_radius(size))


class TestSynthesize:
    def test_identity_params_is_identity(self):
        img = make_sample_image(64, seed=3)
        out = synthesize_fisheye(img, identity_params(64))
        assert np.abs(out - img).max() < 1e-6

    def test_requires_square(self):
        with pytest.raises(ImageBufferError):
            synthesize_fisheye(np.zeros((8, 16, 3), dtype=np.float32), identity_params(8))

    def test_rotation_equivariance(self):
        img = make_sample_image(64, seed=5)
        p = barrel_params(64)
        direct = synthesize_fisheye(img, p)
        rotated = np.rot90(
            synthesize_fisheye(np.ascontiguousarray(np.rot90(img)), p), -1
        )
        assert np.abs(direct - rotated).max() < 1e-6

    def test_shrinking_map_blacks_out_corners(self):
        # map(1) < 1 leaves corner radii with no preimage
        img = np.ones((32, 32, 3), dtype=np.float32)
        p = DistortionParams(k=(0.9, 0.0, 0.0, 0.0), norm_radius=corner_radius(32))
        out = synthesize_fisheye(img, p)
        assert np.all(out[0, 0] == 0.0)
        c = 32 // 2
        assert np.all(out[c, c] > 0.0)

    def test_center_pixels_move_less_than_edges(self):
        img = make_sample_image(64, seed=1)
        out = synthesize_fisheye(img, barrel_params(64))
        mid = slice(24, 40)
        center_err = np.abs(out[mid, mid] - img[mid, mid]).mean()
        ring_err = np.abs(out[4:12, :] - img[4:12, :]).mean()
        assert center_err < ring_err

    def test_degrees_order_by_distortion(self):
        img = make_sample_image(64, seed=2)
        ladder = build_degree_ladder()
        errs = []
        for i in (1, 5, 9):
            p = ladder[i].with_norm_radius(corner_radius(64))
            errs.append(np.abs(synthesize_fisheye(img, p) - img).mean())
        assert errs[0] < errs[1] < errs[2]


class TestRectificationFlow:
    def test_identity_flow_is_zero(self):
        flow = rectification_flow(32, identity_params(32))
        assert np.abs(flow).max() == 0.0

    def test_shape(self):
        assert rectification_flow(16, barrel_params(16)).shape == (2, 16, 16)

    def test_flow_undoes_synthesis(self):
        # warping the fisheye image along the ideal flow should recover the
        # original far better than leaving it distorted
        img = make_sample_image(64, seed=4)
        p = barrel_params(64, degree=9)
        fisheye = synthesize_fisheye(img, p)
        flow = rectification_flow(64, p)
        warped = torch_warp(
            torch.from_numpy(fisheye.transpose(2, 0, 1)).unsqueeze(0).double(),
            torch.from_numpy(flow).unsqueeze(0).double(),
        )
        restored = warped.squeeze(0).numpy().transpose(1, 2, 0)
        mid = slice(8, 56)
        before = np.abs(fisheye[mid, mid] - img[mid, mid]).mean()
        after = np.abs(restored[mid, mid] - img[mid, mid]).mean()
        assert after < 0.25 * before

    def test_flow_points_outward_for_barrel(self):
        flow = rectification_flow(64, barrel_params(64))
        # right of center, the source pixel lies further right (dx > 0)
        assert flow[0, 32, 48] > 0.0
        assert flow[0, 32, 16] < 0.0
