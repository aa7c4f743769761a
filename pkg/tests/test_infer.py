import numpy as np
import pytest
import torch

from fisheyelab.control import interpolate, make_control_source
from fisheyelab.errors import ConfigError, ValidationError
from fisheyelab.images import make_sample_image
from fisheyelab.infer import control_for_degree, control_from_blend, rectify_image
from fisheyelab.model import ModelConfig, RectifierNet


def micro_model(**kw):
    kw.setdefault("enc_channels", (4, 8, 8, 8, 8))
    kw.setdefault("flow_channels", (4, 8, 8, 8))
    torch.manual_seed(0)
    return RectifierNet(ModelConfig(input_size=32, **kw))


class TestControlFromBlend:
    def test_learnable_matches_interpolate(self):
        model = micro_model()
        blend = [0.25, 0.75, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        got = control_from_blend(model, blend)
        assert torch.allclose(got, interpolate(model.queries, blend))

    def test_one_hot_is_exactly_the_slot(self):
        model = micro_model()
        hot = [0.0] * 9
        hot[6] = 1.0
        assert torch.equal(control_from_blend(model, hot), model.queries.slot(7))

    def test_frozen_modes_take_one_hot_only(self):
        model = micro_model(control_mode="fixed_query")
        hot = [0.0] * 9
        hot[2] = 1.0
        got = control_from_blend(model, hot)
        assert torch.equal(got, make_control_source("fixed_query", 3, size=32))
        with pytest.raises(ConfigError, match="one-hot"):
            control_from_blend(model, [0.5, 0.5] + [0.0] * 7)

    def test_none_mode_rejects_blends(self):
        model = micro_model(control_mode="none")
        with pytest.raises(ConfigError):
            control_from_blend(model, [1.0] + [0.0] * 8)
        with pytest.raises(ConfigError):
            control_for_degree(model, 1)

    def test_non_convex_rejected(self):
        with pytest.raises(ValidationError):
            control_from_blend(micro_model(), [0.2] * 9)


class TestControlForDegree:
    def test_equals_one_hot_path(self):
        model = micro_model()
        assert torch.equal(control_for_degree(model, 4), model.queries.slot(4))

    def test_degree_bounds(self):
        with pytest.raises(ValidationError):
            control_for_degree(micro_model(), 0)


class TestRectifyImage:
    def test_native_size_passthrough_shape(self):
        model = micro_model()
        img = make_sample_image(32, seed=5)
        out = rectify_image(model, img, control_for_degree(model, 5))
        assert out.shape == (32, 32, 3)
        assert out.dtype == np.float32
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_foreign_size_resized_through_net(self):
        model = micro_model()
        img = make_sample_image(48, seed=6)[:, :40]
        out = rectify_image(model, img, control_for_degree(model, 5))
        assert out.shape == (48, 40, 3)

    def test_rejects_bad_buffer(self):
        model = micro_model()
        with pytest.raises(ValidationError):
            rectify_image(model, np.zeros((32, 32, 4), dtype=np.float32), None)
