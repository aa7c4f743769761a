"""Single-image inference helpers shared by the CLI and the HTTP service."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import torch
import torch.nn.functional as F

from .control import interpolate, make_control_source, one_hot_blend, validate_blend
from .errors import ConfigError
from .images import validate_image_buffer
from .model import RectifierNet


def control_from_blend(
    model: RectifierNet, blend: Sequence[float], tol: float = 1e-6
) -> torch.Tensor | None:
    """Resolve a blend vector to a control tensor under the model's mode.

    Learnable-query models accept any convex blend. The other modes only
    support one-hot blends (a plain degree), since there is nothing to
    interpolate between.
    """
    mode = model.config.control_mode
    if mode == "none":
        raise ConfigError("this model runs without control; no blend applies")
    if mode == "learnable_query":
        w = validate_blend(blend, n=model.queries.n, tol=tol)
        return interpolate(model.queries, w.tolist())
    w = validate_blend(blend, n=9, tol=tol)
    hot = [i for i, v in enumerate(w.tolist()) if v > 0]
    if len(hot) != 1 or abs(float(w[hot[0]]) - 1.0) > tol:
        raise ConfigError(f"control_mode {mode} supports only one-hot blends")
    return make_control_source(mode, hot[0] + 1, size=model.config.input_size)


def control_for_degree(model: RectifierNet, degree_label: int) -> torch.Tensor | None:
    if model.config.control_mode == "none":
        raise ConfigError("this model runs without control; no degree applies")
    return control_from_blend(model, one_hot_blend(degree_label, n=model.queries.n))


def rectify_image(
    model: RectifierNet, image: np.ndarray, control: torch.Tensor | None
) -> np.ndarray:
    """Rectify one HxWx3 buffer; non-native sizes are resized through the net."""
    image = validate_image_buffer(image)
    h, w = image.shape[:2]
    s = model.config.input_size
    x = torch.from_numpy(image.transpose(2, 0, 1)).unsqueeze(0)
    if (h, w) != (s, s):
        x = F.interpolate(x, size=(s, s), mode="bilinear", align_corners=False)
    model.eval()
    with torch.no_grad():
        out = model(x, control).image_out
    if (h, w) != (s, s):
        out = F.interpolate(out, size=(h, w), mode="bilinear", align_corners=False)
    arr = out.squeeze(0).numpy().transpose(1, 2, 0)
    return arr.clip(0.0, 1.0).astype(np.float32)
