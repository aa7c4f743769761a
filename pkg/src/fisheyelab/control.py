"""Learnable query set and the control machinery that feeds the rectifier.

A query is a tensor shaped like the network input. One query per distortion
degree; convex blends of queries give intermediate rectification strengths.
The extractor turns a query into control features; the chain maps those
features layer by layer to each rectifier layer's channel count and
resolution.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import ConfigError, DimensionError, ValidationError

CONTROL_MODES = ("learnable_query", "fixed_query", "scalar", "none")


def validate_blend(weights: Sequence[float], n: int = 9, tol: float = 1e-9) -> torch.Tensor:
    w = torch.as_tensor(list(weights), dtype=torch.float64)
    if w.numel() != n:
        raise DimensionError(f"expected {n} blend weights, got {w.numel()}")
    if not torch.isfinite(w).all():
        raise ValidationError("blend weights must be finite")
    if (w < -tol).any() or (w > 1 + tol).any() or abs(float(w.sum()) - 1.0) > tol:
        raise ValidationError(
            f"blend must be convex: weights in [0,1] summing to 1 (tol {tol:g}), got {weights}"
        )
    return w


def one_hot_blend(degree_label: int, n: int = 9) -> list[float]:
    if not 1 <= degree_label <= n:
        raise ValidationError(f"degree_label must be in 1..{n}, got {degree_label}")
    return [1.0 if i == degree_label - 1 else 0.0 for i in range(n)]


class QuerySet(nn.Module):
    """N learnable query tensors stored as one (N, C, H, W) parameter."""

    def __init__(self, n: int = 9, channels: int = 3, size: int = 256):
        super().__init__()
        if n < 1:
            raise ConfigError(f"need at least one query, got n={n}")
        self.queries = nn.Parameter(torch.empty(n, channels, size, size).uniform_(-0.1, 0.1))

    @property
    def n(self) -> int:
        return self.queries.shape[0]

    def slot(self, degree_label: int) -> torch.Tensor:
        if not 1 <= degree_label <= self.n:
            raise ValidationError(f"degree_label must be in 1..{self.n}, got {degree_label}")
        return self.queries[degree_label - 1]

    @torch.no_grad()
    def replicate_slot(self, degree_label: int) -> None:
        """Copy one query into every slot (fine-tune initialization)."""
        self.queries.copy_(self.slot(degree_label).unsqueeze(0).expand_as(self.queries))

    def extra_repr(self) -> str:
        return f"n={self.n}, shape={tuple(self.queries.shape[1:])}"


def interpolate(qs: QuerySet, blend: Sequence[float], unsafe: bool = False) -> torch.Tensor:
    """Weighted sum of queries. Convexity is enforced unless unsafe=True."""
    if unsafe:
        w = torch.as_tensor(list(blend), dtype=torch.float64)
        if w.numel() != qs.n:
            raise DimensionError(f"expected {qs.n} blend weights, got {w.numel()}")
    else:
        w = validate_blend(blend, n=qs.n)
    w = w.to(qs.queries.dtype)
    return (qs.queries * w.view(-1, 1, 1, 1)).sum(dim=0)


class ControlExtractor(nn.Module):
    """Three channel-preserving 3x3 convolutions with GELU between them."""

    def __init__(self, channels: int = 3):
        super().__init__()
        self.channels = channels
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.conv3 = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, q: torch.Tensor) -> torch.Tensor:
        single = q.dim() == 3
        if single:
            q = q.unsqueeze(0)
        if q.dim() != 4 or q.shape[1] != self.channels:
            raise DimensionError(f"expected ({self.channels},H,W) query, got {tuple(q.shape)}")
        out = self.conv3(F.gelu(self.conv2(F.gelu(self.conv1(q)))))
        return out.squeeze(0) if single else out


class ControlChain(nn.Module):
    """Per-layer conditions chained from the extracted control features.

    Each stage applies two position-shared fully connected maps (1x1 convs,
    no activation so identity-initialized maps pass features through
    unchanged) then resizes to the consuming layer's resolution. The resized
    condition both feeds its layer and seeds the next stage.
    """

    def __init__(self, layer_specs: Sequence[tuple[int, int, int]], in_channels: int = 3):
        super().__init__()
        if not layer_specs:
            raise ConfigError("layer_specs must not be empty")
        self.specs = [tuple(s) for s in layer_specs]
        stages = []
        c_prev = in_channels
        for c_l, _, _ in self.specs:
            hidden = 2 * max(c_prev, c_l)
            stages.append(
                nn.Sequential(nn.Conv2d(c_prev, hidden, 1), nn.Conv2d(hidden, c_l, 1))
            )
            c_prev = c_l
        self.stages = nn.ModuleList(stages)

    def forward(self, q_ex: torch.Tensor) -> list[torch.Tensor]:
        cond = q_ex
        out = []
        for stage, (_, h, w) in zip(self.stages, self.specs):
            cond = stage(cond)
            if cond.shape[-2:] != (h, w):
                cond = F.interpolate(cond, size=(h, w), mode="bilinear", align_corners=False)
            out.append(cond)
        return out


def make_control_source(
    mode: str,
    degree_label: int,
    query_set: QuerySet | None = None,
    size: int = 256,
    channels: int = 3,
) -> torch.Tensor:
    """The control tensor for one distortion degree under a given mode.

    learnable_query picks the degree's slot from the query set. fixed_query
    is a frozen radial ramp, 0 at the image center rising linearly to 1 at
    the corner radius. scalar is a constant plane at degree_label/9.
    """
    if mode == "learnable_query":
        if query_set is None:
            raise ConfigError("learnable_query mode needs a query set")
        return query_set.slot(degree_label)
    if not 1 <= degree_label <= 9:
        raise ValidationError(f"degree_label must be in 1..9, got {degree_label}")
    if mode == "fixed_query":
        c = (size - 1) / 2.0
        ys, xs = torch.meshgrid(
            torch.arange(size, dtype=torch.float32),
            torch.arange(size, dtype=torch.float32),
            indexing="ij",
        )
        ramp = torch.hypot(xs - c, ys - c) / math.hypot(c, c)
        return ramp.expand(channels, size, size).clone()
    if mode == "scalar":
        return torch.full((channels, size, size), degree_label / 9.0)
    raise ConfigError(f"unknown control mode {mode!r}")
