"""Building blocks of the rectifier.

Differentiable bilinear warping, a small flow-estimation encoder-decoder, and
the two controllable modulating blocks: a convolutional one that blends
original and query-modulated features by a predicted fusion ratio, and an
attentional one whose query stream comes from the modulated features.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from .errors import DimensionError


def warp(x: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
    """Bilinear backward warp: out(p) = x(p + flow(p)).

    flow is (B, 2, H, W) in pixel units, channel 0 = dx, channel 1 = dy.
    Sampling positions are clamped to the image border. Written as an explicit
    gather (rather than grid_sample) so zero flow reproduces the input
    bit-exactly; differentiable in both x and flow.
    """
    if x.dim() != 4 or flow.dim() != 4:
        raise DimensionError(f"expected 4d tensors, got {x.dim()}d and {flow.dim()}d")
    if flow.shape[1] != 2 or x.shape[-2:] != flow.shape[-2:] or x.shape[0] != flow.shape[0]:
        raise DimensionError(f"flow shape {tuple(flow.shape)} does not match input {tuple(x.shape)}")

    b, c, h, w = x.shape
    gy, gx = torch.meshgrid(
        torch.arange(h, device=x.device, dtype=x.dtype),
        torch.arange(w, device=x.device, dtype=x.dtype),
        indexing="ij",
    )
    sx = (gx + flow[:, 0]).clamp(0, w - 1)
    sy = (gy + flow[:, 1]).clamp(0, h - 1)

    x0 = sx.floor().clamp(0, w - 1)
    y0 = sy.floor().clamp(0, h - 1)
    x1 = (x0 + 1).clamp(max=w - 1)
    y1 = (y0 + 1).clamp(max=h - 1)
    wx = sx - x0
    wy = sy - y0

    flat = x.reshape(b, c, h * w)

    def gather(yi: torch.Tensor, xi: torch.Tensor) -> torch.Tensor:
        idx = (yi * w + xi).long().reshape(b, 1, h * w).expand(b, c, h * w)
        return flat.gather(2, idx).reshape(b, c, h, w)

    wx = wx.unsqueeze(1)
    wy = wy.unsqueeze(1)
    top = gather(y0, x0) * (1 - wx) + gather(y0, x1) * wx
    bot = gather(y1, x0) * (1 - wx) + gather(y1, x1) * wx
    return top * (1 - wy) + bot * wy


class FlowEstimator(nn.Module):
    """Small encoder-decoder predicting a dense 2-channel flow field.

    The final layer is zero-initialized so an untrained estimator yields zero
    flow and the warp starts as the identity. Input sides must be divisible
    by 8 (three stride-2 stages).
    """

    def __init__(self, channels: tuple[int, int, int, int] = (16, 32, 64, 128)):
        super().__init__()
        c0, c1, c2, c3 = channels
        self.stem = nn.Conv2d(3, c0, 3, padding=1)
        self.down1 = nn.Conv2d(c0, c1, 3, stride=2, padding=1)
        self.down2 = nn.Conv2d(c1, c2, 3, stride=2, padding=1)
        self.down3 = nn.Conv2d(c2, c3, 3, stride=2, padding=1)
        self.mid = nn.Conv2d(c3, c3, 3, padding=1)
        self.up3 = nn.Conv2d(c3 + c2, c2, 3, padding=1)
        self.up2 = nn.Conv2d(c2 + c1, c1, 3, padding=1)
        self.up1 = nn.Conv2d(c1 + c0, c0, 3, padding=1)
        self.head = nn.Conv2d(c0, 2, 3, padding=1)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        if image.dim() != 4 or image.shape[1] != 3:
            raise DimensionError(f"expected (B,3,H,W) image, got {tuple(image.shape)}")
        h, w = image.shape[-2:]
        if h % 8 or w % 8:
            raise DimensionError(f"input sides must be divisible by 8, got {h}x{w}")
        act = F.gelu
        e0 = act(self.stem(image))
        e1 = act(self.down1(e0))
        e2 = act(self.down2(e1))
        e3 = act(self.mid(act(self.down3(e2))))

        def up(x: torch.Tensor, skip: torch.Tensor, conv: nn.Module) -> torch.Tensor:
            x = F.interpolate(x, scale_factor=2, mode="bilinear", align_corners=False)
            return act(conv(torch.cat([x, skip], dim=1)))

        d2 = up(e3, e2, self.up3)
        d1 = up(d2, e1, self.up2)
        d0 = up(d1, e0, self.up1)
        return self.head(d0)


class ConvModulatingBlock(nn.Module):
    """Blend input features with query-modulated features by a learned ratio.

    F_c = F_in * Q_c elementwise; the coefficient predictor pools both inputs,
    concatenates them and maps through two fully connected layers to a single
    sigmoid-squashed scalar per sample. Output is theta*F_c + (1-theta)*F_in.

    mode: "dynamic" (predicted theta), "fixed" (theta = 0.5), "direct"
    (return F_c). theta_override pins the ratio for ablations.
    """

    def __init__(self, channels: int, mode: str = "dynamic"):
        super().__init__()
        if mode not in ("dynamic", "fixed", "direct"):
            raise ValueError(f"unknown mode {mode!r}")
        self.channels = channels
        self.mode = mode
        self.fc1 = nn.Linear(2 * channels, channels)
        self.fc2 = nn.Linear(channels, 1)
        self.theta_override: float | None = None

    def fusion_ratio(self, f_in: torch.Tensor, q_c: torch.Tensor) -> torch.Tensor:
        pooled = torch.cat([f_in.mean(dim=(2, 3)), q_c.mean(dim=(2, 3))], dim=1)
        return torch.sigmoid(self.fc2(F.gelu(self.fc1(pooled))))

    def forward(self, f_in: torch.Tensor, q_c: torch.Tensor) -> torch.Tensor:
        if f_in.shape != q_c.shape:
            raise DimensionError(f"feature {tuple(f_in.shape)} vs control {tuple(q_c.shape)}")
        if f_in.shape[1] != self.channels:
            raise DimensionError(f"expected {self.channels} channels, got {f_in.shape[1]}")
        f_c = f_in * q_c
        if self.mode == "direct":
            return f_c
        if self.theta_override is not None:
            theta = f_in.new_full((f_in.shape[0], 1), self.theta_override)
        elif self.mode == "fixed":
            theta = f_in.new_full((f_in.shape[0], 1), 0.5)
        else:
            theta = self.fusion_ratio(f_in, q_c)
        theta = theta.view(-1, 1, 1, 1)
        return theta * f_c + (1 - theta) * f_in


class AttnModulatingBlock(nn.Module):
    """Spatial attention with the modulated features as the query stream.

    Tokens are spatial positions (L = H*W, channel-sized embeddings). One
    shared LayerNorm feeds the Q/K/V projections: queries from F_c = F_in*Q_c,
    keys and values from F_in. Attention output is added to F_in, then an
    FFN of three fully connected layers (expansion 2) with its own LayerNorm
    and a residual, closed by a 1x1 convolution.
    """

    def __init__(self, channels: int, max_tokens: int = 4096):
        super().__init__()
        self.channels = channels
        self.max_tokens = max_tokens
        self.norm_in = nn.LayerNorm(channels)
        self.proj_q = nn.Linear(channels, channels, bias=False)
        self.proj_k = nn.Linear(channels, channels, bias=False)
        self.proj_v = nn.Linear(channels, channels, bias=False)
        self.norm_ffn = nn.LayerNorm(channels)
        self.ffn = nn.Sequential(
            nn.Linear(channels, 2 * channels),
            nn.GELU(),
            nn.Linear(2 * channels, 2 * channels),
            nn.GELU(),
            nn.Linear(2 * channels, channels),
        )
        self.proj_out = nn.Conv2d(channels, channels, 1)

    def _tokens(self, f_in: torch.Tensor, q_c: torch.Tensor):
        if f_in.shape != q_c.shape:
            raise DimensionError(f"feature {tuple(f_in.shape)} vs control {tuple(q_c.shape)}")
        if f_in.shape[1] != self.channels:
            raise DimensionError(f"expected {self.channels} channels, got {f_in.shape[1]}")
        h, w = f_in.shape[-2:]
        if h * w > self.max_tokens:
            raise DimensionError(
                f"attention over {h * w} tokens exceeds the {self.max_tokens} limit"
            )
        tok_in = f_in.flatten(2).transpose(1, 2)  # (B, L, C)
        tok_c = (f_in * q_c).flatten(2).transpose(1, 2)
        return tok_in, tok_c

    def attention(self, f_in: torch.Tensor, q_c: torch.Tensor) -> torch.Tensor:
        """The (B, L, L) attention matrix; rows sum to 1."""
        tok_in, tok_c = self._tokens(f_in, q_c)
        q = self.proj_q(self.norm_in(tok_c))
        k = self.proj_k(self.norm_in(tok_in))
        return torch.softmax(q @ k.transpose(1, 2) / math.sqrt(self.channels), dim=-1)

    def forward(self, f_in: torch.Tensor, q_c: torch.Tensor) -> torch.Tensor:
        b, c, h, w = f_in.shape
        tok_in, tok_c = self._tokens(f_in, q_c)
        q = self.proj_q(self.norm_in(tok_c))
        k = self.proj_k(self.norm_in(tok_in))
        v = self.proj_v(self.norm_in(tok_in))
        attn = torch.softmax(q @ k.transpose(1, 2) / math.sqrt(c), dim=-1)
        f_a = attn @ v + tok_in
        y = self.ffn(self.norm_ffn(f_a)) + f_a
        y = y.transpose(1, 2).reshape(b, c, h, w)
        return self.proj_out(y)
