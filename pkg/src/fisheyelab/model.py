"""The rectification network: flow, warp, and an 11-layer controlled U-net.

A stride-2 stem takes the warped image to half resolution, five encoder
layers walk down to 1/32, the bottleneck sits at 1/32, and five decoder
layers walk back up to 1/2. Each layer applies a channel-changing entry
convolution, then its modulating block with that layer's control condition,
then the resampling step. Decoder upsampling concatenates the mirrored
encoder layer's post-block features; the final upsample lands at full
resolution, concatenates the warped image, and a 3x3 head predicts a
residual on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F

from .blocks import AttnModulatingBlock, ConvModulatingBlock, FlowEstimator, warp
from .control import CONTROL_MODES, ControlChain, ControlExtractor, QuerySet
from .errors import ConfigError, DimensionError

N_LAYERS = 11

# layers ordered by feature-map size, largest first; ties broken outside-in.
# assigning the first x layers to conv blocks reproduces the published
# placements (x=6 puts conv blocks at {1,2,3,9,10,11}).
_SIZE_ORDER = (1, 11, 2, 10, 3, 9, 4, 8, 5, 7, 6)


def hybrid_assignment(n_conv: int) -> dict[int, str]:
    if not 0 <= n_conv <= N_LAYERS:
        raise ConfigError(f"n_conv must be in 0..{N_LAYERS}, got {n_conv}")
    conv_layers = set(_SIZE_ORDER[:n_conv])
    return {l: "conv" if l in conv_layers else "attn" for l in range(1, N_LAYERS + 1)}


@dataclass(frozen=True)
class ModelConfig:
    input_size: int = 256
    enc_channels: tuple[int, int, int, int, int] = (32, 64, 128, 192, 256)
    block_assignment: dict[int, str] = field(default_factory=lambda: hybrid_assignment(6))
    z_stages: int = 6
    control_mode: str = "learnable_query"
    n_queries: int = 9
    max_attn_tokens: int = 4096
    flow_channels: tuple[int, int, int, int] = (16, 32, 64, 128)

    def __post_init__(self) -> None:
        if self.input_size < 32 or self.input_size % 32:
            raise ConfigError(f"input_size must be a positive multiple of 32, got {self.input_size}")
        if len(self.enc_channels) != 5 or any(c < 1 for c in self.enc_channels):
            raise ConfigError(f"need 5 positive encoder widths, got {self.enc_channels}")
        if sorted(self.block_assignment) != list(range(1, N_LAYERS + 1)):
            raise ConfigError("block_assignment must cover layers 1..11 exactly once")
        if any(v not in ("conv", "attn") for v in self.block_assignment.values()):
            raise ConfigError(f"block kinds must be conv or attn, got {self.block_assignment}")
        if self.z_stages != 6:
            raise ConfigError(f"multi-scale supervision is defined for 6 stages, got {self.z_stages}")
        if self.control_mode not in CONTROL_MODES:
            raise ConfigError(f"control_mode must be one of {CONTROL_MODES}")
        if self.n_queries < 1:
            raise ConfigError(f"n_queries must be positive, got {self.n_queries}")


def layer_specs(config: ModelConfig) -> list[tuple[int, int, int]]:
    """(channels, height, width) seen by each layer's block, l = 1..11."""
    enc = config.enc_channels
    channels = [*enc, enc[-1], *reversed(enc)]
    exponents = [1, 2, 3, 4, 5, 5, 5, 4, 3, 2, 1]
    side = [config.input_size >> e for e in exponents]
    return [(c, s, s) for c, s in zip(channels, side)]


@dataclass
class ForwardOutput:
    image_out: torch.Tensor
    decoder_features: list[torch.Tensor]
    flow: torch.Tensor


def _make_block(kind: str, channels: int, max_tokens: int) -> nn.Module:
    if kind == "conv":
        return ConvModulatingBlock(channels)
    return AttnModulatingBlock(channels, max_tokens=max_tokens)


class RectifierNet(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.stage = "init"  # advanced by pretrain/finetune, serialized in checkpoints
        specs = layer_specs(config)
        enc = config.enc_channels

        self.flow_net = FlowEstimator(config.flow_channels)
        self.queries = QuerySet(config.n_queries, 3, config.input_size)
        self.extractor = ControlExtractor(3)
        self.chain = ControlChain(specs, in_channels=3)

        self.stem = nn.Conv2d(3, enc[0], 3, stride=2, padding=1)

        # entry convolutions absorb channel changes (and skip concatenations
        # on the decoder side); blocks and resampling convs are width-preserving
        entry_in = [
            enc[0], enc[0], enc[1], enc[2], enc[3],
            enc[4],
            enc[4], enc[4] + enc[3], enc[3] + enc[2], enc[2] + enc[1], enc[1] + enc[0],
        ]
        self.entries = nn.ModuleList(
            nn.Conv2d(cin, spec[0], 3, padding=1) for cin, spec in zip(entry_in, specs)
        )
        self.blocks = nn.ModuleList(
            _make_block(config.block_assignment[l], specs[l - 1][0], config.max_attn_tokens)
            for l in range(1, N_LAYERS + 1)
        )
        self.downsamples = nn.ModuleList(
            nn.Conv2d(specs[l - 1][0], specs[l - 1][0], 3, stride=2, padding=1)
            for l in (1, 2, 3, 4)
        )
        self.upsamples = nn.ModuleList(
            nn.Conv2d(specs[l - 1][0], specs[l - 1][0], 3, padding=1)
            for l in (7, 8, 9, 10, 11)
        )
        # heads[j-1] decodes the feature at resolution input/2^j to RGB
        self.scale_heads = nn.ModuleList(nn.Conv2d(enc[j], 3, 3, padding=1) for j in range(5))
        self.head = nn.Conv2d(enc[0] + 3, 3, 3, padding=1)

    def control_conditions(self, control: torch.Tensor | None) -> list[torch.Tensor] | None:
        """Run the extractor and chain; None means uncontrolled (all-ones)."""
        if self.config.control_mode == "none":
            if control is not None:
                raise ConfigError("control_mode none takes no control tensor")
            return None
        if control is None:
            raise ConfigError(f"control_mode {self.config.control_mode} needs a control tensor")
        s = self.config.input_size
        if control.shape != (3, s, s):
            raise DimensionError(f"control must be (3,{s},{s}), got {tuple(control.shape)}")
        q_ex = self.extractor(control.unsqueeze(0))
        return self.chain(q_ex)

    def forward(self, image: torch.Tensor, control: torch.Tensor | None = None) -> ForwardOutput:
        s = self.config.input_size
        if image.dim() != 4 or image.shape[1:] != (3, s, s):
            raise DimensionError(f"expected (B,3,{s},{s}) input, got {tuple(image.shape)}")
        b = image.shape[0]
        conditions = self.control_conditions(control)

        flow = self.flow_net(image)
        warped = warp(image, flow)

        def run_block(l: int, feat: torch.Tensor) -> torch.Tensor:
            feat = F.gelu(self.entries[l - 1](feat))
            if conditions is None:
                q_c = torch.ones_like(feat)
            else:
                q_c = conditions[l - 1].expand(b, -1, -1, -1)
            return self.blocks[l - 1](feat, q_c)

        x = F.gelu(self.stem(warped))
        skips = []
        for l in range(1, 6):
            x = run_block(l, x)
            if l < 5:
                skips.append(x)
                x = F.gelu(self.downsamples[l - 1](x))
        x = run_block(6, x)

        decoder_features = [None] * 5
        for l in range(7, 12):
            x = run_block(l, x)
            decoder_features[11 - l] = x  # layer 11 is the finest scale, j=1
            x = F.interpolate(x, scale_factor=2, mode="bilinear", align_corners=False)
            x = F.gelu(self.upsamples[l - 7](x))
            if l < 11:
                x = torch.cat([x, skips[10 - l]], dim=1)

        out = self.head(torch.cat([x, warped], dim=1)) + warped
        if not self.training:
            out = out.clamp(0.0, 1.0)
        return ForwardOutput(out, decoder_features, flow)

    def decode_scale_head(self, feature: torch.Tensor, j: int) -> torch.Tensor:
        """RGB decoding of the decoder feature at resolution input/2^j."""
        if not 1 <= j <= 5:
            raise ConfigError(f"scale index must be in 1..5, got {j}")
        return self.scale_heads[j - 1](feature)


def count_params(config: ModelConfig) -> int:
    model = RectifierNet(config)
    return sum(p.numel() for p in model.parameters() if p.requires_grad)
