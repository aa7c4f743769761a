"""
Tour of the network building blocks.

warp: bilinear backward sampling with border clamp; exactly the identity
at zero flow, which is why the flow head is zero-initialized (training
starts from "change nothing").

ConvModulatingBlock: F_c = F_in * Q_c, then a predicted ratio theta
blends F_c with F_in. AttnModulatingBlock: the modulated features form
the attention queries while keys/values come from the unmodulated input,
so the control decides what to look for.
"""

import torch

from fisheyelab.blocks import (
    AttnModulatingBlock,
    ConvModulatingBlock,
    FlowEstimator,
    warp,
)

torch.manual_seed(0)

# --- warping ---------------------------------------------------------
x = torch.rand(1, 3, 8, 8)
assert torch.equal(warp(x, torch.zeros(1, 2, 8, 8)), x)
print("zero flow is a bit-exact no-op")

shift = torch.cat([torch.ones(1, 1, 8, 8), torch.zeros(1, 1, 8, 8)], dim=1)
shifted = warp(x, shift)
print("flow (1,0) shifts left neighbor in:", torch.equal(shifted[..., :-1], x[..., 1:]))

flow_net = FlowEstimator(channels=(8, 16, 32, 64))
with torch.no_grad():
    print("fresh estimator emits zero flow:", float(flow_net(x).abs().max()) == 0.0)

# --- conv modulating block -------------------------------------------
block = ConvModulatingBlock(16)
f_in = torch.randn(2, 16, 8, 8)
q_c = torch.randn(2, 16, 8, 8)
theta = block.fusion_ratio(f_in, q_c)
print(f"\npredicted fusion ratios: {[round(float(t), 3) for t in theta.flatten()]}")
print("all in (0, 1):", bool((theta > 0).all() and (theta < 1).all()))

block.theta_override = 1.0
assert torch.equal(block(f_in, q_c), f_in * q_c)
print("theta forced to 1 returns the modulated features exactly")

# --- attention modulating block --------------------------------------
attn_block = AttnModulatingBlock(16)
f_in = torch.randn(1, 16, 4, 4)  # 16 tokens
attn = attn_block.attention(f_in, q_c=torch.randn(1, 16, 4, 4))
print(f"\nattention matrix shape {tuple(attn.shape)} (tokens x tokens)")
print("rows sum to 1:", bool(torch.allclose(attn.sum(-1), torch.ones(1, 16), atol=1e-6)))
out = attn_block(f_in, torch.randn(1, 16, 4, 4))
print("output shape preserved:", tuple(out.shape) == (1, 16, 4, 4))
