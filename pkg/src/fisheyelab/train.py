"""Two-stage training: pre-train on one degree, fine-tune across all degrees.

Pre-training optimizes the whole model with the base degree's query only.
Fine-tuning first replicates that query into every slot, then draws each
batch from a single degree and trains with the matching query, so gradients
reach one query slot per step.
"""

from __future__ import annotations

import time
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from .control import make_control_source
from .dataset import DatasetManifest
from .errors import ConfigError, DataError, DimensionError, StateError
from .images import load_image
from .model import ForwardOutput, RectifierNet


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    learning_rate: float = 1e-4
    steps: int = 1000
    seed: int = 0
    w_reconstruction: float = 1.0
    w_multiscale: float = 1.0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")


@dataclass(frozen=True)
class StepRecord:
    step: int
    l_r: float
    l_m: float
    total: float
    degree_label: int


@dataclass
class TrainReport:
    stage: str
    records: list[StepRecord]
    wall_clock: float
    checkpoint_path: Path | None = None


def write_train_report(report: TrainReport, path: str | Path) -> None:
    lines = [f"# stage={report.stage}\twall_clock={report.wall_clock:.3f}"]
    lines += [
        f"{r.step}\t{r.l_r!r}\t{r.l_m!r}\t{r.total!r}\t{r.degree_label}"
        for r in report.records
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_train_report(path: str | Path) -> TrainReport:
    stage, wall = "unknown", 0.0
    records = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            for part in line[1:].split():
                key, _, value = part.partition("=")
                if key == "stage":
                    stage = value
                elif key == "wall_clock":
                    wall = float(value)
            continue
        step, l_r, l_m, total, degree = line.split("\t")
        records.append(StepRecord(int(step), float(l_r), float(l_m), float(total), int(degree)))
    return TrainReport(stage, records, wall)


def loss_reconstruction(i_out: torch.Tensor, i_gt: torch.Tensor) -> torch.Tensor:
    if i_out.shape != i_gt.shape:
        raise DimensionError(f"output {tuple(i_out.shape)} vs target {tuple(i_gt.shape)}")
    return (i_out - i_gt).abs().mean()


def loss_multiscale(
    i_gt: torch.Tensor,
    decoder_features: list[torch.Tensor],
    heads: list[nn.Module],
) -> torch.Tensor:
    """Sum over scales j of mean-abs(downsample(gt, j) - head_j(feature_j)).

    decoder_features[j-1] holds the feature at resolution gt/2^j and
    heads[j-1] decodes it to RGB.
    """
    if not decoder_features:
        raise ConfigError("no decoder features given")
    if len(decoder_features) != len(heads):
        raise ConfigError(f"{len(decoder_features)} features but {len(heads)} heads")
    h, w = i_gt.shape[-2:]
    total = i_gt.new_zeros(())
    for j, (feat, head) in enumerate(zip(decoder_features, heads), start=1):
        if feat.shape[-2:] != (h >> j, w >> j):
            raise DimensionError(
                f"scale {j} feature is {tuple(feat.shape[-2:])}, expected {(h >> j, w >> j)}"
            )
        target = torch.nn.functional.interpolate(
            i_gt, size=(h >> j, w >> j), mode="bilinear", align_corners=False
        )
        total = total + (target - head(feat)).abs().mean()
    return total


class PairLoader:
    """Loads a manifest split fully into memory as (B,3,H,W) float tensors."""

    def __init__(self, manifest: DatasetManifest, split: str):
        records = manifest.split_records(split)
        if not records:
            raise DataError(f"split {split!r} is empty")
        self.degrees = [r.degree_label for r in records]
        fe, gt = [], []
        for r in records:
            fe.append(load_image(manifest.root / r.fisheye_path).transpose(2, 0, 1))
            gt.append(load_image(manifest.root / r.gt_path).transpose(2, 0, 1))
        self.fisheye = torch.from_numpy(np.stack(fe))
        self.gt = torch.from_numpy(np.stack(gt))

    def __len__(self) -> int:
        return len(self.degrees)

    def batch(self, indices: list[int]) -> tuple[torch.Tensor, torch.Tensor, int]:
        degs = {self.degrees[i] for i in indices}
        assert len(degs) == 1, f"mixed-degree batch: {degs}"
        idx = torch.as_tensor(indices)
        return self.fisheye[idx], self.gt[idx], degs.pop()


def batch_schedule(rng: np.random.Generator, n: int, batch_size: int) -> Iterator[list[int]]:
    """Endless shuffled batches over range(n); ragged tails are dropped."""
    bs = min(batch_size, n)
    while True:
        order = rng.permutation(n)
        for i in range(0, n - bs + 1, bs):
            yield order[i : i + bs].tolist()


def _control_for(model: RectifierNet, degree: int) -> torch.Tensor | None:
    mode = model.config.control_mode
    if mode == "none":
        return None
    return make_control_source(mode, degree, query_set=model.queries, size=model.config.input_size)


def _train_steps(
    model: RectifierNet,
    loader: PairLoader,
    cfg: TrainConfig,
    batches: Iterator[list[int]],
) -> list[StepRecord]:
    opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    model.train()
    records = []
    for step in range(cfg.steps):
        fe, gt, degree = loader.batch(next(batches))
        out: ForwardOutput = model(fe, _control_for(model, degree))
        l_r = loss_reconstruction(out.image_out, gt)
        l_m = loss_multiscale(gt, out.decoder_features, list(model.scale_heads))
        total = cfg.w_reconstruction * l_r + cfg.w_multiscale * l_m
        if not torch.isfinite(total):
            raise RuntimeError(
                f"non-finite loss at step {step}: l_r={l_r.item()}, l_m={l_m.item()}"
            )
        opt.zero_grad()
        total.backward()
        opt.step()
        records.append(StepRecord(step, l_r.item(), l_m.item(), total.item(), degree))
    model.eval()
    return records


def pretrain(
    model: RectifierNet,
    manifest: DatasetManifest,
    cfg: TrainConfig,
    ckpt_path: str | Path | None = None,
) -> TrainReport:
    loader = PairLoader(manifest, "pretrain")
    degrees = set(loader.degrees)
    if len(degrees) != 1:
        raise DataError(f"pretrain split must hold a single degree, found {sorted(degrees)}")

    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    start = time.perf_counter()
    records = _train_steps(model, loader, cfg, batch_schedule(rng, len(loader), cfg.batch_size))
    model.stage = "pretrained"

    report = TrainReport("pretrained", records, time.perf_counter() - start)
    if ckpt_path is not None:
        from .checkpoint import save_checkpoint

        report.checkpoint_path = save_checkpoint(model, ckpt_path)
    return report


def degree_schedule(
    rng: np.random.Generator,
    degrees_of: list[int],
    batch_size: int,
    degrees: list[int],
) -> Iterator[list[int]]:
    """Round-robin over degrees; each batch drawn from one degree's records."""
    pools = {d: [i for i, deg in enumerate(degrees_of) if deg == d] for d in degrees}
    for d, pool in pools.items():
        if not pool:
            raise DataError(f"no records for degree {d}")
    cursors = {d: len(pools[d]) for d in degrees}  # force initial shuffle
    while True:
        for d in degrees:
            pool = pools[d]
            bs = min(batch_size, len(pool))
            if cursors[d] + bs > len(pool):
                pools[d] = list(rng.permutation(pool))
                cursors[d] = 0
            yield pools[d][cursors[d] : cursors[d] + bs]
            cursors[d] += bs


def finetune(
    model: RectifierNet,
    manifest: DatasetManifest,
    cfg: TrainConfig,
    ckpt_path: str | Path | None = None,
    base_degree: int | None = None,
) -> TrainReport:
    if model.stage != "pretrained":
        raise StateError(f"finetune needs a pretrained model, got stage {model.stage!r}")
    loader = PairLoader(manifest, "finetune")
    degrees = sorted(set(loader.degrees))

    if base_degree is None:
        pre = manifest.degrees_in_split("pretrain")
        base_degree = pre[0] if pre else 5
    if model.config.control_mode == "learnable_query":
        model.queries.replicate_slot(base_degree)

    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    start = time.perf_counter()
    records = _train_steps(
        model, loader, cfg, degree_schedule(rng, loader.degrees, cfg.batch_size, degrees)
    )
    model.stage = "finetuned"

    report = TrainReport("finetuned", records, time.perf_counter() - start)
    if ckpt_path is not None:
        from .checkpoint import save_checkpoint

        report.checkpoint_path = save_checkpoint(model, ckpt_path)
    return report
