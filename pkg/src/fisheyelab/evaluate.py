"""Per-degree evaluation harness producing table-shaped reports.

control policies: "matched" feeds each record the query of its own degree,
"swapped" exchanges the queries of degrees 1 and 9 (the mismatch ablation),
"none" runs without control (only for models built with control_mode none).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .control import make_control_source
from .dataset import DatasetManifest
from .errors import ConfigError, DataError
from .images import load_image
from .metrics import psnr, ssim

POLICIES = ("matched", "swapped", "none")


@dataclass
class EvalReport:
    degrees: list[int]
    psnr_by_degree: dict[int, float]
    ssim_by_degree: dict[int, float]
    psnr_avg: float
    ssim_avg: float
    control_mode: str = "unknown"
    policy: str = "matched"
    checkpoint_id: str = "unsaved"
    dataset_id: str = "unknown"


def _policy_degree(policy: str, degree: int) -> int:
    if policy == "swapped":
        return {1: 9, 9: 1}.get(degree, degree)
    return degree


def _to_batch(img: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(img.transpose(2, 0, 1)).unsqueeze(0)


def _to_image(t: torch.Tensor) -> np.ndarray:
    return t.squeeze(0).detach().numpy().transpose(1, 2, 0).clip(0.0, 1.0).astype(np.float32)


def _finite_mean(values: list[float]) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return float(np.mean(finite)) if finite else float("inf")


def evaluate(
    model,
    manifest: DatasetManifest,
    policy: str = "matched",
    split: str = "test",
    checkpoint_id: str = "unsaved",
) -> EvalReport:
    if policy not in POLICIES:
        raise ConfigError(f"policy must be one of {POLICIES}, got {policy!r}")
    records = manifest.split_records(split)
    if not records:
        raise DataError(f"split {split!r} is empty")
    mode = model.config.control_mode
    if policy == "none" and mode != "none":
        raise ConfigError("policy none requires a model built with control_mode none")

    model.eval()
    psnr_acc: dict[int, list[float]] = {}
    ssim_acc: dict[int, list[float]] = {}
    with torch.no_grad():
        for r in records:
            fe = load_image(manifest.root / r.fisheye_path)
            gt = load_image(manifest.root / r.gt_path)
            if mode == "none":
                control = None
            else:
                control = make_control_source(
                    mode,
                    _policy_degree(policy, r.degree_label),
                    query_set=model.queries,
                    size=model.config.input_size,
                )
            out = model(_to_batch(fe), control)
            rectified = _to_image(out.image_out)
            psnr_acc.setdefault(r.degree_label, []).append(psnr(rectified, gt))
            ssim_acc.setdefault(r.degree_label, []).append(ssim(rectified, gt))

    degrees = sorted(psnr_acc)
    psnr_by = {d: _finite_mean(psnr_acc[d]) for d in degrees}
    ssim_by = {d: float(np.mean(ssim_acc[d])) for d in degrees}
    return EvalReport(
        degrees=degrees,
        psnr_by_degree=psnr_by,
        ssim_by_degree=ssim_by,
        psnr_avg=_finite_mean(list(psnr_by.values())),
        ssim_avg=float(np.mean(list(ssim_by.values()))),
        control_mode=mode,
        policy=policy,
        checkpoint_id=checkpoint_id,
        dataset_id=str(manifest.root),
    )


def _fmt(v: float) -> str:
    return "inf" if np.isinf(v) else f"{v:.6f}"


def format_table(report: EvalReport) -> str:
    """Human-readable table; the numbers parse back identically."""
    header = ["degree"] + [f"d{d}" for d in report.degrees] + ["Avg"]
    psnr_row = ["psnr"] + [_fmt(report.psnr_by_degree[d]) for d in report.degrees]
    psnr_row.append(_fmt(report.psnr_avg))
    ssim_row = ["ssim"] + [_fmt(report.ssim_by_degree[d]) for d in report.degrees]
    ssim_row.append(_fmt(report.ssim_avg))
    widths = [max(len(row[i]) for row in (header, psnr_row, ssim_row)) for i in range(len(header))]
    lines = [
        "  ".join(cell.rjust(w) for cell, w in zip(row, widths))
        for row in (header, psnr_row, ssim_row)
    ]
    meta = (
        f"# control_mode={report.control_mode} policy={report.policy} "
        f"checkpoint={report.checkpoint_id}"
    )
    return "\n".join([meta, *lines])


def parse_table(text: str) -> tuple[dict[int, tuple[float, float]], tuple[float, float]]:
    """Inverse of format_table: {degree: (psnr, ssim)} plus the averages."""
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    header, psnr_row, ssim_row = rows
    degrees = [int(h[1:]) for h in header[1:-1]]
    by_degree = {
        d: (float(p), float(s)) for d, p, s in zip(degrees, psnr_row[1:-1], ssim_row[1:-1])
    }
    return by_degree, (float(psnr_row[-1]), float(ssim_row[-1]))


def write_report_lines(report: EvalReport, path: str | Path) -> None:
    lines = [
        f"{d}\t{_fmt(report.psnr_by_degree[d])}\t{_fmt(report.ssim_by_degree[d])}"
        for d in report.degrees
    ]
    lines.append(f"avg\t{_fmt(report.psnr_avg)}\t{_fmt(report.ssim_avg)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_report_lines(path: str | Path) -> tuple[dict[int, tuple[float, float]], tuple[float, float]]:
    by_degree: dict[int, tuple[float, float]] = {}
    avg = (float("nan"), float("nan"))
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, p, s = line.split("\t")
        if key == "avg":
            avg = (float(p), float(s))
        else:
            by_degree[int(key)] = (float(p), float(s))
    return by_degree, avg
