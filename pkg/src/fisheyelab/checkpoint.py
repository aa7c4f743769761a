"""Checkpoint bundles: one zip archive holding config, stage, and parameters.

Every named parameter is stored as a float32 .npy entry (the npy header
carries the shape), so bundles are readable without torch.
"""

from __future__ import annotations

import hashlib
import io
import json
import zipfile
from pathlib import Path

import numpy as np
import torch

from .errors import DataError, ValidationError
from .model import ModelConfig, RectifierNet

FORMAT_VERSION = 1
STAGES = ("init", "pretrained", "finetuned")


def config_to_dict(config: ModelConfig) -> dict:
    return {
        "format": FORMAT_VERSION,
        "input_size": config.input_size,
        "enc_channels": list(config.enc_channels),
        "block_assignment": {str(l): kind for l, kind in sorted(config.block_assignment.items())},
        "z_stages": config.z_stages,
        "control_mode": config.control_mode,
        "n_queries": config.n_queries,
        "max_attn_tokens": config.max_attn_tokens,
        "flow_channels": list(config.flow_channels),
    }


def config_from_dict(d: dict) -> ModelConfig:
    if d.get("format") != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint format {d.get('format')!r}")
    return ModelConfig(
        input_size=d["input_size"],
        enc_channels=tuple(d["enc_channels"]),
        block_assignment={int(l): kind for l, kind in d["block_assignment"].items()},
        z_stages=d["z_stages"],
        control_mode=d["control_mode"],
        n_queries=d["n_queries"],
        max_attn_tokens=d["max_attn_tokens"],
        flow_channels=tuple(d["flow_channels"]),
    )


def save_checkpoint(model: RectifierNet, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if model.stage not in STAGES:
        raise ValidationError(f"unknown stage {model.stage!r}")
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("config.json", json.dumps(config_to_dict(model.config), indent=1))
        zf.writestr("stage.txt", model.stage + "\n")
        for name, p in model.named_parameters():
            buf = io.BytesIO()
            np.save(buf, p.detach().numpy().astype(np.float32))
            zf.writestr(f"params/{name}.npy", buf.getvalue())
    return path


def checkpoint_id(path: str | Path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return digest[:12]


def load_checkpoint(path: str | Path) -> tuple[RectifierNet, str]:
    """Rebuild the model from a bundle; returns (model, checkpoint id)."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no checkpoint at {path}")
    with zipfile.ZipFile(path) as zf:
        names = set(zf.namelist())
        if "config.json" not in names or "stage.txt" not in names:
            raise DataError(f"{path} is not a checkpoint bundle")
        config = config_from_dict(json.loads(zf.read("config.json")))
        stage = zf.read("stage.txt").decode().strip()
        if stage not in STAGES:
            raise DataError(f"checkpoint has unknown stage {stage!r}")

        model = RectifierNet(config)
        model.stage = stage
        expected = {f"params/{name}.npy" for name, _ in model.named_parameters()}
        stored = {n for n in names if n.startswith("params/")}
        if expected != stored:
            missing = sorted(expected - stored)[:3]
            extra = sorted(stored - expected)[:3]
            raise DataError(f"parameter mismatch: missing {missing}, unexpected {extra}")
        with torch.no_grad():
            for name, p in model.named_parameters():
                arr = np.load(io.BytesIO(zf.read(f"params/{name}.npy")))
                if tuple(arr.shape) != tuple(p.shape):
                    raise DataError(f"{name}: stored shape {arr.shape} vs model {tuple(p.shape)}")
                p.copy_(torch.from_numpy(arr))
    model.eval()
    return model, checkpoint_id(path)


def export_queries(ckpt_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Write each query slot as query_<degree>.npy under out_dir."""
    model, _ = load_checkpoint(ckpt_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    queries = model.queries.queries.detach().numpy().astype(np.float32)
    for i in range(queries.shape[0]):
        p = out_dir / f"query_{i + 1}.npy"
        np.save(p, queries[i])
        paths.append(p)
    return paths
