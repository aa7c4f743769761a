"""key=value config files mapped onto model and training configs."""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError
from .model import ModelConfig, hybrid_assignment
from .train import TrainConfig

MODEL_KEYS = {
    "input_size": int,
    "enc_channels": "int_tuple",
    "n_conv_blocks": int,
    "z_stages": int,
    "control_mode": str,
    "n_queries": int,
    "max_attn_tokens": int,
    "flow_channels": "int_tuple",
}
TRAIN_KEYS = {
    "batch_size": int,
    "learning_rate": float,
    "steps": int,
    "seed": int,
    "w_reconstruction": float,
    "w_multiscale": float,
}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Lines of key=value; blank lines and #-comments are skipped."""
    out: dict[str, str] = {}
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{ln}: expected key=value, got {line!r}")
        out[key.strip()] = value.strip()
    validate_keys(out)
    return out


def validate_keys(overrides: dict[str, str]) -> None:
    unknown = set(overrides) - set(MODEL_KEYS) - set(TRAIN_KEYS)
    if unknown:
        raise ConfigError(
            f"unknown config keys {sorted(unknown)}; "
            f"valid keys: {sorted(MODEL_KEYS) + sorted(TRAIN_KEYS)}"
        )


def _coerce(key: str, value: str, kind) -> object:
    try:
        if kind == "int_tuple":
            return tuple(int(v) for v in value.split(","))
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc


def model_config_from(overrides: dict[str, str]) -> ModelConfig:
    validate_keys(overrides)
    kwargs = {}
    for key, kind in MODEL_KEYS.items():
        if key not in overrides:
            continue
        value = _coerce(key, overrides[key], kind)
        if key == "n_conv_blocks":
            kwargs["block_assignment"] = hybrid_assignment(value)
        else:
            kwargs[key] = value
    return ModelConfig(**kwargs)


def train_config_from(overrides: dict[str, str], seed: int | None = None) -> TrainConfig:
    validate_keys(overrides)
    kwargs = {
        key: _coerce(key, overrides[key], kind)
        for key, kind in TRAIN_KEYS.items()
        if key in overrides
    }
    if seed is not None:
        kwargs["seed"] = seed
    return TrainConfig(**kwargs)
