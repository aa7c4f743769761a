"""Image buffer helpers: float RGB arrays in [0,1], PNG IO, sample sources."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ValidationError


class ImageBufferError(ValidationError):
    pass


def validate_image_buffer(img: np.ndarray) -> np.ndarray:
    """Check HxWx3 float layout with finite values in [0,1]."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise ImageBufferError(f"expected HxWx3 image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ImageBufferError("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ImageBufferError("image values must lie in [0,1]")
    return img


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Decode an image file to HxWx3 float32 in [0,1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    return arr


def save_image(path: str | os.PathLike, img: np.ndarray) -> None:
    """Write an HxWx3 float [0,1] buffer as 8-bit PNG."""
    validate_image_buffer(img)
    arr = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path)


def resize_image(img: np.ndarray, size: int) -> np.ndarray:
    """Bilinear-resize a source image to size x size (dataset preparation)."""
    arr = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    out = Image.fromarray(arr, mode="RGB").resize((size, size), Image.BILINEAR)
    return np.asarray(out, dtype=np.float32) / 255.0


def _smooth_blobs(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.zeros((size, size, 3))
    for _ in range(n):
        cx, cy = rng.uniform(0, size, 2)
        sigma = rng.uniform(size * 0.05, size * 0.35)
        color = rng.uniform(0.1, 1.0, 3)
        g = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
        img += g[..., None] * color
    return img


def make_sample_image(size: int, seed: int) -> np.ndarray:
    """Procedural textured test image: blobs + gratings + hard-edged shapes.

    Mixes smooth and high-contrast structure so warps of a few pixels change
    the picture measurably (PSNR-sensitive), which plain noise would not.
    """
    rng = np.random.default_rng(seed)
    img = _smooth_blobs(rng, size, n=6)

    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    for _ in range(2):
        fx, fy = rng.uniform(2, 10, 2)
        phase = rng.uniform(0, 2 * np.pi)
        grating = 0.5 + 0.5 * np.sin(2 * np.pi * (fx * xx + fy * yy) / size + phase)
        img += 0.35 * grating[..., None] * rng.uniform(0.2, 1.0, 3)

    for _ in range(4):
        x0, y0 = rng.integers(0, size - 2, 2)
        w, h = rng.integers(size // 8, size // 2, 2)
        img[y0 : min(y0 + h, size), x0 : min(x0 + w, size)] += rng.uniform(-0.5, 0.5, 3)

    img -= img.min()
    peak = img.max()
    if peak > 0:
        img /= peak
    return img.astype(np.float32)


def make_sample_sources(out_dir: str | os.PathLike, count: int, size: int = 256, seed: int = 0) -> list[Path]:
    """Write `count` procedural source images as PNGs, for datasets and demos."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        p = out / f"src_{i:06d}.png"
        save_image(p, make_sample_image(size, seed + i))
        paths.append(p)
    return paths
