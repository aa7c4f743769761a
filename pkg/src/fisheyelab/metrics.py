"""PSNR and SSIM on float RGB buffers in [0,1].

PSNR is computed over all channels jointly; identical images return the
+inf sentinel. SSIM uses the classical 11x11 Gaussian window (sigma 1.5,
C1=0.01^2, C2=0.03^2), valid-window coverage, per channel then averaged.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import correlate

from .errors import DimensionError, ValidationError
from .images import validate_image_buffer

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = validate_image_buffer(a)
    b = validate_image_buffer(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a.astype(np.float64), b.astype(np.float64)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_channel(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    mu_x = correlate(x, w, mode="valid")
    mu_y = correlate(y, w, mode="valid")
    var_x = correlate(x * x, w, mode="valid") - mu_x**2
    var_y = correlate(y * y, w, mode="valid") - mu_y**2
    cov = correlate(x * y, w, mode="valid") - mu_x * mu_y
    num = (2 * mu_x * mu_y + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_x**2 + mu_y**2 + SSIM_C1) * (var_x + var_y + SSIM_C2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    a, b = _check_pair(a, b)
    if min(a.shape[0], a.shape[1]) < SSIM_WINDOW:
        raise ValidationError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape[:2]}"
        )
    w = gaussian_window()
    return float(np.mean([_ssim_channel(a[..., c], b[..., c], w) for c in range(3)]))
