"""Fisheye synthesis: backward-warp a ground-truth image through the radial model."""

from __future__ import annotations

import numpy as np

from .images import ImageBufferError, validate_image_buffer
from .radial import DistortionParams, invert_radial_map, radial_map


def corner_radius(size: int) -> float:
    """Pixel distance from the image center to a corner, the default norm_radius."""
    half = (size - 1) / 2.0
    return float(np.hypot(half, half))


def _bilinear_sample(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample img (HxWx3, float64) at fractional coords; outside pixels are black."""
    h, w = img.shape[:2]
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = x0 + 1
    y1 = y0 + 1
    fx = x - x0
    fy = y - y0

    def tap(xi: np.ndarray, yi: np.ndarray) -> np.ndarray:
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        xi_c = np.clip(xi, 0, w - 1)
        yi_c = np.clip(yi, 0, h - 1)
        vals = img[yi_c, xi_c]
        vals[~inside] = 0.0
        return vals

    w00 = ((1 - fx) * (1 - fy))[..., None]
    w10 = (fx * (1 - fy))[..., None]
    w01 = ((1 - fx) * fy)[..., None]
    w11 = (fx * fy)[..., None]
    return w00 * tap(x0, y0) + w10 * tap(x1, y0) + w01 * tap(x0, y1) + w11 * tap(x1, y1)


def synthesize_fisheye(gt: np.ndarray, params: DistortionParams) -> np.ndarray:
    """Render the fisheye view of a square ground-truth image.

    Each output pixel at normalized distorted radius r_d samples the input at
    radius invert_radial_map(r_d) along the same angle (bilinear). Output
    pixels whose distorted radius exceeds radial_map(1), or whose source
    sample falls outside the frame, come out black.
    """
    validate_image_buffer(gt)
    h, w = gt.shape[:2]
    if h != w:
        raise ImageBufferError(f"ground-truth image must be square, got {h}x{w}")

    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    dx = xx - cx
    dy = yy - cy
    rho_d = np.hypot(dx, dy)
    r_d = rho_d / params.norm_radius

    rd_max = radial_map(params, 1.0)
    valid = r_d <= rd_max + 1e-12
    r_u = np.zeros_like(r_d)
    r_u[valid] = invert_radial_map(params, r_d[valid])

    # scale source offsets along the ray; center pixel keeps its own color
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(rho_d > 0, (r_u * params.norm_radius) / np.where(rho_d > 0, rho_d, 1.0), 0.0)
    src_x = cx + dx * scale
    src_y = cy + dy * scale

    out = _bilinear_sample(gt.astype(np.float64), src_x, src_y)
    out[~valid] = 0.0
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def rectification_flow(size: int, params: DistortionParams) -> np.ndarray:
    """Ideal appearance flow (2xHxW, dx/dy in pixels) that undoes the distortion.

    Sampling the fisheye image at p + flow(p) reproduces the ground truth at p:
    the ground-truth content at normalized radius r appears in the fisheye at
    radial_map(r), so the flow points radially by (radial_map(r) - r) * norm_radius.
    """
    cy = cx = (size - 1) / 2.0
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dx = xx - cx
    dy = yy - cy
    rho = np.hypot(dx, dy)
    r_u = rho / params.norm_radius
    # displacement from the normalized-radius difference, so identity
    # coefficients give an exactly zero field
    disp = (radial_map(params, r_u) - r_u) * params.norm_radius
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(rho > 0, disp / np.where(rho > 0, rho, 1.0), 0.0)
    return np.stack([dx * scale, dy * scale]).astype(np.float32)
