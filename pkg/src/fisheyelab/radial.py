"""Radial lens distortion model.

The distortion is an odd-power polynomial acting on the normalized radius:

    r_d = k1*r + k2*r^3 + k3*r^5 + k4*r^7

with r = (pixel distance from image center) / norm_radius. Odd powers keep
the center a fixed point and the map smooth through r = 0. Coefficient sets
are validated for strict monotonicity on [0, 1] so the map stays invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError

MONOTONICITY_SAMPLES = 1024


class DistortionParamsError(ValidationError):
    """Raised when a coefficient set violates the model's invariants."""


@dataclass(frozen=True)
class DistortionParams:
    """Four-coefficient radial polynomial plus its severity label.

    k: (k1, k2, k3, k4) polynomial coefficients, dimensionless.
    degree_label: integer 1..9 naming the distortion severity step.
    norm_radius: pixel radius that maps to normalized r = 1.
    """

    k: tuple[float, float, float, float]
    degree_label: int = 5
    norm_radius: float = 1.0

    def __post_init__(self) -> None:
        if len(self.k) != 4:
            raise DistortionParamsError(f"expected 4 coefficients, got {len(self.k)}")
        object.__setattr__(self, "k", tuple(float(c) for c in self.k))
        if not all(np.isfinite(self.k)):
            raise DistortionParamsError(f"non-finite coefficients: {self.k}")
        if not 1 <= int(self.degree_label) <= 9:
            raise DistortionParamsError(f"degree_label must be in 1..9, got {self.degree_label}")
        if not self.norm_radius > 0:
            raise DistortionParamsError(f"norm_radius must be positive, got {self.norm_radius}")
        r = np.linspace(0.0, 1.0, MONOTONICITY_SAMPLES)
        mapped = radial_map(self, r)
        if not np.all(np.diff(mapped) > 0):
            raise DistortionParamsError(
                f"radial map is not strictly increasing on [0,1] for k={self.k}"
            )

    def with_norm_radius(self, norm_radius: float) -> "DistortionParams":
        return replace(self, norm_radius=float(norm_radius))


def radial_map(params: DistortionParams, r_u: float | np.ndarray) -> float | np.ndarray:
    """Map an undistorted normalized radius to its distorted radius."""
    r = np.asarray(r_u, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    k1, k2, k3, k4 = params.k
    r2 = r * r
    out = r * (k1 + r2 * (k2 + r2 * (k3 + r2 * k4)))
    return float(out) if np.isscalar(r_u) else out


def invert_radial_map(
    params: DistortionParams, r_d: float | np.ndarray, iterations: int = 90
) -> float | np.ndarray:
    """Invert the radial map by bisection on [0, 1].

    Valid for r_d in [0, radial_map(params, 1)]; the monotone map guarantees
    the bracket. The iteration count takes the bracket to float64 resolution,
    well inside the 1e-8 residual contract.
    """
    rd = np.asarray(r_d, dtype=np.float64)
    rd_max = radial_map(params, 1.0)
    if np.any(rd < -1e-12) or np.any(rd > rd_max + 1e-12):
        raise ValueError(f"r_d outside invertible range [0, {rd_max:.6g}]")
    rd = np.clip(rd, 0.0, rd_max)

    lo = np.zeros_like(rd)
    hi = np.ones_like(rd)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = radial_map(params, mid) < rd
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out) if np.isscalar(r_d) else out


DEFAULT_BASE_PARAMS = DistortionParams(k=(1.25, -0.30, 0.06, -0.01), degree_label=5)

LADDER_SCALE_STEP = 0.2


def build_degree_ladder(
    base: DistortionParams = DEFAULT_BASE_PARAMS, n_degrees: int = 9
) -> dict[int, DistortionParams]:
    """Build parameter sets of strictly increasing severity.

    Degree i scales the nonlinear coefficients k2..k4 of `base` by 0.2*i and
    renormalizes k1 so radial_map(1) = 1 (degree 5 reproduces the normalized
    base set). Severity is ordered by the mid-radius displacement
    |radial_map(0.5) - 0.5|, which the renormalization leaves meaningful
    (edge displacement is identically zero by construction).
    """
    if n_degrees != 9:
        raise ValueError("the ladder is defined for exactly 9 degrees")
    ladder: dict[int, DistortionParams] = {}
    for i in range(1, n_degrees + 1):
        s = LADDER_SCALE_STEP * i
        k2, k3, k4 = (s * c for c in base.k[1:])
        k1 = 1.0 - (k2 + k3 + k4)
        try:
            ladder[i] = DistortionParams(
                k=(k1, k2, k3, k4), degree_label=i, norm_radius=base.norm_radius
            )
        except DistortionParamsError as exc:
            raise DistortionParamsError(f"degree {i}: {exc}") from exc

    disp = [abs(radial_map(ladder[i], 0.5) - 0.5) for i in range(1, n_degrees + 1)]
    if not all(a < b for a, b in zip(disp, disp[1:])):
        raise DistortionParamsError(
            f"ladder severity is not strictly increasing at mid-radius: {disp}"
        )
    return ladder
