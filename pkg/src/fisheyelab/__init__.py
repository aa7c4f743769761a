"""Query-controlled fisheye rectification lab.

Synthesizes radially distorted datasets at nine graded severities, trains a
controllable rectification network whose layers are modulated by learnable
queries, and evaluates per-degree PSNR/SSIM. A CLI and an HTTP service expose
the pipeline; convex query blends give continuous control over rectification
strength.
"""

__version__ = "0.1.0"

from .radial import (
    DEFAULT_BASE_PARAMS,
    DistortionParams,
    build_degree_ladder,
    invert_radial_map,
    radial_map,
)
from .synth import rectification_flow, synthesize_fisheye

__all__ = [
    "DEFAULT_BASE_PARAMS",
    "DistortionParams",
    "build_degree_ladder",
    "invert_radial_map",
    "radial_map",
    "rectification_flow",
    "synthesize_fisheye",
    "__version__",
]
