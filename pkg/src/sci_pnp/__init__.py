"""Snapshot compressive imaging: coded-exposure simulation and
plug-and-play reconstruction.

A coded-exposure camera modulates B video frames with per-frame binary
masks and sums them into a single 2D snapshot. This package simulates
that forward model and recovers the video with plug-and-play solvers
(projection-based and ADMM) whose prior step is any bounded denoiser,
including external denoiser processes speaking a small stdio protocol.
"""

from .admm import AdmmConfig, admm_solve, admm_x_update, fixed_point_residuals
from .bench import BenchResult, load_suite, run_suite
from .color import (
    ColorReconstruction,
    bayer_merge,
    bayer_split,
    color_reconstruct,
    demosaic_bilinear,
    demosaic_video,
    upsample_rgb_to_mosaic,
)
from .cube import as_cube, as_frame, devectorize, vectorize
from .denoisers import (
    ClipDenoiser,
    Denoiser,
    DenoiserSchedule,
    GaussianDenoiser,
    IdentityDenoiser,
    ScheduleEntry,
    TVDenoiser,
    make_denoiser,
    verify_bounded,
)
from .gap import GapConfig, gap_project, gap_solve, verify_energy_identity, verify_step_bound
from .metrics import QualityReport, evaluate, mean_psnr, mean_ssim, psnr, ssim
from .plugin import PluginClient, PluginDenoiser, PluginError, PluginTimeoutError
from .runconfig import load_run_config, solve_from_config, validate_run_config
from .sensing import (
    MaskCoverageError,
    SensingOperator,
    add_noise,
    check_gradient_bound,
    compute_R,
    generate_masks,
)
from .synthetic import gray_rgb_video, moving_shapes_video
from .tensorio import SciTensorError, read_png_stack, read_tensor, write_png_stack, write_tensor
from .trace import IterationRecord, SolverTrace
from .tv import rof_objective, total_variation, tv_denoise, tv_denoise_frame

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "admm_solve",
    "admm_x_update",
    "fixed_point_residuals",
    "BenchResult",
    "load_suite",
    "run_suite",
    "ColorReconstruction",
    "bayer_merge",
    "bayer_split",
    "color_reconstruct",
    "demosaic_bilinear",
    "demosaic_video",
    "upsample_rgb_to_mosaic",
    "as_cube",
    "as_frame",
    "devectorize",
    "vectorize",
    "ClipDenoiser",
    "Denoiser",
    "DenoiserSchedule",
    "GaussianDenoiser",
    "IdentityDenoiser",
    "ScheduleEntry",
    "TVDenoiser",
    "make_denoiser",
    "verify_bounded",
    "GapConfig",
    "gap_project",
    "gap_solve",
    "verify_energy_identity",
    "verify_step_bound",
    "QualityReport",
    "evaluate",
    "mean_psnr",
    "mean_ssim",
    "psnr",
    "ssim",
    "PluginClient",
    "PluginDenoiser",
    "PluginError",
    "PluginTimeoutError",
    "load_run_config",
    "solve_from_config",
    "validate_run_config",
    "MaskCoverageError",
    "SensingOperator",
    "add_noise",
    "check_gradient_bound",
    "compute_R",
    "generate_masks",
    "gray_rgb_video",
    "moving_shapes_video",
    "SciTensorError",
    "read_png_stack",
    "read_tensor",
    "write_png_stack",
    "write_tensor",
    "IterationRecord",
    "SolverTrace",
    "rof_objective",
    "total_variation",
    "tv_denoise",
    "tv_denoise_frame",
    "__version__",
]
