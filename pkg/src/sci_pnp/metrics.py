"""Reconstruction quality metrics: PSNR and SSIM on [0, 1] frames."""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .cube import as_cube, as_frame

__all__ = ["psnr", "ssim", "mean_psnr", "mean_ssim", "QualityReport", "evaluate"]

_PSNR_CAP = 100.0
_SSIM_RADIUS = 5  # 11x11 window
_SSIM_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03


def psnr(reference: np.ndarray, test: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, capped at 100 (exact match -> 100)."""
    ref = np.asarray(reference, dtype=np.float64)
    tst = np.asarray(test, dtype=np.float64)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = float(np.mean((ref - tst) ** 2))
    if mse == 0.0:
        return _PSNR_CAP
    return min(10.0 * np.log10(peak * peak / mse), _PSNR_CAP)


def _window() -> np.ndarray:
    x = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=np.float64)
    w = np.exp(-0.5 * (x / _SSIM_SIGMA) ** 2)
    return w / w.sum()


def _filter_valid(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Separable windowed mean; only keep outputs whose window lies fully
    # inside the frame, so the boundary extension mode is irrelevant.
    out = correlate1d(correlate1d(a, w, axis=0, mode="constant"), w, axis=1, mode="constant")
    r = _SSIM_RADIUS
    return out[r:-r, r:-r]


def ssim(reference: np.ndarray, test: np.ndarray, peak: float = 1.0) -> float:
    """Mean structural similarity over all fully-interior 11x11 windows.

    Uses a Gaussian window (std 1.5) and the standard stabilization
    constants C1 = (0.01*peak)^2, C2 = (0.03*peak)^2.
    """
    ref = as_frame(reference)
    tst = as_frame(test)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    size = 2 * _SSIM_RADIUS + 1
    if min(ref.shape) < size:
        raise ValueError(f"frame smaller than the {size}x{size} SSIM window: {ref.shape}")
    w = _window()
    mu1 = _filter_valid(ref, w)
    mu2 = _filter_valid(tst, w)
    s11 = _filter_valid(ref * ref, w) - mu1 * mu1
    s22 = _filter_valid(tst * tst, w) - mu2 * mu2
    s12 = _filter_valid(ref * tst, w) - mu1 * mu2
    c1 = (_K1 * peak) ** 2
    c2 = (_K2 * peak) ** 2
    num = (2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


def mean_psnr(reference: np.ndarray, test: np.ndarray) -> float:
    """Average per-frame PSNR (dB averaging) over two cubes."""
    ref = as_cube(reference)
    tst = as_cube(test)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    return float(np.mean([psnr(r, t) for r, t in zip(ref, tst)]))


def mean_ssim(reference: np.ndarray, test: np.ndarray) -> float:
    """Average per-frame SSIM over two cubes."""
    ref = as_cube(reference)
    tst = as_cube(test)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    return float(np.mean([ssim(r, t) for r, t in zip(ref, tst)]))


@dataclass(frozen=True)
class QualityReport:
    per_frame_psnr: tuple[float, ...]
    per_frame_ssim: tuple[float, ...]
    mean_psnr: float
    mean_ssim: float
    runtime_seconds: float


def evaluate(reference: np.ndarray, test: np.ndarray, runtime_seconds: float = 0.0) -> QualityReport:
    """Per-frame and mean PSNR/SSIM of a reconstruction against its truth."""
    ref = as_cube(reference)
    tst = as_cube(test)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    ps = tuple(psnr(r, t) for r, t in zip(ref, tst))
    ss = tuple(ssim(r, t) for r, t in zip(ref, tst))
    return QualityReport(
        per_frame_psnr=ps,
        per_frame_ssim=ss,
        mean_psnr=float(np.mean(ps)),
        mean_ssim=float(np.mean(ss)),
        runtime_seconds=float(runtime_seconds),
    )
