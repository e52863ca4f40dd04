"""Bayer-mosaic color video pipeline.

Color snapshot cameras place an RGGB filter array in front of the sensor,
so measurement and masks are mosaics. Reconstruction splits everything
into the four parity sub-lattices (each a quarter-size grayscale problem),
solves the channels independently, re-interleaves the recovered frames,
and finally demosaics to RGB. The pattern is fixed RGGB: R at even row,
even column.
"""

from dataclasses import dataclass

import numpy as np

from .admm import AdmmConfig, admm_solve
from .gap import GapConfig, gap_solve
from .sensing import SensingOperator
from .trace import SolverTrace

__all__ = [
    "BAYER_OFFSETS",
    "bayer_split",
    "bayer_merge",
    "demosaic_bilinear",
    "demosaic_video",
    "upsample_rgb_to_mosaic",
    "ColorReconstruction",
    "color_reconstruct",
]

# Channel name -> (row offset, column offset) on the 2x2 Bayer cell.
BAYER_OFFSETS = {"r": (0, 0), "g1": (0, 1), "g2": (1, 0), "b": (1, 1)}
CHANNELS = ("r", "g1", "g2", "b")


def _check_even(a: np.ndarray) -> None:
    if a.shape[-2] % 2 or a.shape[-1] % 2:
        raise ValueError(f"Bayer data needs even spatial dims, got {a.shape[-2:]}")


def bayer_split(mosaic: np.ndarray) -> dict[str, np.ndarray]:
    """Split a mosaic frame or cube into its four half-resolution channels.

    Works on any array whose trailing two axes are spatial, so it applies
    equally to measurements (2D) and mask cubes (3D). Returns a dict keyed
    by channel name in RGGB order.
    """
    m = np.asarray(mosaic, dtype=np.float64)
    if m.ndim not in (2, 3):
        raise ValueError(f"expected a frame or cube, got ndim={m.ndim}")
    _check_even(m)
    return {c: m[..., r::2, s::2].copy() for c, (r, s) in BAYER_OFFSETS.items()}


def bayer_merge(channels: dict[str, np.ndarray]) -> np.ndarray:
    """Inverse of :func:`bayer_split`: interleave four channels into a mosaic."""
    missing = set(CHANNELS) - set(channels)
    if missing:
        raise ValueError(f"missing channels: {sorted(missing)}")
    shapes = {channels[c].shape for c in CHANNELS}
    if len(shapes) != 1:
        raise ValueError(f"channel dims differ: {sorted(shapes)}")
    first = np.asarray(channels["r"], dtype=np.float64)
    out_shape = first.shape[:-2] + (2 * first.shape[-2], 2 * first.shape[-1])
    out = np.empty(out_shape, dtype=np.float64)
    for c, (r, s) in BAYER_OFFSETS.items():
        out[..., r::2, s::2] = channels[c]
    return out


def demosaic_bilinear(mosaic: np.ndarray) -> np.ndarray:
    """Bilinear demosaicing of one RGGB frame to an (n_x, n_y, 3) RGB frame.

    Own-site samples are kept exactly; missing samples are averages of the
    nearest same-channel neighbors (2 or 4 of them). Edges replicate: the
    reflect padding below maps the out-of-range neighbor at distance 2 to
    the nearest in-range pixel of the same parity, hence the same channel.
    """
    m = np.asarray(mosaic, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2D mosaic frame, got ndim={m.ndim}")
    _check_even(m)
    p = np.pad(m, 1, mode="reflect")
    horiz = 0.5 * (p[1:-1, :-2] + p[1:-1, 2:])
    vert = 0.5 * (p[:-2, 1:-1] + p[2:, 1:-1])
    cross = 0.5 * (horiz + vert)
    diag = 0.25 * (p[:-2, :-2] + p[:-2, 2:] + p[2:, :-2] + p[2:, 2:])

    red = np.empty_like(m)
    red[0::2, 0::2] = m[0::2, 0::2]
    red[0::2, 1::2] = horiz[0::2, 1::2]
    red[1::2, 0::2] = vert[1::2, 0::2]
    red[1::2, 1::2] = diag[1::2, 1::2]

    blue = np.empty_like(m)
    blue[1::2, 1::2] = m[1::2, 1::2]
    blue[1::2, 0::2] = horiz[1::2, 0::2]
    blue[0::2, 1::2] = vert[0::2, 1::2]
    blue[0::2, 0::2] = diag[0::2, 0::2]

    green = m.copy()
    green[0::2, 0::2] = cross[0::2, 0::2]
    green[1::2, 1::2] = cross[1::2, 1::2]

    return np.stack([red, green, blue], axis=-1)


def demosaic_video(mosaic_cube: np.ndarray) -> np.ndarray:
    """Demosaic every frame of a cube; returns (B, n_x, n_y, 3)."""
    m = np.asarray(mosaic_cube, dtype=np.float64)
    if m.ndim != 3:
        raise ValueError(f"expected a cube, got ndim={m.ndim}")
    return np.stack([demosaic_bilinear(frame) for frame in m])


def upsample_rgb_to_mosaic(rgb: np.ndarray) -> np.ndarray:
    """Spread RGB pixels onto a 2x-resolution RGGB mosaic (G duplicated).

    This is how ordinary RGB video is turned into Bayer ground truth for
    simulation: each source pixel becomes one 2x2 cell, so the mosaic is
    exactly split-consistent (all four channels are plain sub-lattices of
    resolution equal to the source). Accepts a frame (n_x, n_y, 3) or a
    video (B, n_x, n_y, 3).
    """
    a = np.asarray(rgb, dtype=np.float64)
    if a.ndim not in (3, 4) or a.shape[-1] != 3:
        raise ValueError(f"expected RGB data with a trailing channel axis of 3, got {a.shape}")
    out_shape = a.shape[:-3] + (2 * a.shape[-3], 2 * a.shape[-2])
    out = np.empty(out_shape, dtype=np.float64)
    out[..., 0::2, 0::2] = a[..., 0]
    out[..., 0::2, 1::2] = a[..., 1]
    out[..., 1::2, 0::2] = a[..., 1]
    out[..., 1::2, 1::2] = a[..., 2]
    return out


@dataclass
class ColorReconstruction:
    """Output of :func:`color_reconstruct`.

    ``rgb`` is the demosaiced video (B, n_x, n_y, 3); ``mosaic`` the
    re-interleaved pre-demosaic video, on which quality metrics should be
    computed; ``channels`` the four recovered quarter-size cubes and
    ``traces`` their solver traces.
    """

    rgb: np.ndarray
    mosaic: np.ndarray
    channels: dict[str, np.ndarray]
    traces: dict[str, SolverTrace]


def color_reconstruct(
    measurement: np.ndarray,
    masks: np.ndarray,
    cfg: GapConfig | AdmmConfig,
    ground_truth_mosaic: np.ndarray | None = None,
) -> ColorReconstruction:
    """Reconstruct a Bayer snapshot by solving the four channels independently.

    The solver is chosen by the config type. The channel problems share
    nothing, so their solve order is irrelevant; errors are re-raised
    tagged with the channel name. ``ground_truth_mosaic`` (a full-resolution
    cube) enables per-channel PSNR traces.
    """
    measurement = np.asarray(measurement, dtype=np.float64)
    masks = np.asarray(masks, dtype=np.float64)
    if measurement.ndim != 2:
        raise ValueError("measurement must be a 2D mosaic frame")
    if masks.ndim != 3:
        raise ValueError("masks must be a cube")
    if masks.shape[1:] != measurement.shape:
        raise ValueError(f"mask dims {masks.shape[1:]} do not match measurement {measurement.shape}")
    if isinstance(cfg, GapConfig):
        solve = gap_solve
    elif isinstance(cfg, AdmmConfig):
        solve = admm_solve
    else:
        raise TypeError(f"cfg must be GapConfig or AdmmConfig, got {type(cfg).__name__}")

    y_parts = bayer_split(measurement)
    mask_parts = bayer_split(masks)
    truth_parts = bayer_split(ground_truth_mosaic) if ground_truth_mosaic is not None else None

    channels: dict[str, np.ndarray] = {}
    traces: dict[str, SolverTrace] = {}
    for name in CHANNELS:
        try:
            op = SensingOperator(mask_parts[name])
            truth = truth_parts[name] if truth_parts is not None else None
            channels[name], traces[name] = solve(op, y_parts[name], cfg, ground_truth=truth)
        except Exception as exc:
            raise RuntimeError(f"channel {name!r} failed: {exc}") from exc

    mosaic = bayer_merge(channels)
    return ColorReconstruction(
        rgb=demosaic_video(mosaic),
        mosaic=mosaic,
        channels=channels,
        traces=traces,
    )
