"""Mask generation and the matrix-free coded-exposure sensing operator.

The forward model collapses a B-frame cube into a single measurement frame:
each frame is multiplied elementwise by its mask and the products are summed
over frames. The corresponding stacked matrix is a row of diagonal blocks,
one per frame, so the Gram matrix of the operator (forward then adjoint) is
diagonal with entries ``R_j = sum_b mask_b(j)^2``. Everything here works
directly on the mask cube; no matrix is ever materialized.
"""

import numpy as np

from .cube import as_cube, as_frame

__all__ = [
    "MaskCoverageError",
    "generate_masks",
    "compute_R",
    "SensingOperator",
    "check_gradient_bound",
    "add_noise",
]


class MaskCoverageError(ValueError):
    """Some pixel is never sampled: its mask values are zero in all frames."""


def _redraw(rng: np.random.Generator, kind: str, p1: float, shape) -> np.ndarray:
    if kind == "gaussian":
        return np.clip(rng.standard_normal(shape), 0.0, 1.0)
    return (rng.random(shape) < p1).astype(np.float64)


def generate_masks(
    n_x: int,
    n_y: int,
    B: int,
    kind: str = "bernoulli",
    *,
    p1: float = 0.5,
    seed: int = 0,
    base_mask: np.ndarray | None = None,
    shift: int = 1,
) -> np.ndarray:
    """Generate a (B, n_x, n_y) mask cube, deterministic for a given seed.

    Kinds:
      - ``bernoulli``: i.i.d. binary masks, each entry 1 with probability p1.
      - ``shifted``: one binary base mask shifted vertically by ``shift`` rows
        per frame (the base must be at least B*shift rows taller than the
        frame; generated from p1/seed when not supplied).
      - ``gaussian``: standard normal draws clipped to [0, 1]; intended for
        bound checks, not as a hardware model.

    Pixel columns left all-zero across frames are redrawn until every pixel
    is sampled by at least one frame.
    """
    if n_x <= 0 or n_y <= 0 or B <= 0:
        raise ValueError("n_x, n_y, B must be positive")
    if not 0.0 < p1 < 1.0:
        raise ValueError(f"p1 must lie in (0, 1), got {p1}")
    rng = np.random.default_rng(seed)

    if kind == "bernoulli":
        cube = (rng.random((B, n_x, n_y)) < p1).astype(np.float64)
    elif kind == "gaussian":
        cube = np.clip(rng.standard_normal((B, n_x, n_y)), 0.0, 1.0)
    elif kind == "shifted":
        if shift < 0:
            raise ValueError("shift must be non-negative")
        if base_mask is None:
            base_mask = (rng.random((n_x + B * shift, n_y)) < p1).astype(np.float64)
        else:
            base_mask = as_frame(base_mask)
        need_rows = n_x + (B - 1) * shift
        if base_mask.shape[0] < need_rows or base_mask.shape[1] < n_y:
            raise ValueError(
                f"base mask {base_mask.shape} too small for {B} frames of "
                f"({n_x}, {n_y}) at shift {shift}; need at least ({need_rows}, {n_y})"
            )
        cube = np.stack(
            [base_mask[b * shift : b * shift + n_x, :n_y] for b in range(B)]
        ).astype(np.float64)
    else:
        raise ValueError(f"unknown mask kind {kind!r}")

    # Every pixel must be sampled by at least one frame; redraw offenders
    # (seeded, so still deterministic).
    covered = (cube != 0).any(axis=0)
    while not covered.all():
        bad = ~covered
        cube[:, bad] = _redraw(rng, kind, p1, (B, int(bad.sum())))
        covered[bad] = (cube[:, bad] != 0).any(axis=0)
    return cube


def compute_R(masks: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Per-pixel sum of squared mask values across frames: the diagonal Gram.

    Returns ``(R, R_max, R_min)``; raises :class:`MaskCoverageError` when
    some pixel has ``R_j = 0``.
    """
    masks = as_cube(masks)
    R = np.einsum("bij,bij->ij", masks, masks)
    r_min = float(R.min())
    r_max = float(R.max())
    if r_min <= 0.0:
        raise MaskCoverageError(
            "mask cube leaves some pixel unsampled (zero across all frames)"
        )
    return R, r_max, r_min


class SensingOperator:
    """Matrix-free coded-exposure operator backed by a mask cube.

    Immutable after construction; ``forward``/``adjoint`` are pure. The
    masks must be normalized to [0, 1] and must sample every pixel in at
    least one frame.
    """

    def __init__(self, masks: np.ndarray):
        masks = as_cube(masks)
        if masks.min() < 0.0 or masks.max() > 1.0:
            raise ValueError("masks must be normalized to [0, 1]")
        self.masks = masks
        self.masks.setflags(write=False)
        self.R, self.R_max, self.R_min = compute_R(masks)
        self.R.setflags(write=False)

    @property
    def B(self) -> int:
        return self.masks.shape[0]

    @property
    def frame_shape(self) -> tuple[int, int]:
        return self.masks.shape[1:]

    @property
    def dims(self) -> tuple[int, int, int]:
        """(n_x, n_y, B)"""
        B, n_x, n_y = self.masks.shape
        return n_x, n_y, B

    def _check_cube(self, x: np.ndarray) -> np.ndarray:
        x = as_cube(x)
        if x.shape != self.masks.shape:
            raise ValueError(f"cube shape {x.shape} != mask shape {self.masks.shape}")
        return x

    def _check_frame(self, y: np.ndarray) -> np.ndarray:
        y = as_frame(y)
        if y.shape != self.frame_shape:
            raise ValueError(f"frame shape {y.shape} != mask frame {self.frame_shape}")
        return y

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Measurement frame: sum over frames of mask * frame."""
        x = self._check_cube(x)
        return np.einsum("bij,bij->ij", self.masks, x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """Back-projection: frame b of the result is mask_b * y."""
        y = self._check_frame(y)
        return self.masks * y[None, :, :]


def check_gradient_bound(op: SensingOperator, x: np.ndarray) -> bool:
    """Whether ||adjoint(forward(x))|| <= B * ||x||.

    Holds for every mask cube normalized to [0, 1]; exposed as a test hook.
    """
    lhs = float(np.linalg.norm(op.adjoint(op.forward(x))))
    rhs = op.B * float(np.linalg.norm(x))
    return lhs <= rhs * (1.0 + 1e-12)


def add_noise(y: np.ndarray, sigma_noise: float, seed: int = 0) -> np.ndarray:
    """Add per-pixel Gaussian noise of standard deviation sigma_noise."""
    y = as_frame(y)
    if sigma_noise < 0:
        raise ValueError("sigma_noise must be non-negative")
    rng = np.random.default_rng(seed)
    return y + sigma_noise * rng.standard_normal(y.shape)
