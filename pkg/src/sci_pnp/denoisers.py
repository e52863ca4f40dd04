"""Bounded denoisers and per-iteration denoiser schedules.

A denoiser maps a video cube and a noise level sigma to a cleaned cube of
the same shape, with inputs and outputs clipped to [0, 1]. A denoiser is
*bounded with constant C* when

    (1 / (n*B)) * ||D(x) - x||^2  <=  sigma^2 * C

for every cube x with values in [0, 1], where n*B is the number of voxels.
The constant feeds the per-iteration step bound of the plug-and-play
solvers, so each built-in denoiser declares a provable (not merely
empirical) C where one is known.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .cube import as_cube
from .tv import tv_denoise_frame

__all__ = [
    "Denoiser",
    "IdentityDenoiser",
    "ClipDenoiser",
    "GaussianDenoiser",
    "TVDenoiser",
    "DenoiserSchedule",
    "ScheduleEntry",
    "make_denoiser",
    "verify_bounded",
]


class Denoiser:
    """Base class. Subclasses implement ``_denoise_frame`` or ``_denoise_cube``.

    Attributes
    ----------
    name : str
        Short identifier, used in configs and benchmark tables.
    bound_constant : float or None
        Declared bound constant C, or None when no provable constant is
        available.
    framewise : bool
        True when the denoiser acts on each frame independently.
    """

    name = "base"
    bound_constant: float | None = None
    framewise = True

    def denoise(self, cube: np.ndarray, sigma: float) -> np.ndarray:
        if sigma < 0:
            raise ValueError("sigma must be non-negative")
        x = np.clip(as_cube(cube), 0.0, 1.0)
        if self.framewise:
            out = np.stack([self._denoise_frame(frame, sigma) for frame in x])
        else:
            out = self._denoise_cube(x, sigma)
        if out.shape != x.shape:
            raise ValueError(f"denoiser {self.name!r} changed shape {x.shape} -> {out.shape}")
        return np.clip(out, 0.0, 1.0)

    def _denoise_frame(self, frame: np.ndarray, sigma: float) -> np.ndarray:
        raise NotImplementedError

    def _denoise_cube(self, cube: np.ndarray, sigma: float) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


class IdentityDenoiser(Denoiser):
    """Returns the input unchanged. Bounded with C = 0."""

    name = "identity"
    bound_constant = 0.0

    def _denoise_frame(self, frame, sigma):
        return frame


class ClipDenoiser(Denoiser):
    """Clips to [0, 1] and nothing else. On in-range inputs this is the
    identity, so C = 0."""

    name = "clip"
    bound_constant = 0.0

    def _denoise_frame(self, frame, sigma):
        return np.clip(frame, 0.0, 1.0)


class GaussianDenoiser(Denoiser):
    """Framewise Gaussian blur with spatial std = sigma * scale.

    The filter radius is int(4*std + 0.5), so for std < 1/8 the kernel is a
    single tap and the output equals the input. Combined with the [0, 1]
    range this yields the provable constant C = (8 * scale)^2: either the
    blur is the identity, or sigma >= 1/(8*scale) and the mean squared
    change is at most 1 <= sigma^2 * 64 * scale^2.
    """

    name = "gaussian"

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        self.bound_constant = 64.0 * self.scale * self.scale

    def _denoise_frame(self, frame, sigma):
        return gaussian_filter(frame, sigma * self.scale, mode="reflect")


class TVDenoiser(Denoiser):
    """Framewise anisotropic TV denoising with tau = sigma^2 * weight.

    Bounded with C = 4 * weight: the inner loop never increases the
    objective, so 0.5*||u - f||^2 <= tau*TV(f), and TV(f) < 2n for any
    frame with values in [0, 1].
    """

    name = "tv"

    def __init__(self, weight: float = 1.0, inner_iters: int = 5):
        if weight <= 0:
            raise ValueError("weight must be positive")
        if inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")
        self.weight = float(weight)
        self.inner_iters = int(inner_iters)
        self.bound_constant = 4.0 * self.weight

    def _denoise_frame(self, frame, sigma):
        return tv_denoise_frame(frame, sigma * sigma * self.weight, self.inner_iters)


@dataclass(frozen=True)
class ScheduleEntry:
    denoiser: Denoiser
    iterations: int

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("schedule entry needs iterations >= 1")


class DenoiserSchedule:
    """Ordered stages of (denoiser, iteration count).

    Iteration k (0-based) uses the denoiser of the stage covering k; past
    the end, the last stage applies. This supports the common warm-up
    pattern of a cheap smoother for the first iterations followed by a
    stronger prior.
    """

    def __init__(self, entries: list[ScheduleEntry]):
        if not entries:
            raise ValueError("schedule needs at least one entry")
        self.entries = list(entries)

    @classmethod
    def single(cls, denoiser: Denoiser, iterations: int) -> "DenoiserSchedule":
        return cls([ScheduleEntry(denoiser, iterations)])

    @property
    def total_iterations(self) -> int:
        return sum(e.iterations for e in self.entries)

    def denoiser_at(self, k: int) -> Denoiser:
        if k < 0:
            raise ValueError("iteration index must be >= 0")
        upto = 0
        for entry in self.entries:
            upto += entry.iterations
            if k < upto:
                return entry.denoiser
        return self.entries[-1].denoiser

    def names(self) -> str:
        seen: list[str] = []
        for entry in self.entries:
            if not seen or seen[-1] != entry.denoiser.name:
                seen.append(entry.denoiser.name)
        return "+".join(seen)


_REGISTRY = {
    "identity": (IdentityDenoiser, ()),
    "clip": (ClipDenoiser, ()),
    "gaussian": (GaussianDenoiser, ("scale",)),
    "tv": (TVDenoiser, ("weight", "inner_iters")),
}


def make_denoiser(name: str, params: dict | None = None) -> Denoiser:
    """Construct a registered denoiser by name, rejecting unknown params."""
    if name not in _REGISTRY:
        raise ValueError(f"unknown denoiser {name!r}; known: {sorted(_REGISTRY)}")
    cls, allowed = _REGISTRY[name]
    params = dict(params or {})
    unknown = set(params) - set(allowed)
    if unknown:
        raise ValueError(f"denoiser {name!r} got unknown params {sorted(unknown)}")
    return cls(**params)


def verify_bounded(
    denoiser: Denoiser,
    sigma_list: list[float],
    trials: int = 20,
    seed: int = 0,
    dims: tuple[int, int, int] = (16, 16, 4),
) -> float:
    """Empirically estimate the bound constant of a denoiser.

    Draws ``trials`` random cubes with values in [0, 1] per sigma and
    returns the largest observed ratio ||D(x) - x||^2 / (n*B*sigma^2).
    When the denoiser declares a constant, the estimate must not exceed
    it; otherwise a ValueError is raised.
    """
    n_x, n_y, B = dims
    rng = np.random.default_rng(seed)
    worst = 0.0
    for sigma in sigma_list:
        if sigma <= 0:
            raise ValueError("sigma_list entries must be positive")
        for _ in range(trials):
            x = rng.random((B, n_x, n_y))
            d = denoiser.denoise(x, sigma) - x
            ratio = float((d * d).sum()) / (x.size * sigma * sigma)
            worst = max(worst, ratio)
    declared = denoiser.bound_constant
    if declared is not None and worst > declared * (1.0 + 1e-12) + 1e-15:
        raise ValueError(
            f"denoiser {denoiser.name!r} exceeded its declared bound: "
            f"estimate {worst:.6g} > declared {declared:.6g}"
        )
    return worst
