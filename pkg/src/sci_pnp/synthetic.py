"""Synthetic test videos: piecewise-constant scenes with moving shapes.

Values stay inside [0.1, 0.9] on purpose. Reconstruction iterates then
converge strictly inside the box, which keeps the clip step of the
denoisers inactive near the solution and makes the step-bound checks
clean.
"""

import numpy as np

__all__ = ["moving_shapes_video", "gray_rgb_video"]


def moving_shapes_video(n_x: int, n_y: int, B: int, seed: int = 0) -> np.ndarray:
    """A (B, n_x, n_y) cube: flat background, one static block, a bright
    square and a dimmer disk drifting across the frame with wrap-around.

    Deterministic in (dims, seed). Velocities are a few pixels per frame,
    so consecutive frames overlap heavily: the temporal redundancy that
    coded-exposure recovery relies on.
    """
    if n_x < 8 or n_y < 8 or B < 1:
        raise ValueError("need n_x, n_y >= 8 and B >= 1")
    rng = np.random.default_rng(seed)

    side = max(3, n_x // 5)
    radius = max(2, n_x // 7)
    sq_pos = rng.integers(0, (n_x, n_y)).astype(np.float64)
    disk_pos = rng.integers(0, (n_x, n_y)).astype(np.float64)
    sq_vel = rng.integers(1, 4, size=2).astype(np.float64)
    disk_vel = np.array([rng.integers(-3, 0), rng.integers(1, 4)], dtype=np.float64)

    rows = np.arange(n_x)[:, None]
    cols = np.arange(n_y)[None, :]
    video = np.full((B, n_x, n_y), 0.2)
    # Static block in the upper-left quadrant gives every frame some
    # structure even when the movers are elsewhere.
    video[:, 1 : max(2, n_x // 3), 1 : max(2, n_y // 3)] = 0.45

    for b in range(B):
        frame = video[b]
        r0, c0 = (sq_pos + b * sq_vel) % (n_x, n_y)
        dr = (rows - r0) % n_x
        dc = (cols - c0) % n_y
        frame[(dr < side) & (dc < side)] = 0.9

        r1, c1 = (disk_pos + b * disk_vel) % (n_x, n_y)
        dr = np.minimum((rows - r1) % n_x, (r1 - rows) % n_x)
        dc = np.minimum((cols - c1) % n_y, (c1 - cols) % n_y)
        frame[dr * dr + dc * dc <= radius * radius] = 0.7
    return video


def gray_rgb_video(n_x: int, n_y: int, B: int, seed: int = 0) -> np.ndarray:
    """A grayscale scene replicated into RGB, shape (B, n_x, n_y, 3).

    Useful for color-pipeline sanity checks: a faithful reconstruction
    must keep the three output channels (nearly) equal.
    """
    gray = moving_shapes_video(n_x, n_y, B, seed=seed)
    return np.repeat(gray[..., None], 3, axis=-1)
