"""Video cubes, frames and the flat-vector convention tying them together.

A video cube is a numpy array of shape ``(B, n_x, n_y)`` holding ``B``
frames of ``n_x`` rows by ``n_y`` columns; a frame is a 2D array of shape
``(n_x, n_y)``. The flat (vectorized) layout stacks the row-major frames in
frame order, so frame ``b`` occupies the contiguous block
``flat[b*n:(b+1)*n]`` with ``n = n_x*n_y``.

All solver state is kept in float64; pixel values are normalized to [0, 1].
"""

import numpy as np

__all__ = [
    "vectorize",
    "devectorize",
    "as_cube",
    "as_frame",
    "check_finite",
]


def as_cube(a) -> np.ndarray:
    """Coerce to a float64 (B, n_x, n_y) cube, validating rank and finiteness."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"expected a (B, n_x, n_y) cube, got shape {a.shape}")
    check_finite(a)
    return a


def as_frame(a) -> np.ndarray:
    """Coerce to a float64 (n_x, n_y) frame, validating rank and finiteness."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a (n_x, n_y) frame, got shape {a.shape}")
    check_finite(a)
    return a


def check_finite(a: np.ndarray) -> None:
    """Raise if the array contains NaN or Inf."""
    if not np.isfinite(a).all():
        raise ValueError("array contains non-finite values")


def vectorize(cube: np.ndarray) -> np.ndarray:
    """Flatten a (B, n_x, n_y) cube to a length n_x*n_y*B vector.

    Frame b's row-major flattening lands at ``flat[b*n:(b+1)*n]``.
    """
    cube = as_cube(cube)
    return np.ascontiguousarray(cube).reshape(-1)


def devectorize(flat: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`vectorize`. ``dims`` is (n_x, n_y, B)."""
    n_x, n_y, B = dims
    if n_x <= 0 or n_y <= 0 or B <= 0:
        raise ValueError(f"dims must be positive, got {dims}")
    flat = np.asarray(flat, dtype=np.float64).reshape(-1)
    if flat.size != n_x * n_y * B:
        raise ValueError(
            f"flat vector has {flat.size} elements, dims {dims} require {n_x * n_y * B}"
        )
    return flat.reshape(B, n_x, n_y).copy()
