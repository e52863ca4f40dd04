"""Independent reference implementations used only by the tests.

Everything here is deliberately naive: dense matrices, exhaustive grid
search, and per-window loops. The point is to check the fast matrix-free
library code against implementations whose correctness is obvious.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def dense_H(masks: np.ndarray) -> np.ndarray:
    """The full sensing matrix, shape (n, n*B): B diagonal blocks side by
    side, block b = diag(masks[b] flattened row-major)."""
    B, n_x, n_y = masks.shape
    n = n_x * n_y
    H = np.zeros((n, n * B))
    for b in range(B):
        H[:, b * n : (b + 1) * n] = np.diag(masks[b].reshape(-1))
    return H


def flatten_cube(cube: np.ndarray) -> np.ndarray:
    return cube.reshape(-1)  # (B, n_x, n_y) C-order == frame-major row-major


def unflatten_cube(flat: np.ndarray, shape: tuple) -> np.ndarray:
    return flat.reshape(shape)


def dense_gap_project(masks: np.ndarray, v: np.ndarray, y: np.ndarray) -> np.ndarray:
    """x = v + H^T (H H^T)^{-1} (y - H v) via explicit dense solve."""
    H = dense_H(masks)
    v_flat = flatten_cube(v)
    resid = y.reshape(-1) - H @ v_flat
    x_flat = v_flat + H.T @ np.linalg.solve(H @ H.T, resid)
    return unflatten_cube(x_flat, v.shape)


def dense_admm_x_update(masks: np.ndarray, y: np.ndarray, theta: np.ndarray, rho: float) -> np.ndarray:
    """x = (H^T H + rho I)^{-1} (H^T y + rho theta) via explicit dense solve."""
    H = dense_H(masks)
    nB = H.shape[1]
    A = H.T @ H + rho * np.eye(nB)
    b = H.T @ y.reshape(-1) + rho * flatten_cube(theta)
    return unflatten_cube(np.linalg.solve(A, b), theta.shape)


def rof_objective_ref(u: np.ndarray, f: np.ndarray, tau: float) -> float:
    """Quadratic fidelity plus anisotropic TV, written out longhand."""
    u = np.asarray(u, dtype=np.float64)
    total = 0.5 * np.sum((u - f) ** 2)
    n_x, n_y = u.shape
    for i in range(n_x - 1):
        for j in range(n_y):
            total += tau * abs(u[i + 1, j] - u[i, j])
    for i in range(n_x):
        for j in range(n_y - 1):
            total += tau * abs(u[i, j + 1] - u[i, j])
    return float(total)


def grid_search_rof_2pix(f: np.ndarray, tau: float, steps: int = 2001) -> np.ndarray:
    """Exhaustive minimizer of the ROF objective for a 1x2 frame over a
    [0,1]^2 grid (the minimizer lies in [min f, max f] by convexity)."""
    grid = np.linspace(0.0, 1.0, steps)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    obj = 0.5 * ((a - f[0, 0]) ** 2 + (b - f[0, 1]) ** 2) + tau * np.abs(b - a)
    idx = np.unravel_index(np.argmin(obj), obj.shape)
    return np.array([[grid[idx[0]], grid[idx[1]]]])


def naive_ssim(ref: np.ndarray, test: np.ndarray) -> float:
    """SSIM by explicit weighted statistics over every 11x11 window."""
    radius, sigma_w = 5, 1.5
    coords = np.arange(-radius, radius + 1, dtype=np.float64)
    w1d = np.exp(-(coords**2) / (2.0 * sigma_w**2))
    w1d = w1d / w1d.sum()
    w = np.outer(w1d, w1d)  # separable Gaussian, sums to 1

    wins_r = sliding_window_view(ref, (11, 11))
    wins_t = sliding_window_view(test, (11, 11))
    mu_r = np.einsum("ijkl,kl->ij", wins_r, w)
    mu_t = np.einsum("ijkl,kl->ij", wins_t, w)
    var_r = np.einsum("ijkl,kl->ij", wins_r**2, w) - mu_r**2
    var_t = np.einsum("ijkl,kl->ij", wins_t**2, w) - mu_t**2
    cov = np.einsum("ijkl,kl->ij", wins_r * wins_t, w) - mu_r * mu_t

    c1, c2 = 0.01**2, 0.03**2
    smap = ((2 * mu_r * mu_t + c1) * (2 * cov + c2)) / ((mu_r**2 + mu_t**2 + c1) * (var_r + var_t + c2))
    return float(smap.mean())


def random_instance(rng: np.random.Generator, n_x: int, n_y: int, B: int, ensure_coverage: bool = True):
    """A random binary mask cube (with coverage), cube, and measurement.

    Coverage is enforced by redrawing only the uncovered pixel columns
    (rejection over whole cubes would practically never terminate for
    small B: a pixel is uncovered with probability 2^-B).
    """
    masks = (rng.random((B, n_x, n_y)) < 0.5).astype(np.float64)
    if ensure_coverage:
        uncovered = masks.sum(axis=0) == 0
        while uncovered.any():
            masks[:, uncovered] = (rng.random((B, int(uncovered.sum()))) < 0.5).astype(np.float64)
            uncovered = masks.sum(axis=0) == 0
    truth = rng.random((B, n_x, n_y))
    y = np.einsum("bij,bij->ij", masks, truth)
    return masks, truth, y
