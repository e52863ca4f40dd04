"""Plug-and-play ADMM reconstruction with a matrix-free x-update.

The splitting alternates (a) an exact quadratic x-update, (b) a denoiser
acting as the prior's proximal map at level sigma_k = sqrt(lambda/rho_k),
and (c) a dual ascent step. Because H H^T is diagonal for coded exposures,
the x-update solves (H^T H + rho I) x = H^T y + rho theta in closed form
via one forward and one adjoint pass.

The penalty grows as rho_{k+1} = gamma * rho_k with gamma >= 1, so sigma_k
is non-increasing. Internally the dual is kept in scaled form ubar = u/rho
(stable under growing rho); the textbook unscaled updates

    v   <- D_sigma(x + u/rho),   u <- u + rho (x - v)

become v <- D_sigma(x + ubar), ubar <- (ubar + x - v) / gamma after the
rho growth, and the unscaled dual is recovered as u = rho * ubar.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .cube import as_cube, as_frame
from .denoisers import DenoiserSchedule
from .gap import DEFAULT_SIGMA_FLOOR, _initial_estimate
from .metrics import mean_psnr
from .sensing import SensingOperator
from .trace import IterationRecord, SolverTrace

__all__ = ["AdmmConfig", "admm_x_update", "admm_solve", "fixed_point_residuals"]


@dataclass(frozen=True, eq=False)
class AdmmConfig:
    """Settings for :func:`admm_solve`.

    ``lam`` is the prior weight (sigma_k = sqrt(lam/rho_k)); ``gamma`` the
    per-iteration growth factor of rho. Initialization options match
    :class:`~sci_pnp.gap.GapConfig`.
    """

    schedule: DenoiserSchedule
    rho0: float = 1.0
    gamma: float = 1.05
    lam: float = 1.0
    max_iters: int | None = None
    init_mode: str = "adjoint_scaled"
    init: np.ndarray | None = field(default=None, repr=False)
    sigma_floor: float | None = DEFAULT_SIGMA_FLOOR

    def __post_init__(self):
        if self.rho0 <= 0:
            raise ValueError("rho0 must be positive")
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.init_mode not in ("adjoint_scaled", "zeros", "provided"):
            raise ValueError("init_mode must be 'adjoint_scaled', 'zeros' or 'provided'")
        if self.init_mode == "provided" and self.init is None:
            raise ValueError("init_mode 'provided' requires init")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.sigma_floor is not None and self.sigma_floor < 0:
            raise ValueError("sigma_floor must be non-negative")

    @property
    def iterations(self) -> int:
        return self.max_iters if self.max_iters is not None else self.schedule.total_iterations


def admm_x_update(op: SensingOperator, y: np.ndarray, theta: np.ndarray, rho: float) -> np.ndarray:
    """Exact minimizer of 0.5*||y - Hx||^2 + (rho/2)*||x - theta||^2.

    Equal to (H^T H + rho I)^{-1} (H^T y + rho theta), evaluated without
    forming matrices: x = theta + H^T ((y - H theta) / (rho + R)). Valid
    for any rho > 0; zero-coverage pixels are fine here.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    theta = as_cube(theta)
    y = as_frame(y)
    residual = (y - op.forward(theta)) / (rho + op.R)
    return theta + op.adjoint(residual)


def admm_solve(
    op: SensingOperator,
    y: np.ndarray,
    cfg: AdmmConfig,
    ground_truth: np.ndarray | None = None,
) -> tuple[np.ndarray, SolverTrace]:
    """Run the three-step splitting; returns (x, trace).

    Unlike the projection solver, the x-update balances data fidelity
    against the prior through rho, so this is the solver of choice for
    noisy measurements. The trace records the primal residual ||x - v||
    and successive-iterate distances for x, v and the unscaled dual u.
    """
    y = as_frame(y)
    if y.shape != op.frame_shape:
        raise ValueError(f"measurement shape {y.shape} does not match masks {op.frame_shape}")
    if ground_truth is not None:
        ground_truth = as_cube(ground_truth)

    v = _initial_estimate(op, y, cfg)
    ubar = np.zeros_like(v)
    rho = cfg.rho0
    x_prev = v
    v_prev = v
    u_prev = np.zeros_like(v)
    scale = np.sqrt(v.size)
    y_norm = max(float(np.linalg.norm(y)), np.finfo(np.float64).tiny)

    trace = SolverTrace(solver="admm")
    started = time.perf_counter()
    x = x_prev
    for k in range(1, cfg.iterations + 1):
        x = admm_x_update(op, y, v - ubar, rho)

        sigma = float(np.sqrt(cfg.lam / rho))
        if cfg.sigma_floor is not None:
            sigma = max(sigma, cfg.sigma_floor)
        try:
            v_new = cfg.schedule.denoiser_at(k - 1).denoise(x + ubar, sigma)
        except Exception as exc:
            raise RuntimeError(f"denoiser failed at iteration {k}: {exc}") from exc
        ubar = ubar + x - v_new
        u_unscaled = rho * ubar

        step_x = float(np.linalg.norm(x - x_prev))
        step_v = float(np.linalg.norm(v_new - v_prev))
        trace.append(
            IterationRecord(
                k=k,
                reg=rho,
                sigma=sigma,
                delta=(step_x + step_v) / scale,
                feasibility=float(np.linalg.norm(op.forward(x) - y)) / y_norm,
                step_x=step_x,
                step_v=step_v,
                step_u=float(np.linalg.norm(u_unscaled - u_prev)),
                primal_residual=float(np.linalg.norm(x - v_new)),
                psnr=mean_psnr(ground_truth, x) if ground_truth is not None else float("nan"),
            )
        )

        # Keep the unscaled dual continuous across the rho change:
        # u = rho*ubar = (gamma*rho)*(ubar/gamma).
        ubar = ubar / cfg.gamma
        rho *= cfg.gamma
        x_prev, v_prev, v, u_prev = x, v_new, v_new, u_unscaled

    trace.wall_time_s = time.perf_counter() - started
    return x, trace


def fixed_point_residuals(trace: SolverTrace, tail_fraction: float = 0.1) -> tuple[float, float, float]:
    """Largest successive-iterate distances over the trailing iterations.

    Returns (max step_x, max step_v, max step_u) over the last
    ``tail_fraction`` of the trace (at least one record). Small tail
    residuals are the observable signature of fixed-point convergence.
    """
    if len(trace) < 10:
        raise ValueError("trace too short for tail statistics (need >= 10 iterations)")
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    count = max(1, int(len(trace) * tail_fraction))
    tail = trace.records[-count:]
    return (
        max(r.step_x for r in tail),
        max(r.step_v for r in tail),
        max(r.step_u for r in tail),
    )
