"""Per-iteration solver diagnostics."""

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = ["IterationRecord", "SolverTrace"]


@dataclass(frozen=True)
class IterationRecord:
    """One solver iteration.

    ``reg`` is the active regularization parameter: lambda_k for the
    projection solver, rho_k for the augmented-Lagrangian solver. ``delta``
    is the normalized combined step (||x_k - x_{k-1}|| + ||v_k - v_{k-1}||)
    / sqrt(n*B). ``feasibility`` is ||H x_k - y|| / ||y||. ``psnr`` is
    against the ground truth when one was supplied, else NaN.
    """

    k: int
    reg: float
    sigma: float
    delta: float
    feasibility: float
    step_x: float
    step_v: float
    step_u: float
    primal_residual: float
    psnr: float


@dataclass
class SolverTrace:
    solver: str
    records: list[IterationRecord] = field(default_factory=list)
    wall_time_s: float = 0.0

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    @property
    def final_psnr(self) -> float:
        if not self.records:
            return float("nan")
        return self.records[-1].psnr

    def write_csv(self, path) -> None:
        """Write one row per iteration.

        The ``lambda`` column holds the active regularization parameter
        and ``step_norm`` the un-normalized ||x_k - x_{k-1}||.
        """
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "lambda", "sigma", "delta", "feasibility", "step_norm", "psnr"])
            for r in self.records:
                writer.writerow(
                    [
                        r.k,
                        f"{r.reg:.17g}",
                        f"{r.sigma:.17g}",
                        f"{r.delta:.17g}",
                        f"{r.feasibility:.17g}",
                        f"{r.step_x:.17g}",
                        f"{r.psnr:.17g}",
                    ]
                )
