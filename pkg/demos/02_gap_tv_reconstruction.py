"""
Recovering the video with projection + total variation
======================================================

The reconstruction alternates two cheap steps: project the current guess
onto the set of cubes consistent with the snapshot (exact, because the
measurement Gram matrix is diagonal), then denoise at a noise level that
decays over the iterations. Here the denoiser is total variation, the
classic choice when nothing is known about the scene.
"""

from pathlib import Path

import numpy as np

from sci_pnp import (
    DenoiserSchedule,
    GapConfig,
    SensingOperator,
    TVDenoiser,
    evaluate,
    gap_solve,
    generate_masks,
    mean_psnr,
    moving_shapes_video,
)

out = Path(__file__).parent / "out" / "gap_tv"
out.mkdir(parents=True, exist_ok=True)

truth = moving_shapes_video(64, 64, 8, seed=3)
masks = generate_masks(64, 64, 8, kind="bernoulli", p1=0.5, seed=0)
op = SensingOperator(masks)
y = op.forward(truth)

# The baseline everything should beat: scale the snapshot back per pixel.
init = op.adjoint(y / op.R)
print(f"scaled-adjoint baseline: {mean_psnr(truth, init):.2f} dB")

cfg = GapConfig(
    schedule=DenoiserSchedule.single(TVDenoiser(weight=0.75, inner_iters=20), 60),
    lambda0=1.0,
    xi=0.9,
    schedule_mode="adaptive",
)
x, trace = gap_solve(op, y, cfg, ground_truth=truth)

print("iteration   sigma     feasibility   PSNR")
for k in (1, 5, 10, 20, 40, 60):
    r = trace.records[k - 1]
    print(f"   {r.k:3d}     {r.sigma:7.4f}   {r.feasibility:10.2e}   {r.psnr:6.2f} dB")

report = evaluate(truth, x, runtime_seconds=trace.wall_time_s)
print(f"final: {report.mean_psnr:.2f} dB, SSIM {report.mean_ssim:.3f}, "
      f"{trace.wall_time_s:.2f} s for {len(trace)} iterations")

# The returned cube is the post-projection iterate, so it reproduces the
# snapshot to machine precision even though TV smoothed the frames.
print(f"measurement residual: {np.max(np.abs(op.forward(x) - y)):.2e}")

trace.write_csv(out / "trace.csv")
print(f"full per-iteration trace written to {out / 'trace.csv'}")
