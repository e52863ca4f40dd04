"""
Coded-exposure forward model
============================

A coded-exposure camera modulates each of B video frames with its own
binary mask and sums the results on the sensor, so a whole short clip
lands in a single 2D snapshot. This walk-through builds that model from
scratch on a synthetic scene and checks the identities everything else
in the package leans on.
"""

from pathlib import Path

import numpy as np

from sci_pnp import (
    SensingOperator,
    check_gradient_bound,
    compute_R,
    generate_masks,
    moving_shapes_video,
    write_tensor,
)

out = Path(__file__).parent / "out" / "forward_model"
out.mkdir(parents=True, exist_ok=True)

# A 64x64 clip of 8 frames: two moving rectangles and a moving disc over a
# static backdrop, values in [0, 1].
truth = moving_shapes_video(64, 64, 8, seed=3)
print(f"ground truth cube: shape={truth.shape}, range=[{truth.min():.2f}, {truth.max():.2f}]")

# Per-frame binary masks, each pixel open with probability 1/2. Generation
# guarantees every pixel is open in at least one frame, otherwise that pixel
# would never be measured and no solver could say anything about it.
masks = generate_masks(64, 64, 8, kind="bernoulli", p1=0.5, seed=0)
print(f"masks: shape={masks.shape}, fraction open={masks.mean():.3f}")

op = SensingOperator(masks)
y = op.forward(truth)
print(f"snapshot: shape={y.shape}  (8 frames compressed into one measurement)")

# The measurement is literally the masked sum of the frames.
assert np.allclose(y, (masks * truth).sum(axis=0))

# R is the per-pixel sum of squared mask values. For the flattened operator H
# it is the diagonal of H H^T, and it being diagonal is the whole trick: the
# projection onto {x : Hx = y} costs one forward and one adjoint pass instead
# of a linear solve.
R, r_max, r_min = compute_R(masks)
print(f"R (diagonal of H H^T): min={r_min:.0f}, max={r_max:.0f}")
assert r_min >= 1.0  # coverage: every pixel seen at least once

# Adjoint identity <H x, y> == <x, H^T y>, the definition of op.adjoint.
probe_x = np.random.default_rng(1).random(truth.shape)
probe_y = np.random.default_rng(2).random(y.shape)
lhs = float(np.sum(op.forward(probe_x) * probe_y))
rhs = float(np.sum(probe_x * op.adjoint(probe_y)))
print(f"adjoint identity: <Hx, y>={lhs:.6f}  <x, H^T y>={rhs:.6f}")
assert abs(lhs - rhs) < 1e-9 * abs(lhs)

# For binary masks the Gram operator H^T H has norm at most B, with equality
# when some pixel is open in every frame.
assert check_gradient_bound(op, probe_x)
gram_ratio = np.linalg.norm(op.adjoint(op.forward(probe_x))) / np.linalg.norm(probe_x)
print(f"||H^T H x|| / ||x|| = {gram_ratio:.3f}  (bound: B = {op.B})")

# Everything a reconstruction needs can be shipped as three tensor files.
write_tensor(out / "truth.scit", truth)
write_tensor(out / "masks.scit", masks, dtype="u8")
write_tensor(out / "measurement.scit", y)
print(f"wrote truth/masks/measurement to {out}")
