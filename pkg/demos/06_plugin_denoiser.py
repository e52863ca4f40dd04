"""
External denoisers over stdin/stdout
====================================

The denoiser slot of either solver can be filled by a separate process:
the client streams (sigma, cube) requests over the child's stdin and
reads denoised cubes back from its stdout, using a small length-prefixed
binary protocol. Any language can implement the other end; here the
reference server (this package, run as a module) stands in.
"""

import sys

import numpy as np

from sci_pnp import (
    DenoiserSchedule,
    GapConfig,
    GaussianDenoiser,
    PluginClient,
    PluginDenoiser,
    SensingOperator,
    gap_solve,
    generate_masks,
    moving_shapes_video,
)

truth = moving_shapes_video(32, 32, 4, seed=2)
masks = generate_masks(32, 32, 4, kind="bernoulli", p1=0.5, seed=1)
op = SensingOperator(masks)
y = op.forward(truth)

server_cmd = [sys.executable, "-m", "sci_pnp.plugin_server", "--filter", "gaussian"]
print(f"spawning denoiser process: {' '.join(server_cmd[1:])}")

with PluginClient(server_cmd, timeout=30.0) as client:
    # One round trip: the remote Gaussian must match the in-process one
    # bit for bit, since both follow the same filtering rule.
    native = GaussianDenoiser(scale=1.0)
    probe = np.random.default_rng(0).random((4, 32, 32))
    remote_out = client.denoise(probe, 0.25)
    native_out = native.denoise(probe, 0.25)
    print(f"remote vs in-process gaussian: max diff {np.max(np.abs(remote_out - native_out)):.1e}")

    # Drop the remote denoiser into a full reconstruction. The declared
    # bound constant is inherited from what the remote filter implements.
    remote = PluginDenoiser(client, name="gaussian-ext", bound_constant=native.bound_constant)
    cfg = GapConfig(
        schedule=DenoiserSchedule.single(remote, 20),
        lambda0=0.25,
        xi=0.9,
        schedule_mode="monotone",
    )
    x_remote, trace = gap_solve(op, y, cfg, ground_truth=truth)
    print(f"reconstruction through the plugin: {trace.final_psnr:.2f} dB, "
          f"{len(trace)} round trips in {trace.wall_time_s:.2f} s")

# Same run with the in-process denoiser: identical trajectory.
cfg = GapConfig(
    schedule=DenoiserSchedule.single(GaussianDenoiser(scale=1.0), 20),
    lambda0=0.25,
    xi=0.9,
    schedule_mode="monotone",
)
x_native, _ = gap_solve(op, y, cfg, ground_truth=truth)
print(f"plugin vs in-process reconstruction: max diff {np.max(np.abs(x_remote - x_native)):.1e}")
