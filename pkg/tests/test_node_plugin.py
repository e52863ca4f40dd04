"""Integration with the TypeScript plugin worker in node-plugin/.

Skipped unless the worker has been built (npm run build there); the
protocol itself is covered implementation-independently by the plugin
tests against the in-repo reference server.
"""

import shutil
from pathlib import Path

import numpy as np
import pytest

from sci_pnp.denoisers import DenoiserSchedule, GaussianDenoiser
from sci_pnp.gap import GapConfig, gap_solve
from sci_pnp.plugin import PluginClient, PluginDenoiser
from sci_pnp.sensing import SensingOperator, generate_masks
from sci_pnp.synthetic import moving_shapes_video

SERVER = Path(__file__).parent.parent / "node-plugin" / "dist" / "server.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not SERVER.exists(),
    reason="node or the built plugin worker is not available",
)


def _client(*args, **kwargs):
    return PluginClient(["node", str(SERVER), *args], **kwargs)


def test_echo_round_trip_bit_exact(rng):
    cube = rng.random((3, 12, 10))
    with _client("--filter", "echo") as client:
        assert np.array_equal(client.denoise(cube, 0.5), cube)


def test_gaussian_matches_native(rng):
    native = GaussianDenoiser(scale=1.0)
    cube = rng.random((4, 16, 16))
    with _client("--filter", "gaussian") as client:
        remote = PluginDenoiser(client, bound_constant=native.bound_constant)
        for sigma in (0.05, 0.5, 2.0):
            assert np.max(np.abs(remote.denoise(cube, sigma) - native.denoise(cube, sigma))) < 1e-6


def test_full_solve_through_worker(rng):
    truth = moving_shapes_video(32, 32, 4, seed=2)
    masks = generate_masks(32, 32, 4, kind="bernoulli", p1=0.5, seed=1)
    op = SensingOperator(masks)
    y = op.forward(truth)

    def cfg(denoiser):
        return GapConfig(
            schedule=DenoiserSchedule.single(denoiser, 20),
            lambda0=0.25,
            xi=0.9,
            schedule_mode="monotone",
        )

    native = GaussianDenoiser(scale=1.0)
    x_native, _ = gap_solve(op, y, cfg(native))
    with _client("--filter", "gaussian") as client:
        remote = PluginDenoiser(client, bound_constant=native.bound_constant)
        x_remote, _ = gap_solve(op, y, cfg(remote))
    assert np.max(np.abs(x_remote - x_native)) < 1e-5
