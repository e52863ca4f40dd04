import numpy as np
import pytest

from sci_pnp.denoisers import (
    ClipDenoiser,
    DenoiserSchedule,
    GaussianDenoiser,
    IdentityDenoiser,
    ScheduleEntry,
    TVDenoiser,
    make_denoiser,
    verify_bounded,
)


def test_identity_is_identity_in_range(rng):
    x = rng.random((2, 8, 8))
    assert np.array_equal(IdentityDenoiser().denoise(x, 0.5), x)


def test_inputs_and_outputs_clipped():
    x = np.full((1, 4, 4), 1.7)
    out = IdentityDenoiser().denoise(x, 0.1)
    assert np.max(out) <= 1.0 and np.min(out) >= 0.0


def test_clip_denoiser_estimate_zero_on_in_range_inputs():
    assert verify_bounded(ClipDenoiser(), [0.1, 1.0], trials=10, seed=0) == 0.0


def test_identity_bound_constant_zero():
    assert IdentityDenoiser().bound_constant == 0.0
    assert verify_bounded(IdentityDenoiser(), [0.5], trials=5, seed=1) == 0.0


def test_gaussian_tiny_sigma_is_identity(rng):
    # filter radius rounds to zero below sigma*scale = 1/8
    x = rng.random((2, 8, 8))
    out = GaussianDenoiser(scale=1.0).denoise(x, 0.1)
    assert np.array_equal(out, x)


def test_gaussian_smooths_at_moderate_sigma(rng):
    x = rng.random((1, 32, 32))
    out = GaussianDenoiser(scale=1.0).denoise(x, 2.0)
    assert np.std(out) < np.std(x)


def test_gaussian_respects_declared_bound(rng):
    d = GaussianDenoiser(scale=1.0)
    est = verify_bounded(d, [0.05, 0.2, 1.0, 5.0], trials=25, seed=3)
    assert est <= d.bound_constant


def test_tv_respects_declared_bound():
    d = TVDenoiser(weight=1.0, inner_iters=5)
    est = verify_bounded(d, [0.05, 0.2, 1.0, 5.0], trials=25, seed=4)
    assert est <= d.bound_constant
    assert d.bound_constant == 4.0


def test_verify_bounded_flags_understated_constant():
    class Shifter(TVDenoiser):
        pass

    d = Shifter(weight=1.0)
    d.bound_constant = 1e-12  # tamper: claim far less than reality
    with pytest.raises(ValueError):
        verify_bounded(d, [0.5], trials=10, seed=0)


def test_denoise_rejects_negative_sigma(rng):
    with pytest.raises(ValueError):
        TVDenoiser().denoise(rng.random((1, 4, 4)), -0.5)


def test_denoise_deterministic(rng):
    x = rng.random((3, 16, 16))
    d = TVDenoiser(weight=0.5, inner_iters=5)
    assert np.array_equal(d.denoise(x, 0.3), d.denoise(x, 0.3))


def test_make_denoiser_registry():
    assert isinstance(make_denoiser("tv", {"weight": 0.5}), TVDenoiser)
    assert isinstance(make_denoiser("gaussian", {"scale": 2.0}), GaussianDenoiser)
    assert isinstance(make_denoiser("identity"), IdentityDenoiser)
    with pytest.raises(ValueError):
        make_denoiser("bm3d")
    with pytest.raises(ValueError):
        make_denoiser("tv", {"strength": 1.0})


def test_schedule_stage_lookup():
    warmup = GaussianDenoiser()
    main = TVDenoiser()
    sched = DenoiserSchedule([ScheduleEntry(warmup, 3), ScheduleEntry(main, 5)])
    assert sched.total_iterations == 8
    assert [sched.denoiser_at(k) for k in range(3)] == [warmup] * 3
    assert sched.denoiser_at(3) is main
    assert sched.denoiser_at(100) is main  # clamps to last stage
    with pytest.raises(ValueError):
        sched.denoiser_at(-1)


def test_schedule_names_collapse_repeats():
    t = TVDenoiser()
    sched = DenoiserSchedule([ScheduleEntry(t, 2), ScheduleEntry(t, 3), ScheduleEntry(GaussianDenoiser(), 1)])
    assert sched.names() == "tv+gaussian"


def test_schedule_validation():
    with pytest.raises(ValueError):
        DenoiserSchedule([])
    with pytest.raises(ValueError):
        ScheduleEntry(TVDenoiser(), 0)


def test_verify_bounded_rejects_bad_sigma():
    with pytest.raises(ValueError):
        verify_bounded(IdentityDenoiser(), [0.0], trials=2, seed=0)
