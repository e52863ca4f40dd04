import numpy as np
import pytest

from sci_pnp.synthetic import gray_rgb_video, moving_shapes_video


def test_deterministic_in_seed():
    a = moving_shapes_video(16, 16, 4, seed=7)
    b = moving_shapes_video(16, 16, 4, seed=7)
    assert np.array_equal(a, b)
    c = moving_shapes_video(16, 16, 4, seed=8)
    assert not np.array_equal(a, c)


def test_shape_and_range():
    v = moving_shapes_video(20, 24, 6, seed=0)
    assert v.shape == (6, 20, 24)
    assert v.min() >= 0.1 and v.max() <= 0.9
    # piecewise-constant scene: only the four scripted gray levels appear
    assert set(np.unique(v)) <= {0.2, 0.45, 0.7, 0.9}


def test_frames_actually_move():
    v = moving_shapes_video(32, 32, 8, seed=0)
    diffs = [np.abs(v[b + 1] - v[b]).sum() for b in range(7)]
    assert all(d > 0 for d in diffs)
    # consecutive frames overlap heavily (small motion per frame)
    assert max(diffs) < 0.5 * v[0].size


def test_static_block_is_static():
    v = moving_shapes_video(32, 32, 8, seed=3)
    # the upper-left block may be crossed by movers, but some pixel of it
    # must be 0.45 in every frame
    block = v[:, 1:10, 1:10]
    assert all((block[b] == 0.45).any() for b in range(8))


def test_rejects_tiny_dims():
    with pytest.raises(ValueError):
        moving_shapes_video(4, 16, 2)
    with pytest.raises(ValueError):
        moving_shapes_video(16, 16, 0)


def test_gray_rgb_channels_equal():
    v = gray_rgb_video(16, 16, 3, seed=1)
    assert v.shape == (3, 16, 16, 3)
    assert np.array_equal(v[..., 0], v[..., 1])
    assert np.array_equal(v[..., 1], v[..., 2])
    assert np.array_equal(v[..., 0], moving_shapes_video(16, 16, 3, seed=1))
