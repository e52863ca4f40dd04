import io
import struct
import sys

import numpy as np
import pytest

from sci_pnp.denoisers import DenoiserSchedule, GaussianDenoiser
from sci_pnp.gap import GapConfig, gap_solve
from sci_pnp.plugin import (
    HEADER,
    MAGIC,
    MSG_DENOISE_REPLY,
    MSG_DENOISE_REQUEST,
    MSG_ERROR,
    PROTOCOL_VERSION,
    PluginClient,
    PluginDenoiser,
    PluginError,
    PluginTimeoutError,
    encode_message,
    encode_request,
)
from sci_pnp.plugin_server import denoise_echo, make_denoise_gaussian, serve
from sci_pnp.sensing import SensingOperator
from sci_pnp.tensorio import tensor_from_bytes, tensor_to_bytes

ECHO_CMD = [sys.executable, "-m", "sci_pnp.plugin_server", "--filter", "echo"]


def _drain_messages(buf: bytes):
    """Parse a concatenation of protocol messages."""
    out = []
    off = 0
    while off < len(buf):
        magic, version, msg_type, length = HEADER.unpack_from(buf, off)
        assert magic == MAGIC and version == PROTOCOL_VERSION
        payload = buf[off + HEADER.size : off + HEADER.size + length]
        assert len(payload) == length
        out.append((msg_type, payload))
        off += HEADER.size + length
    return out


def _serve_bytes(data: bytes, fn=denoise_echo) -> list:
    fin, fout = io.BytesIO(data), io.BytesIO()
    serve(fn, stdin=fin, stdout=fout)
    return _drain_messages(fout.getvalue())


# ------------------------------------------------------------------- framing


def test_header_encoding():
    msg = encode_message(MSG_ERROR, b"boom")
    assert len(msg) == HEADER.size + 4
    magic, version, msg_type, length = HEADER.unpack_from(msg, 0)
    assert (magic, version, msg_type, length) == (MAGIC, 1, MSG_ERROR, 4)
    assert msg[HEADER.size :] == b"boom"


def test_request_layout(rng):
    cube = rng.random((2, 3, 4))
    msg = encode_request(cube, 0.75)
    magic, version, msg_type, length = HEADER.unpack_from(msg, 0)
    assert msg_type == MSG_DENOISE_REQUEST
    payload = msg[HEADER.size :]
    assert len(payload) == length
    assert struct.unpack_from("<d", payload, 0) == (0.75,)
    assert np.array_equal(tensor_from_bytes(payload[8:]), cube)


# ---------------------------------------------------------- in-process serve


def test_serve_echo_round_trip(rng):
    cube = rng.random((2, 4, 4))
    replies = _serve_bytes(encode_request(cube, 0.3))
    assert len(replies) == 1
    msg_type, payload = replies[0]
    assert msg_type == MSG_DENOISE_REPLY
    assert np.array_equal(tensor_from_bytes(payload), cube)


def test_serve_accepts_2d_frames(rng):
    frame = rng.random((4, 6))
    payload = struct.pack("<d", 0.2) + tensor_to_bytes(frame, dtype="f64")
    replies = _serve_bytes(encode_message(MSG_DENOISE_REQUEST, payload))
    msg_type, out = replies[0]
    assert msg_type == MSG_DENOISE_REPLY
    got = tensor_from_bytes(out)
    assert got.shape == frame.shape
    assert np.array_equal(got, frame)


def test_serve_is_stateless_across_requests(rng):
    cube = rng.random((1, 4, 4))
    stream = encode_request(cube, 0.1) + encode_request(cube, 0.1)
    replies = _serve_bytes(stream)
    assert len(replies) == 2
    assert replies[0] == replies[1]


def test_serve_resyncs_after_bad_magic(rng):
    cube = rng.random((1, 4, 4))
    stream = b"XXXXXXXX" + encode_request(cube, 0.5)
    replies = _serve_bytes(stream)
    assert [t for t, _ in replies] == [MSG_ERROR, MSG_DENOISE_REPLY]
    assert b"magic" in replies[0][1]
    assert np.array_equal(tensor_from_bytes(replies[1][1]), cube)


def test_serve_skips_unknown_version_then_recovers(rng):
    cube = rng.random((1, 4, 4))
    junk_payload = b"\x00" * 10
    bad = HEADER.pack(MAGIC, 9, MSG_DENOISE_REQUEST, len(junk_payload)) + junk_payload
    replies = _serve_bytes(bad + encode_request(cube, 0.5))
    assert [t for t, _ in replies] == [MSG_ERROR, MSG_DENOISE_REPLY]
    assert b"version" in replies[0][1]


def test_serve_rejects_non_request_types(rng):
    cube = rng.random((1, 4, 4))
    bad = encode_message(MSG_DENOISE_REPLY, b"\x00" * 4)
    replies = _serve_bytes(bad + encode_request(cube, 0.5))
    assert [t for t, _ in replies] == [MSG_ERROR, MSG_DENOISE_REPLY]
    assert b"type" in replies[0][1]


def test_serve_truncated_payload_yields_error(rng):
    cube = rng.random((1, 4, 4))
    msg = encode_request(cube, 0.5)
    replies = _serve_bytes(msg[:-7])
    assert [t for t, _ in replies] == [MSG_ERROR]
    assert b"truncated" in replies[0][1]


def test_serve_payload_too_short_for_sigma():
    replies = _serve_bytes(encode_message(MSG_DENOISE_REQUEST, b"\x01\x02"))
    assert [t for t, _ in replies] == [MSG_ERROR]
    assert b"sigma" in replies[0][1]


def test_serve_corrupt_tensor_yields_error():
    payload = struct.pack("<d", 0.5) + b"NOPE" + b"\x00" * 20
    replies = _serve_bytes(encode_message(MSG_DENOISE_REQUEST, payload))
    assert [t for t, _ in replies] == [MSG_ERROR]


def test_serve_rejects_dims_changing_filter(rng):
    def shrink(cube, sigma):
        return cube[:, :2, :2]

    replies = _serve_bytes(encode_request(rng.random((1, 4, 4)), 0.5), fn=shrink)
    assert [t for t, _ in replies] == [MSG_ERROR]
    assert b"dims" in replies[0][1]


def test_serve_empty_stream_exits_cleanly():
    assert _serve_bytes(b"") == []


# -------------------------------------------------------- subprocess client


def test_client_echo_round_trip(rng):
    cube = rng.random((2, 8, 8))
    with PluginClient(ECHO_CMD) as client:
        out = client.denoise(cube, 0.5)
        assert np.array_equal(out, cube)
        out2 = client.denoise(cube * 0.5, 1.5)
        assert np.array_equal(out2, cube * 0.5)


def test_client_gaussian_matches_native(rng):
    cube = rng.random((3, 16, 16))
    cmd = [sys.executable, "-m", "sci_pnp.plugin_server", "--filter", "gaussian", "--scale", "1.0"]
    with PluginClient(cmd) as client:
        plugin = PluginDenoiser(client, name="ext-gaussian")
        native = GaussianDenoiser(scale=1.0)
        for sigma in (0.05, 0.5, 2.0):
            assert np.array_equal(plugin.denoise(cube, sigma), native.denoise(cube, sigma))


def test_solver_through_plugin_matches_native(rng):
    masks = (rng.random((2, 16, 16)) < 0.5).astype(np.float64)
    masks[0, masks.sum(axis=0) == 0] = 1.0
    truth = rng.random((2, 16, 16))
    y = np.einsum("bij,bij->ij", masks, truth)
    op = SensingOperator(masks)
    cmd = [sys.executable, "-m", "sci_pnp.plugin_server", "--filter", "gaussian", "--scale", "1.0"]
    with PluginClient(cmd) as client:
        cfg_plugin = GapConfig(
            schedule=DenoiserSchedule.single(PluginDenoiser(client), 5),
            lambda0=0.25,
            xi=0.9,
            schedule_mode="monotone",
        )
        x_plugin, _ = gap_solve(op, y, cfg_plugin)
    cfg_native = GapConfig(
        schedule=DenoiserSchedule.single(GaussianDenoiser(scale=1.0), 5),
        lambda0=0.25,
        xi=0.9,
        schedule_mode="monotone",
    )
    x_native, _ = gap_solve(op, y, cfg_native)
    assert np.array_equal(x_plugin, x_native)


def test_client_timeout(rng):
    cmd = [sys.executable, "-c", "import time; time.sleep(60)"]
    client = PluginClient(cmd, timeout=0.5)
    try:
        with pytest.raises(PluginTimeoutError):
            client.denoise(rng.random((1, 4, 4)), 0.1)
    finally:
        client.close()


def test_client_detects_silent_exit(rng):
    cmd = [sys.executable, "-c", "import sys; sys.stdin.buffer.read(12); sys.exit(0)"]
    client = PluginClient(cmd, timeout=10.0)
    try:
        with pytest.raises(PluginError):
            client.denoise(rng.random((1, 4, 4)), 0.1)
    finally:
        client.close()


def test_client_rejects_dims_changing_reply(rng):
    code = (
        "import sys\n"
        "import numpy as np\n"
        "from sci_pnp.plugin import HEADER, MAGIC, PROTOCOL_VERSION, MSG_DENOISE_REPLY\n"
        "from sci_pnp.tensorio import tensor_to_bytes\n"
        "h = sys.stdin.buffer.read(HEADER.size)\n"
        "magic, ver, typ, length = HEADER.unpack(h)\n"
        "sys.stdin.buffer.read(length)\n"
        "payload = tensor_to_bytes(np.zeros((2, 2)), dtype='f64')\n"
        "sys.stdout.buffer.write(HEADER.pack(MAGIC, PROTOCOL_VERSION, MSG_DENOISE_REPLY, len(payload)) + payload)\n"
        "sys.stdout.buffer.flush()\n"
    )
    client = PluginClient([sys.executable, "-c", code], timeout=30.0)
    try:
        with pytest.raises(PluginError, match="dims"):
            client.denoise(rng.random((1, 4, 4)), 0.1)
    finally:
        client.close()


def test_client_surfaces_error_replies(rng):
    code = (
        "import sys\n"
        "from sci_pnp.plugin import HEADER, MAGIC, PROTOCOL_VERSION, MSG_ERROR\n"
        "h = sys.stdin.buffer.read(HEADER.size)\n"
        "magic, ver, typ, length = HEADER.unpack(h)\n"
        "sys.stdin.buffer.read(length)\n"
        "reason = b'model not loaded'\n"
        "sys.stdout.buffer.write(HEADER.pack(MAGIC, PROTOCOL_VERSION, MSG_ERROR, len(reason)) + reason)\n"
        "sys.stdout.buffer.flush()\n"
    )
    client = PluginClient([sys.executable, "-c", code], timeout=30.0)
    try:
        with pytest.raises(PluginError, match="model not loaded"):
            client.denoise(rng.random((1, 4, 4)), 0.1)
    finally:
        client.close()


def test_client_validates_timeout():
    with pytest.raises(ValueError):
        PluginClient(ECHO_CMD, timeout=0.0)


def test_gaussian_filter_function_matches_native_rule(rng):
    cube = rng.random((2, 12, 12))
    fn = make_denoise_gaussian(scale=2.0)
    from scipy.ndimage import gaussian_filter

    want = np.stack([gaussian_filter(f, 0.4 * 2.0, mode="reflect") for f in cube])
    assert np.array_equal(fn(cube, 0.4), want)
