"""Client side of the external-denoiser subprocess protocol.

A plugin is any executable that reads denoise requests from stdin and
writes replies to stdout. Messages are framed by a 12-byte header:

    magic   4 bytes  "PNPD"
    version u16 LE   1
    type    u16 LE   1 = denoise request, 2 = denoise reply, 3 = error
    length  u32 LE   payload byte count

A request payload is sigma as an 8-byte little-endian float followed by
the tensor in the binary format of :mod:`sci_pnp.tensorio`; a reply
payload is the denoised tensor with identical dims; an error payload is a
UTF-8 reason. The exchange is strictly synchronous: one outstanding
request per connection, replies in request order.

This lets heavyweight denoisers (typically learned ones with their own
runtime stack) participate in the plug-and-play solvers without being
linked into this package.
"""

import os
import select
import struct
import subprocess
import time

import numpy as np

from .cube import as_cube
from .denoisers import Denoiser
from .tensorio import tensor_from_bytes, tensor_to_bytes

__all__ = [
    "MAGIC",
    "PROTOCOL_VERSION",
    "MSG_DENOISE_REQUEST",
    "MSG_DENOISE_REPLY",
    "MSG_ERROR",
    "HEADER",
    "encode_message",
    "encode_request",
    "PluginError",
    "PluginTimeoutError",
    "PluginClient",
    "PluginDenoiser",
]

MAGIC = b"PNPD"
PROTOCOL_VERSION = 1
MSG_DENOISE_REQUEST = 1
MSG_DENOISE_REPLY = 2
MSG_ERROR = 3
HEADER = struct.Struct("<4sHHI")


class PluginError(RuntimeError):
    pass


class PluginTimeoutError(PluginError):
    pass


def encode_message(msg_type: int, payload: bytes) -> bytes:
    return HEADER.pack(MAGIC, PROTOCOL_VERSION, msg_type, len(payload)) + payload


def encode_request(cube: np.ndarray, sigma: float) -> bytes:
    payload = struct.pack("<d", float(sigma)) + tensor_to_bytes(cube, dtype="f64")
    return encode_message(MSG_DENOISE_REQUEST, payload)


class PluginClient:
    """Owns one plugin subprocess and speaks the request/reply protocol.

    Not thread-safe: the protocol allows a single outstanding request, so
    callers must serialize access per client. ``timeout`` bounds the wait
    for each reply.
    """

    def __init__(self, command: list[str], timeout: float = 60.0):
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        self.command = list(command)
        self.timeout = float(timeout)
        # Unbuffered pipes: select() must see exactly what the OS has.
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            bufsize=0,
        )

    def _read_exact(self, nbytes: int, deadline: float) -> bytes:
        fd = self._proc.stdout.fileno()
        buf = bytearray()
        while len(buf) < nbytes:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise PluginTimeoutError(f"plugin {self.command[0]!r}: no reply within {self.timeout} s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, nbytes - len(buf))
            if not chunk:
                raise PluginError(f"plugin {self.command[0]!r} closed its output stream")
            buf += chunk
        return bytes(buf)

    def denoise(self, cube: np.ndarray, sigma: float) -> np.ndarray:
        cube = as_cube(cube)
        if self._proc.poll() is not None:
            raise PluginError(f"plugin {self.command[0]!r} exited with code {self._proc.returncode}")
        try:
            self._proc.stdin.write(encode_request(cube, sigma))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise PluginError(f"plugin {self.command[0]!r} is not accepting requests: {exc}") from exc

        deadline = time.monotonic() + self.timeout
        magic, version, msg_type, length = HEADER.unpack(self._read_exact(HEADER.size, deadline))
        if magic != MAGIC:
            raise PluginError(f"plugin sent bad magic {magic!r}")
        if version != PROTOCOL_VERSION:
            raise PluginError(f"plugin protocol version mismatch: got {version}, support {PROTOCOL_VERSION}")
        payload = self._read_exact(length, deadline)
        if msg_type == MSG_ERROR:
            raise PluginError(f"plugin error: {payload.decode('utf-8', errors='replace')}")
        if msg_type != MSG_DENOISE_REPLY:
            raise PluginError(f"unexpected message type {msg_type}")
        out = tensor_from_bytes(payload)
        if out.shape != cube.shape:
            raise PluginError(f"plugin changed tensor dims {cube.shape} -> {out.shape}")
        return out

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        if self._proc.stdout is not None:
            self._proc.stdout.close()

    def __enter__(self) -> "PluginClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class PluginDenoiser(Denoiser):
    """Adapter exposing a plugin connection as a solver denoiser.

    ``bound_constant`` stays None unless the caller declares one (for
    example from a :func:`~sci_pnp.denoisers.verify_bounded` estimate of
    the external denoiser).
    """

    framewise = False

    def __init__(self, client: PluginClient, name: str = "plugin", bound_constant: float | None = None):
        self._client = client
        self.name = name
        self.bound_constant = bound_constant

    def _denoise_cube(self, cube, sigma):
        return self._client.denoise(cube, sigma)
