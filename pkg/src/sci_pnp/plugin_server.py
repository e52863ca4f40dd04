"""Reference denoiser plugin: serves the subprocess protocol over stdio.

Run as a module to expose one of the built-in filters:

    python -m sci_pnp.plugin_server --filter gaussian --scale 1.0
    python -m sci_pnp.plugin_server --filter echo

The serve loop is deliberately defensive: a malformed or truncated
request yields an error reply and the process keeps serving, so one bad
message cannot take down a long reconstruction. The server holds no state
between requests.
"""

import argparse
import struct
import sys

import numpy as np
from scipy.ndimage import gaussian_filter

from .plugin import HEADER, MAGIC, MSG_DENOISE_REPLY, MSG_DENOISE_REQUEST, MSG_ERROR, PROTOCOL_VERSION
from .tensorio import SciTensorError, tensor_from_bytes, tensor_to_bytes

__all__ = ["serve", "denoise_echo", "make_denoise_gaussian", "main"]


def denoise_echo(cube: np.ndarray, sigma: float) -> np.ndarray:
    return cube


def make_denoise_gaussian(scale: float = 1.0):
    """Framewise Gaussian blur with spatial std = sigma * scale, the same
    rule the native Gaussian denoiser uses."""

    def denoise(cube: np.ndarray, sigma: float) -> np.ndarray:
        return np.stack([gaussian_filter(frame, sigma * scale, mode="reflect") for frame in cube])

    return denoise


# A learned denoiser would plug in the same way; nothing else changes:
#
#     _MODEL = None
#
#     def denoise_neural(cube, sigma):
#         global _MODEL
#         if _MODEL is None:
#             _MODEL = load_weights("model.bin")   # once per process
#         return _MODEL.infer(cube, noise_level=sigma)
#
#     serve(denoise_neural)


class _Buffered:
    """Byte stream with exact reads and push-back, for resynchronization."""

    def __init__(self, raw):
        self._raw = raw
        self._buf = b""

    def read(self, n: int) -> bytes:
        """Exactly n bytes, or fewer only at EOF."""
        while len(self._buf) < n:
            chunk = self._raw.read(n - len(self._buf))
            if not chunk:
                break
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def read_some(self, limit: int = 4096) -> bytes:
        """Up to ``limit`` bytes; empty only at EOF."""
        if self._buf:
            out, self._buf = self._buf[:limit], self._buf[limit:]
            return out
        return self._raw.read(limit) or b""

    def push_back(self, data: bytes) -> None:
        self._buf = data + self._buf


def _error(fout, reason: str) -> None:
    payload = reason.encode("utf-8")
    fout.write(HEADER.pack(MAGIC, PROTOCOL_VERSION, MSG_ERROR, len(payload)) + payload)
    fout.flush()


def _reply(fout, tensor: np.ndarray) -> None:
    payload = tensor_to_bytes(tensor, dtype="f64")
    fout.write(HEADER.pack(MAGIC, PROTOCOL_VERSION, MSG_DENOISE_REPLY, len(payload)) + payload)
    fout.flush()


def serve(denoise_fn, stdin=None, stdout=None) -> None:
    """Answer denoise requests until the input stream closes.

    ``denoise_fn(cube, sigma) -> cube`` is applied to each request tensor
    (2D requests are lifted to single-frame cubes and squeezed back).
    Malformed traffic produces an error reply; after a bad magic the
    stream is scanned forward to the next plausible message boundary.
    """
    fin = _Buffered(stdin if stdin is not None else sys.stdin.buffer)
    fout = stdout if stdout is not None else sys.stdout.buffer

    while True:
        header = fin.read(HEADER.size)
        if not header:
            return  # clean EOF between messages
        if len(header) < HEADER.size:
            _error(fout, "truncated header")
            return

        magic, version, msg_type, length = HEADER.unpack(header)
        if magic != MAGIC:
            _error(fout, f"bad magic {magic!r}")
            window = header
            while True:
                idx = window.find(MAGIC, 1)
                if idx >= 0:
                    fin.push_back(window[idx:])
                    break
                window = window[1 - len(MAGIC) :]  # keep a possible magic prefix
                chunk = fin.read_some()
                if not chunk:
                    return
                window += chunk
            continue

        if version != PROTOCOL_VERSION:
            _error(fout, f"unsupported protocol version {version}")
            fin.read(length)
            continue
        if msg_type != MSG_DENOISE_REQUEST:
            _error(fout, f"unexpected message type {msg_type}")
            fin.read(length)
            continue

        payload = fin.read(length)
        if len(payload) < length:
            _error(fout, f"truncated request: expected {length} payload bytes, got {len(payload)}")
            continue
        if len(payload) < 8:
            _error(fout, "request payload too short for sigma")
            continue

        (sigma,) = struct.unpack_from("<d", payload, 0)
        try:
            tensor = tensor_from_bytes(payload[8:])
            squeeze = tensor.ndim == 2
            cube = tensor[None] if squeeze else tensor
            out = np.asarray(denoise_fn(cube, sigma), dtype=np.float64)
            if out.shape != cube.shape:
                raise ValueError(f"denoise_fn changed dims {cube.shape} -> {out.shape}")
            _reply(fout, out[0] if squeeze else out)
        except (SciTensorError, ValueError) as exc:
            _error(fout, str(exc))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Reference denoiser plugin (stdio protocol).")
    parser.add_argument("--filter", choices=("echo", "gaussian"), default="gaussian")
    parser.add_argument("--scale", type=float, default=1.0, help="spatial std per unit sigma (gaussian only)")
    args = parser.parse_args(argv)
    if args.scale <= 0:
        parser.error("--scale must be positive")
    fn = denoise_echo if args.filter == "echo" else make_denoise_gaussian(args.scale)
    serve(fn)
    return 0


if __name__ == "__main__":
    sys.exit(main())
