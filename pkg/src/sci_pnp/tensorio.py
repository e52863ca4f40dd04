"""Binary tensor file format plus PNG-stack ingestion.

The on-disk layout (version 1) is:

    magic   4 bytes  "SCIT"
    version u8       1
    dtype   u8       1 = float32, 2 = float64, 3 = uint8
    rank    u8       2 (frame) or 3 (video cube)
    reserved u8      0
    dims    rank x u32, little-endian, order (n_x, n_y) or (n_x, n_y, B)
    payload little-endian, frame-major then row-major

A frame round-trips as an (n_x, n_y) array, a cube as (B, n_x, n_y) with
frame b contiguous. The format is deliberately minimal so that plugin
processes in any language can implement it in a few lines.

uint8 payloads are 8-bit image data: by default they are scaled to [0, 1]
on read (divide by 255) and floats are scaled back (round of 255*x, after
clipping) on write. Pass ``scale_u8=False`` to read the raw byte values.
"""

import struct
from pathlib import Path

import numpy as np

__all__ = [
    "SciTensorError",
    "tensor_to_bytes",
    "tensor_from_bytes",
    "write_tensor",
    "read_tensor",
    "read_png_stack",
    "write_png_stack",
]

MAGIC = b"SCIT"
VERSION = 1
_DTYPE_CODES = {"f32": 1, "f64": 2, "u8": 3}
_CODE_DTYPES = {1: np.dtype("<f4"), 2: np.dtype("<f8"), 3: np.dtype("u1")}
# Element-count cap: keeps corrupt headers from triggering huge allocations.
_MAX_ELEMENTS = 2**32


class SciTensorError(ValueError):
    pass


def _dims_of(array: np.ndarray) -> tuple[int, ...]:
    if array.ndim == 2:
        return array.shape
    if array.ndim == 3:
        b, n_x, n_y = array.shape
        return (n_x, n_y, b)
    raise SciTensorError(f"only rank 2 or 3 tensors are supported, got ndim={array.ndim}")


def tensor_to_bytes(array: np.ndarray, dtype: str | None = None) -> bytes:
    """Serialize a frame or cube. ``dtype`` is 'f32', 'f64' or 'u8';
    defaults to 'u8' for uint8 input and 'f64' otherwise."""
    a = np.asarray(array)
    dims = _dims_of(a)
    if dtype is None:
        dtype = "u8" if a.dtype == np.uint8 else "f64"
    if dtype not in _DTYPE_CODES:
        raise SciTensorError(f"unknown dtype {dtype!r}; expected one of {sorted(_DTYPE_CODES)}")
    if any(d <= 0 for d in dims):
        raise SciTensorError(f"dims must be positive, got {dims}")
    if any(d > 0xFFFFFFFF for d in dims) or int(np.prod([int(d) for d in dims])) > _MAX_ELEMENTS:
        raise SciTensorError(f"dims overflow: {dims}")

    if dtype == "u8":
        if a.dtype == np.uint8:
            payload = np.ascontiguousarray(a)
        else:
            payload = np.round(np.clip(a, 0.0, 1.0) * 255.0).astype(np.uint8)
    else:
        payload = np.ascontiguousarray(a, dtype=_CODE_DTYPES[_DTYPE_CODES[dtype]])

    head = struct.pack("<4sBBBB", MAGIC, VERSION, _DTYPE_CODES[dtype], len(dims), 0)
    head += struct.pack(f"<{len(dims)}I", *dims)
    return head + payload.tobytes()


def tensor_from_bytes(buf: bytes, scale_u8: bool = True) -> np.ndarray:
    """Inverse of :func:`tensor_to_bytes`."""
    if len(buf) < 8:
        raise SciTensorError("truncated header")
    magic, version, dtype_code, rank, reserved = struct.unpack_from("<4sBBBB", buf, 0)
    if magic != MAGIC:
        raise SciTensorError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SciTensorError(f"version mismatch: got {version}, support {VERSION}")
    if dtype_code not in _CODE_DTYPES:
        raise SciTensorError(f"unknown dtype code {dtype_code}")
    if rank not in (2, 3):
        raise SciTensorError(f"rank must be 2 or 3, got {rank}")
    if reserved != 0:
        raise SciTensorError(f"reserved byte must be 0, got {reserved}")
    if len(buf) < 8 + 4 * rank:
        raise SciTensorError("truncated dims")
    dims = struct.unpack_from(f"<{rank}I", buf, 8)
    if any(d <= 0 for d in dims):
        raise SciTensorError(f"dims must be positive, got {dims}")
    count = 1
    for d in dims:
        count *= d
    if count > _MAX_ELEMENTS:
        raise SciTensorError(f"dims overflow: {dims}")

    dt = _CODE_DTYPES[dtype_code]
    start = 8 + 4 * rank
    expected = count * dt.itemsize
    if len(buf) - start != expected:
        raise SciTensorError(f"truncated payload: expected {expected} bytes, got {len(buf) - start}")
    flat = np.frombuffer(buf, dtype=dt, count=count, offset=start)

    shape = dims if rank == 2 else (dims[2], dims[0], dims[1])
    a = flat.reshape(shape)
    if dtype_code == _DTYPE_CODES["u8"]:
        return a.astype(np.float64) / 255.0 if scale_u8 else a.copy()
    return a.astype(np.float64)


def write_tensor(path, array: np.ndarray, dtype: str | None = None) -> None:
    Path(path).write_bytes(tensor_to_bytes(array, dtype=dtype))


def read_tensor(path, scale_u8: bool = True) -> np.ndarray:
    return tensor_from_bytes(Path(path).read_bytes(), scale_u8=scale_u8)


def read_png_stack(directory) -> np.ndarray:
    """Load a sorted directory of grayscale PNG frames as a video cube."""
    from PIL import Image

    paths = sorted(Path(directory).glob("*.png"))
    if not paths:
        raise SciTensorError(f"no .png files in {directory}")
    frames = []
    for p in paths:
        with Image.open(p) as img:
            frames.append(np.asarray(img.convert("L"), dtype=np.float64) / 255.0)
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise SciTensorError(f"frames disagree in size: {sorted(shapes)}")
    return np.stack(frames)


def write_png_stack(cube: np.ndarray, directory, prefix: str = "frame") -> list[Path]:
    """Write a video cube as 8-bit grayscale PNGs, one per frame."""
    from PIL import Image

    cube = np.asarray(cube, dtype=np.float64)
    if cube.ndim != 3:
        raise SciTensorError(f"expected a cube, got ndim={cube.ndim}")
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, frame in enumerate(cube):
        img = Image.fromarray(np.round(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8), mode="L")
        path = out_dir / f"{prefix}_{i:04d}.png"
        img.save(path)
        written.append(path)
    return written
