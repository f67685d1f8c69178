"""FMX1 matrix file format.

Layout: 8-byte magic "FMX1\\0\\0\\0\\0", u32 rows, u32 cols (little-endian),
u8 dtype tag (0 = little-endian float32), 3 pad bytes, then the row-major
payload. All matrix-emitting commands use this format.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"FMX1\x00\x00\x00\x00"
DTYPE_F32 = 0

_HEADER = struct.Struct("<IIB3x")


def write_fmx(path: str | Path, matrix: np.ndarray) -> None:
    """Write a 2-D real matrix as an FMX1 file (float32 payload)."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError(f"FMX1 stores 2-D matrices, got shape {m.shape}")
    rows, cols = m.shape
    payload = np.ascontiguousarray(m, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_HEADER.pack(rows, cols, DTYPE_F32))
        f.write(payload)


def read_fmx(path: str | Path) -> np.ndarray:
    """Read an FMX1 file into a float32 matrix of shape (rows, cols)."""
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + _HEADER.size:
        raise DataError(f"{path}: truncated FMX1 header")
    if blob[: len(MAGIC)] != MAGIC:
        raise DataError(f"{path}: bad FMX1 magic")
    rows, cols, tag = _HEADER.unpack_from(blob, len(MAGIC))
    if tag != DTYPE_F32:
        raise DataError(f"{path}: unsupported FMX1 dtype tag {tag}")
    body = blob[len(MAGIC) + _HEADER.size :]
    expected = rows * cols * 4
    if len(body) != expected:
        raise DataError(
            f"{path}: payload size {len(body)} != rows*cols*4 = {expected}"
        )
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).copy()
