"""MVF: a minimal self-describing binary tensor file.

Byte layout, little-endian throughout:

    offset 0   magic  b"MVF1"
    offset 4   u8     dtype code (1 = float32)
    offset 5   u8     rank
    offset 6   u32[rank]  dims
    ...        f32[prod(dims)]  payload, row-major

Round trips are bit-exact; any size disagreement is a format error.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError

MAGIC = b"MVF1"
DTYPE_F32 = 1


def mvf_write(path, tensor) -> None:
    arr = np.ascontiguousarray(getattr(tensor, "data", tensor), dtype="<f4")
    if not np.isfinite(arr).all():
        raise ContractError(f"refusing to write non-finite values to {path}")
    header = MAGIC + struct.pack("<BB", DTYPE_F32, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr.tobytes())


def mvf_read_header(path) -> tuple[tuple[int, ...], int]:
    """Return (dims, payload_offset) without reading the payload."""
    with open(path, "rb") as f:
        head = f.read(6)
        if len(head) < 6 or head[:4] != MAGIC:
            raise FormatError(f"{path}: bad magic")
        dtype_code, rank = head[4], head[5]
        if dtype_code != DTYPE_F32:
            raise FormatError(f"{path}: unsupported dtype code {dtype_code}")
        raw = f.read(4 * rank)
        if len(raw) != 4 * rank:
            raise FormatError(f"{path}: truncated header")
        dims = struct.unpack(f"<{rank}I", raw)
    return dims, 6 + 4 * rank


def mvf_read(path) -> np.ndarray:
    dims, offset = mvf_read_header(path)
    expected = int(np.prod(dims, dtype=np.int64)) * 4
    with open(path, "rb") as f:
        f.seek(offset)
        payload = f.read()
    if len(payload) != expected:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def mvf_dims(path) -> tuple[int, ...]:
    return mvf_read_header(Path(path))[0]
