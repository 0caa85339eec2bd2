"""Checkpoint files: a diff-able text header plus raw little-endian payload.

Layout:

    MVCK1\n
    meta <canonical one-line JSON>\n
    param <name> f32 <d0,d1,...> @<byte offset>\n   (one line per parameter)
    data <payload bytes>\n
    <raw float32 payload>

Offsets are relative to the payload start. Saving the same model twice
produces identical bytes, and load(save(m)) restores every value exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FormatError, SchemaError
from .tensor import Parameter

MAGIC = b"MVCK1"


@dataclass
class Checkpoint:
    params: dict[str, np.ndarray]
    meta: dict


def save_checkpoint(path, params: Sequence[Parameter], meta: dict) -> None:
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate parameter names in checkpoint")
    lines = [MAGIC.decode(), "meta " + json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    payload = bytearray()
    for p in params:
        arr = np.ascontiguousarray(p.data, dtype="<f4")
        dims = ",".join(str(d) for d in arr.shape) or "scalar"
        lines.append(f"param {p.name} f32 {dims} @{len(payload)}")
        payload.extend(arr.tobytes())
    lines.append(f"data {len(payload)}")
    with open(path, "wb") as f:
        f.write(("\n".join(lines) + "\n").encode())
        f.write(bytes(payload))


def load_checkpoint(path) -> Checkpoint:
    blob = open(path, "rb").read()
    if not blob.startswith(MAGIC + b"\n"):
        raise FormatError(f"{path}: bad magic")
    try:
        header_end = blob.index(b"\ndata ")
        nl = blob.index(b"\n", header_end + 1)
    except ValueError as e:
        raise FormatError(f"{path}: missing data marker") from e
    header = blob[: nl].decode()
    payload = blob[nl + 1 :]

    meta: dict = {}
    entries: list[tuple[str, tuple[int, ...], int]] = []
    declared = None
    for line in header.splitlines()[1:]:
        if line.startswith("meta "):
            meta = json.loads(line[5:])
        elif line.startswith("param "):
            try:
                _, name, dtype, dims_s, off_s = line.split(" ")
            except ValueError as e:
                raise FormatError(f"{path}: malformed param line {line!r}") from e
            if dtype != "f32" or not off_s.startswith("@"):
                raise FormatError(f"{path}: malformed param line {line!r}")
            dims = () if dims_s == "scalar" else tuple(int(d) for d in dims_s.split(","))
            entries.append((name, dims, int(off_s[1:])))
        elif line.startswith("data "):
            declared = int(line[5:])
    if declared is None or declared != len(payload):
        raise FormatError(f"{path}: payload is {len(payload)} bytes, header says {declared}")

    params: dict[str, np.ndarray] = {}
    for name, dims, off in entries:
        size = int(np.prod(dims, dtype=np.int64)) * 4 if dims else 4
        chunk = payload[off : off + size]
        if len(chunk) != size:
            raise FormatError(f"{path}: parameter {name} extends past payload")
        params[name] = np.frombuffer(chunk, dtype="<f4").reshape(dims).copy()
    return Checkpoint(params=params, meta=meta)


def restore_into(params: Sequence[Parameter], ckpt: Checkpoint) -> None:
    """Copy checkpoint values into matching parameters.

    Every target parameter must exist in the checkpoint with the same shape;
    extra checkpoint entries (e.g. projection heads no longer present) are
    ignored.
    """
    for p in params:
        if p.name not in ckpt.params:
            raise SchemaError(f"checkpoint is missing parameter {p.name!r}")
        src = ckpt.params[p.name]
        if src.shape != p.data.shape:
            raise SchemaError(
                f"parameter {p.name!r}: checkpoint shape {src.shape} != model shape {p.data.shape}"
            )
        p.data[...] = src.astype(p.data.dtype)
