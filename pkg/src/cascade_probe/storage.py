"""Field snapshots and run artifacts on disk.

Binary field format (magic ``CPF1``): little-endian header
``<4s I d d B`` = (magic, n, length, time, kind) with kind 0 = scalar,
1 = vector, followed by the raw float64 payload in row-major order (vector
fields store component 1 then component 2).

JSON and CSV writers are deterministic: sorted keys, shortest round-trip
float repr, LF newlines.  Nothing here writes wall-clock timestamps; the one
allowed timestamp lives in a single header field of the final report and is
added by the CLI layer.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

__all__ = [
    "write_field",
    "read_field",
    "write_json",
    "read_json",
    "write_csv",
]

MAGIC = b"CPF1"
_HEADER = struct.Struct("<4sIddB")

KIND_SCALAR = 0
KIND_VECTOR = 1


def write_field(path, field, length: float, t: float) -> None:
    """Write a scalar array or a (u1, u2) pair to ``path``."""
    if isinstance(field, (tuple, list)):
        kind = KIND_VECTOR
        parts = [np.ascontiguousarray(f, dtype="<f8") for f in field]
        if len(parts) != 2 or parts[0].shape != parts[1].shape:
            raise ValueError("vector field must be two equal-shape components")
        n = parts[0].shape[0]
    else:
        kind = KIND_SCALAR
        parts = [np.ascontiguousarray(field, dtype="<f8")]
        n = parts[0].shape[0]
    if parts[0].shape != (n, n):
        raise ValueError(f"expected square field, got {parts[0].shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, float(length), float(t), kind))
        for part in parts:
            fh.write(part.tobytes())


def read_field(path):
    """Read a CPF1 file; returns (data, meta) with meta {n, length, t, kind}."""
    raw = Path(path).read_bytes()
    magic, n, length, t, kind = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a CPF1 field file")
    meta = {"n": n, "length": length, "t": t, "kind": kind}
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if kind == KIND_SCALAR:
        if body.size != n * n:
            raise ValueError(f"{path}: truncated scalar payload")
        return body.reshape(n, n).copy(), meta
    if body.size != 2 * n * n:
        raise ValueError(f"{path}: truncated vector payload")
    u1 = body[: n * n].reshape(n, n).copy()
    u2 = body[n * n :].reshape(n, n).copy()
    return (u1, u2), meta


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header: list[str], rows) -> None:
    """Plain CSV with repr-exact floats; no quoting is ever needed here."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(repr(float(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
