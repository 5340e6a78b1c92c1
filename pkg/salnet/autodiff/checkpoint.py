"""
Binary checkpoint codec.

Layout (all little-endian):
    magic  b"SALNET01"
    u32    parameter count
    per parameter (sorted by name):
        u16 name length, UTF-8 name
        u8  rank, u32 x rank dimensions
        f32 x prod(dims), row-major
"""

import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from salnet.autodiff.value import DiffValue
from salnet.config.constants import CHECKPOINT_MAGIC
from salnet.shared.exceptions import CheckpointError, UnreadableFileError

ParamLike = Union[DiffValue, np.ndarray]


def encode_checkpoint(params: Mapping[str, ParamLike]) -> bytes:
    chunks = [CHECKPOINT_MAGIC, struct.pack("<I", len(params))]
    for name in sorted(params):
        value = params[name]
        data = value.data if isinstance(value, DiffValue) else np.asarray(value)
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", data.ndim))
        chunks.append(struct.pack(f"<{data.ndim}I", *data.shape))
        chunks.append(np.ascontiguousarray(data, dtype="<f4").tobytes())
    return b"".join(chunks)


def decode_checkpoint(blob: bytes) -> Dict[str, np.ndarray]:
    """Decode checkpoint bytes into float64 arrays (values are float32-exact)."""
    if blob[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError("Bad checkpoint magic", details={"magic": blob[:8]})
    offset = len(CHECKPOINT_MAGIC)
    try:
        (count,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        params: Dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            name = blob[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<B", blob, offset)
            offset += 1
            dims = struct.unpack_from(f"<{rank}I", blob, offset)
            offset += 4 * rank
            size = int(np.prod(dims, dtype=np.int64))
            raw = np.frombuffer(blob, dtype="<f4", count=size, offset=offset)
            offset += 4 * size
            params[name] = raw.astype(np.float64).reshape(dims)
    except (struct.error, ValueError, UnicodeDecodeError) as e:
        raise CheckpointError("Truncated or corrupt checkpoint", original_error=e) from e
    if offset != len(blob):
        raise CheckpointError("Trailing bytes after checkpoint payload", details={"extra": len(blob) - offset})
    return params


def save_checkpoint(path: Path, params: Mapping[str, ParamLike]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(params))
    return path


def load_checkpoint(path: Path) -> Dict[str, np.ndarray]:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise UnreadableFileError("Cannot read checkpoint", path=str(path), original_error=e) from e
    return decode_checkpoint(blob)


def assign_checkpoint(params: Mapping[str, DiffValue], loaded: Mapping[str, np.ndarray]) -> None:
    """
    Copy loaded arrays into existing parameters.

    Raises:
        CheckpointError: names or shapes differ from the model's parameters
    """
    missing = sorted(set(params) - set(loaded))
    unexpected = sorted(set(loaded) - set(params))
    if missing or unexpected:
        raise CheckpointError(
            "Checkpoint parameters do not match the model",
            details={"missing": missing, "unexpected": unexpected},
        )
    for name, value in params.items():
        if loaded[name].shape != value.shape:
            raise CheckpointError(
                "Checkpoint shape mismatch",
                details={"parameter": name, "expected": value.shape, "found": loaded[name].shape},
            )
    for name, value in params.items():
        value.data = np.array(loaded[name], dtype=np.float64)
        value.zero_adjoint()
