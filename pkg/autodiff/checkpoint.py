"""
Flat binary tensor container

    b"INSMIXW1"
    repeated until EOF:
        u64 name length, name bytes (UTF-8)
        u64 rank, rank × u64 extents
        product(extents) × f64 values
All integers and floats little-endian.
"""
from __future__ import annotations

import logging
import struct
from pathlib import Path
from typing import Dict, Mapping

import numpy as np

from dataset.io import PathLike
from models.exceptions import CheckpointFormatError, DatasetIOError

logger = logging.getLogger(__name__)

MAGIC = b"INSMIXW1"
_U64 = struct.Struct("<Q")


def save_tensors(path: PathLike, tensors: Mapping[str, np.ndarray]) -> None:
    chunks = [MAGIC]
    for name, array in tensors.items():
        array = np.asarray(array, dtype="<f8")
        encoded = name.encode("utf-8")
        chunks.append(_U64.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_U64.pack(array.ndim))
        chunks.extend(_U64.pack(int(e)) for e in array.shape)
        chunks.append(np.ascontiguousarray(array).tobytes())
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(chunks))
    except OSError as e:
        raise DatasetIOError(f"cannot write checkpoint {path}: {e}") from e
    logger.info("checkpoint written: %s (%d tensors)", path, len(tensors))


def load_tensors(path: PathLike) -> Dict[str, np.ndarray]:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise DatasetIOError(f"cannot read checkpoint {path}: {e}") from e
    if not blob.startswith(MAGIC):
        raise CheckpointFormatError(f"{path} does not start with {MAGIC!r}")

    out: Dict[str, np.ndarray] = {}
    pos = len(MAGIC)

    def u64() -> int:
        nonlocal pos
        if pos + 8 > len(blob):
            raise CheckpointFormatError(f"{path} truncated at byte {pos}")
        (value,) = _U64.unpack_from(blob, pos)
        pos += 8
        return value

    while pos < len(blob):
        length = u64()
        if pos + length > len(blob):
            raise CheckpointFormatError(f"{path} truncated inside a tensor name")
        name = blob[pos:pos + length].decode("utf-8")
        pos += length
        shape = tuple(u64() for _ in range(u64()))
        count = int(np.prod(shape, dtype=np.int64))
        end = pos + 8 * count
        if end > len(blob):
            raise CheckpointFormatError(f"{path} truncated inside tensor {name!r}")
        out[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=pos).astype(np.float64).reshape(shape)
        pos = end
    return out
