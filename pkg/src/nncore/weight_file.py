# src/nncore/weight_file.py
"""
FCNW weight files.

Layout (little-endian): magic "FCNW", u32 version=1, u32 tensor count, then per
tensor: u16 name length, UTF-8 name, u8 rank, rank x u32 extents, f32 payload.
Tensors are written in the order given, so equal inputs give identical bytes.
"""

import struct
from pathlib import Path

import numpy as np

from src.utils.error_handling import WeightFileError

WEIGHT_FILE_MAGIC = b"FCNW"
WEIGHT_FILE_VERSION = 1
WEIGHT_FILE_SUFFIX = ".fcnw"


def encode_weights(tensors: dict[str, np.ndarray]) -> bytes:
    chunks = [struct.pack("<4sII", WEIGHT_FILE_MAGIC, WEIGHT_FILE_VERSION, len(tensors))]
    for name, array in tensors.items():
        encoded_name = name.encode("utf-8")
        array = np.asarray(array)
        if len(encoded_name) > 0xFFFF:
            raise WeightFileError(f"Tensor name too long: {name[:40]}...")
        if array.ndim > 0xFF:
            raise WeightFileError(f"Tensor '{name}' has rank {array.ndim}, above 255")
        chunks.append(struct.pack("<H", len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(struct.pack(f"<B{array.ndim}I", array.ndim, *array.shape))
        chunks.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
    return b"".join(chunks)


def decode_weights(payload: bytes, source: str = "<bytes>") -> dict[str, np.ndarray]:
    """
    Parses an FCNW payload into an ordered name -> float32 array mapping.

    Raises:
        WeightFileError: On a bad magic or version, truncation, duplicate names
            or trailing bytes.
    """
    view = memoryview(payload)
    offset = 0

    def take(n_bytes: int, what: str) -> memoryview:
        nonlocal offset
        if offset + n_bytes > len(view):
            raise WeightFileError(f"{source}: truncated while reading {what} at byte {offset}")
        chunk = view[offset : offset + n_bytes]
        offset += n_bytes
        return chunk

    magic, version, count = struct.unpack("<4sII", take(12, "header"))
    if magic != WEIGHT_FILE_MAGIC:
        raise WeightFileError(f"{source}: bad magic {magic!r}, expected {WEIGHT_FILE_MAGIC!r}")
    if version != WEIGHT_FILE_VERSION:
        raise WeightFileError(f"{source}: unsupported version {version}")

    tensors: dict[str, np.ndarray] = {}
    for index in range(count):
        (name_length,) = struct.unpack("<H", take(2, f"name length of tensor {index}"))
        try:
            name = bytes(take(name_length, f"name of tensor {index}")).decode("utf-8")
        except UnicodeDecodeError as e:
            raise WeightFileError(f"{source}: tensor {index} has an invalid UTF-8 name: {e}")
        (rank,) = struct.unpack("<B", take(1, f"rank of '{name}'"))
        shape = struct.unpack(f"<{rank}I", take(4 * rank, f"extents of '{name}'"))
        n_values = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(take(4 * n_values, f"payload of '{name}'"), dtype="<f4")
        if name in tensors:
            raise WeightFileError(f"{source}: duplicate tensor name '{name}'")
        tensors[name] = values.reshape(shape).astype(np.float32)

    if offset != len(view):
        raise WeightFileError(
            f"{source}: {len(view) - offset} trailing bytes after {count} tensors"
        )
    return tensors


def save_weights(tensors: dict[str, np.ndarray], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_weights(tensors))
    return path


def load_weights(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise WeightFileError(f"Weight file not found: {path}")
    return decode_weights(path.read_bytes(), source=str(path))
