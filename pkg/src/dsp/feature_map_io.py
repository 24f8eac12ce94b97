# src/dsp/feature_map_io.py

import struct
from pathlib import Path

import numpy as np

from src.dsp.dsp_dataclasses import FeatureMap
from src.utils.error_handling import FeatureMapFormatError

FEATURE_MAP_MAGIC = b"MFCM"
FEATURE_MAP_VERSION = 1
FEATURE_MAP_SUFFIX = ".mfcm"
_HEADER = struct.Struct("<4sIII")


def encode_feature_map(feature_map: FeatureMap) -> bytes:
    header = _HEADER.pack(FEATURE_MAP_MAGIC, FEATURE_MAP_VERSION, feature_map.p, feature_map.t)
    return header + feature_map.values.astype("<f4").tobytes(order="C")


def decode_feature_map(payload: bytes, source: str = "<bytes>") -> FeatureMap:
    if len(payload) < _HEADER.size:
        raise FeatureMapFormatError(f"{source}: truncated header ({len(payload)} bytes)")
    magic, version, p, t = _HEADER.unpack_from(payload)
    if magic != FEATURE_MAP_MAGIC:
        raise FeatureMapFormatError(f"{source}: bad magic {magic!r}, expected {FEATURE_MAP_MAGIC!r}")
    if version != FEATURE_MAP_VERSION:
        raise FeatureMapFormatError(f"{source}: unsupported version {version}")
    expected = _HEADER.size + 4 * p * t
    if len(payload) != expected:
        raise FeatureMapFormatError(
            f"{source}: size {len(payload)} bytes does not match header (expected {expected})"
        )
    values = np.frombuffer(payload, dtype="<f4", offset=_HEADER.size).reshape(p, t)
    return FeatureMap(values=values.astype(np.float32))


def save_feature_map(feature_map: FeatureMap, path: str | Path) -> Path:
    """Writes the map as an .mfcm file: header then p*t little-endian f32, row-major."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_feature_map(feature_map))
    return path


def load_feature_map(path: str | Path) -> FeatureMap:
    path = Path(path)
    return decode_feature_map(path.read_bytes(), source=str(path))
