"""Binary codecs for scan, label, offset, and confidence files.

All formats are little-endian and dense:

========  =======================  ==========================================
suffix    record                   contents
========  =======================  ==========================================
.bin      4 x float32              x, y, z, intensity per point
.label    1 x uint32               semantic in low 16 bits, instance in high
.off      3 x float32              per-point offset vector
.conf     1 x float32              per-point confidence in [0, 1]
========  =======================  ==========================================
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import PanopticLabels, PointCloud
from .errors import CodecError

__all__ = [
    "decode_labels", "encode_labels",
    "read_labels", "write_labels",
    "read_point_cloud", "write_point_cloud",
    "read_offsets", "write_offsets",
    "read_confidence", "write_confidence",
]

_U32 = np.dtype("<u4")
_F32 = np.dtype("<f4")
_FIELD_MAX = np.uint32(0xFFFF)


def decode_labels(raw: np.ndarray) -> PanopticLabels:
    """Unpack uint32 words into (semantic, instance) label arrays.

    The semantic class id occupies the low 16 bits, the instance id the high
    16 bits of each word.
    """
    words = np.asarray(raw)
    if words.ndim != 1:
        raise CodecError(f"label words must be 1-D, got shape {words.shape}")
    if not np.issubdtype(words.dtype, np.integer):
        raise CodecError(f"label words must be integer-typed, got {words.dtype}")
    words = words.astype(np.uint32, copy=False)
    semantic = (words & _FIELD_MAX).astype(np.uint32)
    instance = (words >> np.uint32(16)).astype(np.uint32)
    return PanopticLabels(semantic=semantic, instance=instance)


def encode_labels(labels: PanopticLabels) -> np.ndarray:
    """Pack (semantic, instance) into uint32 words; inverse of decode_labels."""
    sem = labels.semantic
    inst = labels.instance
    if sem.size and int(sem.max()) > 0xFFFF:
        raise OverflowError(f"semantic id {int(sem.max())} exceeds 16-bit field")
    if inst.size and int(inst.max()) > 0xFFFF:
        raise OverflowError(f"instance id {int(inst.max())} exceeds 16-bit field")
    return (inst.astype(np.uint32) << np.uint32(16)) | sem.astype(np.uint32)


def _read_records(path: str | Path, dtype: np.dtype, record_bytes: int, what: str) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) % record_bytes != 0:
        raise CodecError(
            f"{path}: size {len(data)} is not a multiple of {record_bytes} ({what})")
    return np.frombuffer(data, dtype=dtype)


def read_labels(path: str | Path) -> PanopticLabels:
    """Read a .label file of packed uint32 words."""
    return decode_labels(_read_records(path, _U32, 4, "uint32 label words"))


def write_labels(path: str | Path, labels: PanopticLabels) -> None:
    Path(path).write_bytes(encode_labels(labels).astype(_U32).tobytes())


def read_point_cloud(path: str | Path) -> PointCloud:
    """Read a .bin file of packed (x, y, z, intensity) float32 quadruples."""
    flat = _read_records(path, _F32, 16, "float32 x,y,z,intensity quadruples")
    pts = flat.reshape(-1, 4).astype(np.float64)
    return PointCloud(coords=pts[:, :3], features=pts[:, 3:])


def write_point_cloud(path: str | Path, cloud: PointCloud) -> None:
    n = len(cloud)
    out = np.zeros((n, 4), dtype=_F32)
    out[:, :3] = cloud.coords.astype(_F32)
    if cloud.features.shape[1] >= 1:
        out[:, 3] = cloud.features[:, 0].astype(_F32)
    Path(path).write_bytes(out.tobytes())


def read_offsets(path: str | Path) -> np.ndarray:
    """Read a .off file of packed float32 3-vectors as float64 (N, 3)."""
    flat = _read_records(path, _F32, 12, "float32 offset 3-vectors")
    return flat.reshape(-1, 3).astype(np.float64)


def write_offsets(path: str | Path, offsets: np.ndarray) -> None:
    arr = np.asarray(offsets, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise CodecError(f"offsets must have shape (N, 3), got {arr.shape}")
    Path(path).write_bytes(arr.astype(_F32).tobytes())


def read_confidence(path: str | Path) -> np.ndarray:
    """Read a .conf file of packed float32 scalars as float64 (N,)."""
    return _read_records(path, _F32, 4, "float32 confidences").astype(np.float64)


def write_confidence(path: str | Path, confidence: np.ndarray) -> None:
    arr = np.asarray(confidence, dtype=np.float64)
    if arr.ndim != 1:
        raise CodecError(f"confidence must be 1-D, got shape {arr.shape}")
    Path(path).write_bytes(arr.astype(_F32).tobytes())
