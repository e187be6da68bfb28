"""Input validation helpers.

Small check_* utilities in the spirit of ``sklearn.utils.validation``:
they coerce array-likes to canonical dtypes/shapes and raise ``ValueError``
with a readable message when an input cannot be used.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_coords",
    "check_offsets",
    "check_confidence",
    "check_class_ids",
    "check_instance_ids",
    "check_same_length",
]


def check_coords(coords, *, name: str = "coords") -> np.ndarray:
    """Coerce to a finite float64 array of shape (N, 3)."""
    arr = np.asarray(coords, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3), got {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite (no NaN/Inf)")
    return arr


def check_offsets(offsets, n: int | None = None, *, allow_nonfinite: bool = False,
                  name: str = "offsets") -> np.ndarray:
    """Coerce to a float64 array of shape (N, 3); finite unless allowed otherwise."""
    arr = np.asarray(offsets, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3), got {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has {arr.shape[0]} rows, expected {n}")
    if not allow_nonfinite and arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite (no NaN/Inf)")
    return arr


def check_confidence(confidence, n: int | None = None, *, name: str = "confidence") -> np.ndarray:
    """Coerce to a float64 vector with every value inside [0, 1]."""
    arr = np.asarray(confidence, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if arr.size:
        if not np.isfinite(arr).all():
            raise ValueError(f"{name} must be finite")
        lo, hi = float(arr.min()), float(arr.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got range [{lo}, {hi}]")
    return arr


def check_class_ids(values, n: int | None = None, *, name: str = "semantic") -> np.ndarray:
    """Coerce to a non-negative uint32 vector of class ids."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if arr.size and np.issubdtype(arr.dtype, np.signedinteger) and int(arr.min()) < 0:
        raise ValueError(f"{name} must be non-negative")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{name} must be integer-typed, got {arr.dtype}")
    return arr.astype(np.uint32)


def check_instance_ids(values, n: int | None = None, *, name: str = "instance") -> np.ndarray:
    """Coerce to a non-negative uint32 vector of instance ids."""
    return check_class_ids(values, n, name=name)


def check_same_length(*arrays_with_names) -> int:
    """Assert that all (array, name) pairs share the same first dimension."""
    n = None
    first = None
    for arr, name in arrays_with_names:
        if n is None:
            n, first = arr.shape[0], name
        elif arr.shape[0] != n:
            raise ValueError(f"{name} has length {arr.shape[0]} but {first} has {n}")
    return 0 if n is None else int(n)
