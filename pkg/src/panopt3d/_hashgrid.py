"""Uniform spatial hash shared by the neighborhood-bounded kernels.

Points are binned into cubic cells and stored grouped by linearized cell key,
so a kernel can enumerate everything near a query point by scanning the 3x3x3
cell neighborhood. The cell edge carries a tiny safety factor above the query
radius, which guarantees (for coordinates within ~1e5 cells of the origin)
that any pair whose computed distance is below the radius lands in adjacent
cells even under floating-point rounding of the cell assignment.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numba import njit

__all__ = ["CellIndex", "build_cell_index", "EDGE_SAFETY", "find_group", "cell_key_of"]

EDGE_SAFETY = 1.0 + 1e-6


class CellIndex(NamedTuple):
    cells: np.ndarray      # (M, 3) int64 shifted cell coordinates, each >= 1
    sizes: np.ndarray      # (3,) int64 per-axis key extents (neighbors stay inside)
    uniq_keys: np.ndarray  # (U,) int64 sorted distinct linearized keys
    starts: np.ndarray     # (U + 1,) int64 group boundaries into `items`
    items: np.ndarray      # (M,) int64 point indices grouped by cell key
    origin: np.ndarray     # (3,) int64 shift applied to raw floor(coord / edge)
    edge: float            # cell edge length


def build_cell_index(coords: np.ndarray, radius: float) -> CellIndex:
    """Bin points into cells of edge ``radius * EDGE_SAFETY``."""
    m = coords.shape[0]
    edge = float(radius) * EDGE_SAFETY
    cells = np.floor(coords / edge).astype(np.int64)
    if m == 0:
        empty = np.empty(0, dtype=np.int64)
        return CellIndex(cells.reshape(0, 3), np.ones(3, dtype=np.int64), empty,
                         np.zeros(1, dtype=np.int64), empty, np.zeros(3, dtype=np.int64), edge)
    # shift so valid cells start at 1; +/-1 neighbors then stay in [0, size)
    origin = cells.min(axis=0) - 1
    cells -= origin
    sizes = cells.max(axis=0) + 2
    if float(np.log2(sizes.astype(np.float64)).sum()) >= 62.0:
        raise ValueError("point extent too large relative to the cell edge")
    keys = (cells[:, 0] * sizes[1] + cells[:, 1]) * sizes[2] + cells[:, 2]
    items = np.argsort(keys, kind="stable")
    sorted_keys = keys[items]
    uniq_keys, first = np.unique(sorted_keys, return_index=True)
    starts = np.append(first, m).astype(np.int64)
    return CellIndex(cells, sizes, uniq_keys, starts, items, origin, edge)


@njit(cache=True, inline="always")
def find_group(uniq_keys: np.ndarray, key: np.int64) -> int:
    """Binary-search a cell key; -1 if the cell is empty."""
    lo = 0
    hi = uniq_keys.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        v = uniq_keys[mid]
        if v == key:
            return mid
        if v < key:
            lo = mid + 1
        else:
            hi = mid
    return -1


@njit(cache=True, inline="always")
def cell_key_of(x: float, y: float, z: float, edge: float, origin: np.ndarray,
                sizes: np.ndarray) -> tuple[np.int64, np.int64, np.int64]:
    """Shifted cell coordinates for an arbitrary query position."""
    cx = np.int64(np.floor(x / edge)) - origin[0]
    cy = np.int64(np.floor(y / edge)) - origin[1]
    cz = np.int64(np.floor(z / edge)) - origin[2]
    return cx, cy, cz
