"""Grid projections between point clouds and dense 2-D feature maps.

Three grid views are supported, each reducing a 3-D point to two planar
coordinates before rasterization:

* ``bev_cartesian`` — (x, y)
* ``polar``         — (rho, theta) with rho = sqrt(x^2 + y^2), theta = atan2(y, x)
* ``range``         — (elevation, azimuth) in radians

A cell is the floor of the linear mapping from per-axis bounds onto the grid
shape: axis 0 maps to rows (H), axis 1 to columns (W). Points at or beyond the
upper bound fall out of bounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .validation import check_confidence, check_coords, check_offsets

__all__ = ["GridSpec", "ShiftedPoints", "point_to_cell", "scatter_to_grid",
           "gather_from_grid", "shift_points", "GRID_VIEWS"]

GRID_VIEWS = ("bev_cartesian", "polar", "range")


@dataclass(frozen=True)
class GridSpec:
    """Geometry of one 2-D grid: view, per-axis bounds, and shape (H, W)."""

    view: str
    bounds: tuple[tuple[float, float], tuple[float, float]]
    shape: tuple[int, int]

    def __post_init__(self):
        if self.view not in GRID_VIEWS:
            raise ValueError(f"view must be one of {GRID_VIEWS}, got {self.view!r}")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) != 2:
            raise ValueError("bounds must give (min, max) for both grid axes")
        for lo, hi in bounds:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds must satisfy min < max, got ({lo}, {hi})")
        shape = (int(self.shape[0]), int(self.shape[1]))
        if shape[0] <= 0 or shape[1] <= 0:
            raise ValueError(f"shape must be positive, got {shape}")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "shape", shape)

    def to_json_dict(self) -> dict:
        return {"view": self.view,
                "bounds": [list(b) for b in self.bounds],
                "shape": list(self.shape)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "GridSpec":
        return cls(view=data["view"],
                   bounds=tuple(tuple(b) for b in data["bounds"]),
                   shape=tuple(data["shape"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "GridSpec":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _planar_coords(coords: np.ndarray, view: str) -> np.ndarray:
    """Reduce (N, 3) points to the view's two planar coordinates."""
    x, y, z = coords[:, 0], coords[:, 1], coords[:, 2]
    if view == "bev_cartesian":
        return np.stack([x, y], axis=1)
    if view == "polar":
        rho = np.sqrt(x * x + y * y)
        theta = np.arctan2(y, x)
        return np.stack([rho, theta], axis=1)
    if view == "range":
        rho = np.sqrt(x * x + y * y)
        elevation = np.arctan2(z, rho)
        azimuth = np.arctan2(y, x)
        return np.stack([elevation, azimuth], axis=1)
    raise ValueError(f"unknown view {view!r}")


def _continuous_cells(coords: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Map points to continuous grid coordinates (row, col), cell units."""
    planar = _planar_coords(coords, spec.view)
    out = np.empty_like(planar)
    for axis in range(2):
        lo, hi = spec.bounds[axis]
        out[:, axis] = (planar[:, axis] - lo) / (hi - lo) * spec.shape[axis]
    return out


def point_to_cell(coords, spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Map points to integer cells.

    Returns ``(cells, in_bounds)`` where ``cells`` is (N, 2) int64 of
    (row, col) indices and ``in_bounds`` flags points that land inside the
    grid. Cell values for out-of-bounds points are the raw floors and should
    not be used as indices.
    """
    coords = check_coords(coords)
    lin = _continuous_cells(coords, spec)
    cells = np.floor(lin).astype(np.int64)
    in_bounds = ((cells[:, 0] >= 0) & (cells[:, 0] < spec.shape[0])
                 & (cells[:, 1] >= 0) & (cells[:, 1] < spec.shape[1]))
    return cells, in_bounds


def scatter_to_grid(coords, features, spec: GridSpec, *, return_dropped: bool = False):
    """Scatter per-point features onto the grid with element-wise max.

    Every in-bounds point contributes to exactly one cell; a cell's value is
    the element-wise maximum over its contributors and empty cells stay
    all-zero. Out-of-bounds points are dropped silently; pass
    ``return_dropped=True`` to also get their count.
    """
    coords = check_coords(coords)
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim == 1:
        feats = feats[:, None]
    if feats.shape[0] != coords.shape[0]:
        raise ValueError(f"features has {feats.shape[0]} rows, expected {coords.shape[0]}")

    h, w = spec.shape
    f = feats.shape[1]
    cells, in_bounds = point_to_cell(coords, spec)
    flat = cells[in_bounds, 0] * w + cells[in_bounds, 1]

    grid = np.full((h * w, f), -np.inf, dtype=np.float64)
    np.maximum.at(grid, flat, feats[in_bounds])
    occupied = np.zeros(h * w, dtype=bool)
    occupied[flat] = True
    grid[~occupied] = 0.0
    grid = grid.reshape(h, w, f)

    if return_dropped:
        return grid, int(coords.shape[0] - in_bounds.sum())
    return grid


def gather_from_grid(grid, coords, spec: GridSpec, *, mode: str = "bilinear",
                     return_missed: bool = False):
    """Sample grid features back at point locations.

    ``bilinear`` interpolates between the four surrounding cell centers,
    clamped at grid borders; ``nearest`` picks the containing cell. Points
    outside the grid bounds receive all-zero vectors.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim == 2:
        grid = grid[:, :, None]
    h, w, f = grid.shape
    if (h, w) != spec.shape:
        raise ValueError(f"grid shape {(h, w)} does not match spec shape {spec.shape}")
    if mode not in ("bilinear", "nearest"):
        raise ValueError(f"mode must be 'bilinear' or 'nearest', got {mode!r}")

    coords = check_coords(coords)
    cells, in_bounds = point_to_cell(coords, spec)
    out = np.zeros((coords.shape[0], f), dtype=np.float64)

    if mode == "nearest":
        rows, cols = cells[in_bounds, 0], cells[in_bounds, 1]
        out[in_bounds] = grid[rows, cols]
    else:
        # continuous coords relative to cell centers: cell (i, j) center sits
        # at (i + 0.5, j + 0.5) in floor space
        lin = _continuous_cells(coords, spec)[in_bounds] - 0.5
        i0 = np.floor(lin[:, 0]).astype(np.int64)
        j0 = np.floor(lin[:, 1]).astype(np.int64)
        wi = lin[:, 0] - i0
        wj = lin[:, 1] - j0
        i0c = np.clip(i0, 0, h - 1)
        i1c = np.clip(i0 + 1, 0, h - 1)
        j0c = np.clip(j0, 0, w - 1)
        j1c = np.clip(j0 + 1, 0, w - 1)
        wi = wi[:, None]
        wj = wj[:, None]
        out[in_bounds] = ((1 - wi) * (1 - wj) * grid[i0c, j0c]
                          + (1 - wi) * wj * grid[i0c, j1c]
                          + wi * (1 - wj) * grid[i1c, j0c]
                          + wi * wj * grid[i1c, j1c])

    if return_missed:
        return out, int(coords.shape[0] - in_bounds.sum())
    return out


@dataclass(frozen=True)
class ShiftedPoints:
    """Result of a confidence-gated shift: moved coordinates plus gate mask."""

    coords: np.ndarray        # (N, 3) float64
    shifted_mask: np.ndarray  # (N,) bool, True where the offset was applied


def shift_points(coords, offsets, confidence, delta: float = 0.2) -> ShiftedPoints:
    """Apply predicted offsets only where confidence strictly exceeds delta.

    Points at or below the gate keep their original coordinates exactly.
    Offsets on gated-in points must be finite.
    """
    coords = check_coords(coords)
    n = coords.shape[0]
    offsets = check_offsets(offsets, n, allow_nonfinite=True)
    confidence = check_confidence(confidence, n)
    delta = float(delta)

    mask = confidence > delta
    if mask.any() and not np.isfinite(offsets[mask]).all():
        raise ValueError("offsets must be finite on points passing the confidence gate")
    shifted = coords.copy()
    shifted[mask] += offsets[mask]
    return ShiftedPoints(coords=shifted, shifted_mask=mask)
