"""Grid projection semantics: cell mapping, scatter max, bilinear gather."""
import numpy as np
import pytest

from panopt3d import (GridSpec, gather_from_grid, point_to_cell,
                      scatter_to_grid, shift_points)


BEV = GridSpec(view="bev_cartesian", bounds=((-50.0, 50.0), (-50.0, 50.0)),
               shape=(600, 600))


def test_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(view="spherical", bounds=((-1, 1), (-1, 1)), shape=(4, 4))
    with pytest.raises(ValueError):
        GridSpec(view="polar", bounds=((1, 1), (-1, 1)), shape=(4, 4))
    with pytest.raises(ValueError):
        GridSpec(view="range", bounds=((-1, 1), (-1, 1)), shape=(0, 4))


def test_spec_json_roundtrip(tmp_path):
    path = tmp_path / "g.json"
    BEV.save(path)
    assert GridSpec.load(path) == BEV


def test_point_to_cell_examples():
    pts = np.array([
        [0.0, 0.0, 0.0],      # center -> (300, 300)
        [-50.0, -50.0, 0.0],  # lower corner -> (0, 0)
        [49.9999, -50.0, 0.0],
        [50.0, 0.0, 0.0],     # at the upper bound -> out of bounds
        [-50.1, 0.0, 0.0],    # below the lower bound
    ])
    cells, ok = point_to_cell(pts, BEV)
    np.testing.assert_array_equal(cells[0], [300, 300])
    np.testing.assert_array_equal(cells[1], [0, 0])
    np.testing.assert_array_equal(cells[2], [599, 0])
    np.testing.assert_array_equal(ok, [True, True, True, False, False])


def test_axis0_maps_to_rows():
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 4.0), (0.0, 2.0)),
                    shape=(4, 2))
    cells, ok = point_to_cell(np.array([[3.5, 0.5, 0.0]]), spec)
    assert ok[0]
    np.testing.assert_array_equal(cells[0], [3, 0])  # x -> row, y -> col


def test_polar_and_range_views():
    polar = GridSpec(view="polar", bounds=((0.0, 10.0), (-np.pi, np.pi)),
                     shape=(10, 8))
    # point at x=5, y=0: rho=5 -> row 5; theta=0 -> col 4
    cells, ok = point_to_cell(np.array([[5.0, 0.0, 3.0]]), polar)
    assert ok[0]
    np.testing.assert_array_equal(cells[0], [5, 4])

    rng_spec = GridSpec(view="range",
                        bounds=((-np.pi / 2, np.pi / 2), (-np.pi, np.pi)),
                        shape=(4, 8))
    # straight up: elevation pi/2 is at the upper bound -> out of bounds;
    # horizontal forward: elevation 0 -> row 2, azimuth 0 -> col 4
    cells, ok = point_to_cell(np.array([[1.0, 0.0, 0.0]]), rng_spec)
    assert ok[0]
    np.testing.assert_array_equal(cells[0], [2, 4])


def test_scatter_matches_percell_oracle(rng):
    spec = GridSpec(view="bev_cartesian", bounds=((-2.0, 2.0), (-2.0, 2.0)),
                    shape=(5, 7))
    pts = rng.uniform(-2.5, 2.5, (400, 3))
    feats = rng.normal(0, 1, (400, 2))
    grid, dropped = scatter_to_grid(pts, feats, spec, return_dropped=True)

    cells, ok = point_to_cell(pts, spec)
    assert dropped == int((~ok).sum())
    expect = np.zeros((5, 7, 2))
    for i in range(5):
        for j in range(7):
            rows = ok & (cells[:, 0] == i) & (cells[:, 1] == j)
            if rows.any():
                expect[i, j] = feats[rows].max(axis=0)
    np.testing.assert_allclose(grid, expect)


def test_scatter_empty_cells_zero_and_negative_max():
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 2.0), (0.0, 2.0)),
                    shape=(2, 2))
    pts = np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]])
    grid = scatter_to_grid(pts, np.array([-3.0, -1.0]), spec)
    assert grid[0, 0, 0] == -1.0   # max of negatives survives (not clamped to 0)
    assert grid[1, 1, 0] == 0.0    # empty cell -> exactly zero


def test_scatter_permutation_invariant(rng):
    spec = GridSpec(view="bev_cartesian", bounds=((-1.0, 1.0), (-1.0, 1.0)),
                    shape=(4, 4))
    pts = rng.uniform(-1, 1, (200, 3))
    feats = rng.normal(0, 1, 200)
    perm = rng.permutation(200)
    a = scatter_to_grid(pts, feats, spec)
    b = scatter_to_grid(pts[perm], feats[perm], spec)
    np.testing.assert_array_equal(a, b)


def test_gather_at_cell_centers_returns_cell_values(rng):
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 4.0), (0.0, 4.0)),
                    shape=(4, 4))
    grid = rng.normal(0, 1, (4, 4, 1))
    # cell (i, j) center is at continuous coords (i+0.5, j+0.5) -> x=i+0.5
    centers = np.array([[i + 0.5, j + 0.5, 0.0] for i in range(4) for j in range(4)])
    out = gather_from_grid(grid, centers, spec)
    np.testing.assert_allclose(out[:, 0], grid[:, :, 0].ravel(), atol=1e-12)


def test_gather_midpoint_averages_neighbors():
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 2.0), (0.0, 1.0)),
                    shape=(2, 1))
    grid = np.array([[[2.0]], [[6.0]]])
    # halfway between the two cell centers along rows
    out = gather_from_grid(grid, np.array([[1.0, 0.5, 0.0]]), spec)
    np.testing.assert_allclose(out, [[4.0]])


def test_gather_out_of_bounds_zero_and_missed():
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 1.0), (0.0, 1.0)),
                    shape=(2, 2))
    grid = np.ones((2, 2, 1))
    out, missed = gather_from_grid(grid, np.array([[5.0, 5.0, 0.0]]), spec,
                                   return_missed=True)
    assert missed == 1
    np.testing.assert_array_equal(out, [[0.0]])


def test_gather_border_clamped():
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 2.0), (0.0, 2.0)),
                    shape=(2, 2))
    grid = np.arange(4, dtype=float).reshape(2, 2, 1)
    # a point inside the first cell but before its center: clamp, no wrap
    out = gather_from_grid(grid, np.array([[0.1, 0.1, 0.0]]), spec)
    np.testing.assert_allclose(out, [[0.0]])


def test_gather_nearest_mode():
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 2.0), (0.0, 2.0)),
                    shape=(2, 2))
    grid = np.arange(4, dtype=float).reshape(2, 2, 1)
    out = gather_from_grid(grid, np.array([[1.9, 0.1, 0.0]]), spec, mode="nearest")
    np.testing.assert_array_equal(out, [[2.0]])
    with pytest.raises(ValueError):
        gather_from_grid(grid, np.zeros((1, 3)), spec, mode="cubic")


def test_scatter_gather_roundtrip_at_centers(rng):
    spec = GridSpec(view="bev_cartesian", bounds=((0.0, 8.0), (0.0, 8.0)),
                    shape=(8, 8))
    centers = np.array([[i + 0.5, j + 0.5, 0.0]
                        for i in range(8) for j in range(8)])
    feats = rng.normal(0, 1, 64)
    grid = scatter_to_grid(centers, feats, spec)
    back = gather_from_grid(grid, centers, spec)
    np.testing.assert_allclose(back[:, 0], feats, atol=1e-12)


def test_shift_gate_is_strict(rng):
    coords = np.zeros((3, 3))
    offsets = np.ones((3, 3))
    conf = np.array([0.2, 0.2000001, 0.9])
    res = shift_points(coords, offsets, conf, delta=0.2)
    np.testing.assert_array_equal(res.shifted_mask, [False, True, True])
    np.testing.assert_array_equal(res.coords[0], [0, 0, 0])
    np.testing.assert_array_equal(res.coords[1], [1, 1, 1])


def test_shift_nonfinite_offsets():
    coords = np.zeros((2, 3))
    offsets = np.array([[np.nan, 0, 0], [1, 1, 1]])
    # non-finite offset on a gated-out point is fine
    res = shift_points(coords, offsets, np.array([0.0, 1.0]), delta=0.5)
    np.testing.assert_array_equal(res.coords[0], [0, 0, 0])
    # ... but an error when the gate lets it through
    with pytest.raises(ValueError):
        shift_points(coords, offsets, np.array([0.9, 1.0]), delta=0.5)
