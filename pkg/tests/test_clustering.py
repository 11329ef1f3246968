import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoprint.clustering import (
    ClusterConfig,
    GeodesicCells,
    assign_balanced,
    cluster,
    cluster_points,
    clustering_cost,
    half_sq_costs,
    render_cells,
    seed_kmeanspp,
    update_means,
)
from geoprint.errors import EmptyImageError, InfeasibleError
from geoprint.raster_io import BinaryRaster, PixelPoint, printable_coords
from geoprint.rng import SplitMix64

from oracles import balanced_optimum, best_linear_split_cost


def test_splitmix64_reference_vector():
    r = SplitMix64(0)
    assert [r.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F,
    ]


def test_rng_helpers_in_range():
    r = SplitMix64(123)
    assert all(0 <= r.below(7) < 7 for _ in range(200))
    assert all(0.0 <= r.uniform() < 1.0 for _ in range(200))
    with pytest.raises(ValueError):
        r.below(0)


# --- seeding -----------------------------------------------------------------

def test_seed_single_cluster_picks_a_point():
    pts = [PixelPoint(3, 1), PixelPoint(7, 2), PixelPoint(0, 9)]
    (m,) = seed_kmeanspp(pts, 1, 99)
    assert tuple(m) in {p.pos for p in pts}


@pytest.mark.parametrize("seed", range(10))
def test_seed_two_points_takes_both(seed):
    means = seed_kmeanspp([PixelPoint(0, 0), PixelPoint(10, 0)], 2, seed)
    assert sorted(map(tuple, means)) == [(0, 0), (10, 0)]


def test_seed_deterministic_and_distinct():
    rng = np.random.default_rng(5)
    pts = rng.integers(0, 50, size=(100, 2))
    a = seed_kmeanspp(pts, 5, 42)
    b = seed_kmeanspp(pts, 5, 42)
    assert np.array_equal(a, b)
    assert len({tuple(m) for m in a}) == 5


def test_seed_infeasible():
    with pytest.raises(InfeasibleError):
        seed_kmeanspp([PixelPoint(0, 0)], 2, 0)


# --- balanced assignment -------------------------------------------------------

def test_unit_square_corners():
    pts = np.array([(0, 0), (1, 0), (0, 1), (1, 1)])
    # brute force over all 16 memberships gives the unique optimum (0, 1, 0, 1), value 0.5
    a = assign_balanced(pts, [(0, 0.5), (1, 0.5)])
    assert a.tolist() == [0, 1, 0, 1]


def test_single_cluster_takes_everything():
    pts = np.array([(0, 0), (5, 5), (9, 1)])
    assert assign_balanced(pts, [(100, 100)]).tolist() == [0, 0, 0]


def test_collinear_tie_goes_to_lowest_cluster():
    pts = np.array([(0, 0), (1, 0), (2, 0)])
    # enumeration: optima (0,0,1) and (0,1,1), both 0.5; the tie rule picks cluster 0
    a = assign_balanced(pts, [(0, 0), (2, 0)])
    assert a.tolist() == [0, 0, 1]


def test_balanced_infeasible():
    with pytest.raises(InfeasibleError):
        assign_balanced(np.array([(0, 0)]), [(0, 0), (1, 1)])


def test_balance_forces_far_points():
    # all points sit on mean 0; cluster 1 must still get floor(6/2) = 3 of them
    pts = np.array([(i, 0) for i in range(6)])
    a = assign_balanced(pts, [(0, 0), (100, 0)])
    assert np.bincount(a, minlength=2).tolist() == [3, 3]
    assert a.tolist() == [0, 0, 0, 1, 1, 1]


@given(st.integers(0, 2**32), st.integers(1, 10), st.integers(1, 3))
@settings(max_examples=80, deadline=None)
def test_assign_matches_enumeration(seed, m, n):
    if m < n:
        return
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 6, size=(m, 2))
    means = rng.uniform(-1, 7, size=(n, 2))
    a = assign_balanced(pts, means)
    best, _ = balanced_optimum(pts, means)
    c = half_sq_costs(pts, means)
    assert np.bincount(a, minlength=n).min() >= m // n
    assert c[np.arange(m), a].sum() == pytest.approx(best, abs=1e-9)


# --- mean update ---------------------------------------------------------------

def test_update_means_cases():
    pts = np.array([(0, 0), (2, 0), (3, 7)])
    prev = np.array([(9.0, 9.0), (1.0, 1.0), (5.0, 5.0)])
    out = update_means(pts, np.array([0, 0, 1]), prev)
    assert out.tolist() == [[1.0, 0.0], [3.0, 7.0], [5.0, 5.0]]


# --- full clustering -------------------------------------------------------------

def _raster(grid):
    return BinaryRaster.from_array(np.asarray(grid, dtype=np.uint8))


def test_single_cell_centroid():
    rng = np.random.default_rng(3)
    g = (rng.random((20, 30)) < 0.3).astype(np.uint8)
    cells = cluster(_raster(g), ClusterConfig(1, 11))
    pts = printable_coords(_raster(g))
    assert cells.iterations_run <= 2
    assert np.allclose(cells.means[0], pts.mean(axis=0))
    assert (cells.assignment == 0).all()


def test_two_separated_blocks():
    g = np.zeros((5, 60), dtype=np.uint8)
    g[:, :5] = 1
    g[:, 55:] = 1
    r = _raster(g)
    pts = printable_coords(r)
    # oracle: best balanced linear split of these 50 points costs 100, the block split
    assert best_linear_split_cost(pts, 25, angles=360) == pytest.approx(100.0)
    for seed in range(5):
        cells = cluster(r, ClusterConfig(2, seed))
        assert clustering_cost(pts, cells.assignment, cells.means) == pytest.approx(100.0)
        left = pts[:, 0] < 5
        assert len(set(cells.assignment[left])) == 1
        assert len(set(cells.assignment[~left])) == 1
        assert sorted(map(tuple, cells.means.tolist())) == [(2.0, 2.0), (57.0, 2.0)]


def test_cluster_errors():
    with pytest.raises(EmptyImageError):
        cluster(_raster(np.zeros((3, 3))), ClusterConfig(1))
    with pytest.raises(InfeasibleError):
        cluster(_raster(np.eye(3)), ClusterConfig(4))
    with pytest.raises(ValueError):
        ClusterConfig(0)


@given(st.integers(0, 2**32), st.sampled_from([2, 3, 5]), st.floats(0.1, 0.5))
@settings(max_examples=12, deadline=None)
def test_cluster_invariants(seed, n, density):
    rng = np.random.default_rng(seed)
    g = (rng.random((24, 24)) < density).astype(np.uint8)
    r = _raster(g)
    if r.n_printable < n:
        return
    cells = cluster(r, ClusterConfig(n, seed))
    sizes = cells.sizes()
    assert sizes.sum() == r.n_printable
    assert sizes.min() >= r.n_printable // n
    h = np.asarray(cells.cost_history)
    assert (np.diff(h) <= 1e-9 * h[:-1]).all()
    again = cluster(r, ClusterConfig(n, seed))
    assert np.array_equal(cells.assignment, again.assignment)
    assert np.array_equal(cells.means, again.means)
    flat = [p for cell in cells.cells for p in cell]
    assert len(set(flat)) == len(flat) == r.n_printable


def test_json_roundtrip_and_render():
    g = np.zeros((8, 8), dtype=np.uint8)
    g[1:4, 1:4] = 1
    g[5:8, 5:8] = 1
    r = _raster(g)
    cells = cluster(r, ClusterConfig(2, 1))
    back = GeodesicCells.from_json(cells.to_json(), r)
    assert np.array_equal(back.assignment, cells.assignment)
    assert np.allclose(back.means, cells.means)
    img = render_cells(r, cells)
    assert img.shape == (8, 8, 3)
    assert (img[0, 0] == 255).all()
    assert (img[2, 2] == 0).all()  # mean cross at the first block's centroid
