import numpy as np
import pytest

from edgeprune import InputError, PointSet, build_knn, gen_synthetic


def allpairs_oracle(points, k):
    """Independent k-NN: full distance matrix plus a (distance, index) sort."""
    n = len(points)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    idx = np.lexsort((np.tile(np.arange(n), (n, 1)), dist), axis=1)[:, :k]
    return np.take_along_axis(dist, idx, axis=1), idx


def test_collinear_hand_case():
    ps = PointSet(np.array([[0.0], [1.0], [3.0]]))
    nt = build_knn(ps, 2)
    assert np.array_equal(nt.indices[0], [1, 2])
    assert np.array_equal(nt.distances[0], [1.0, 3.0])
    assert np.array_equal(nt.indices[1], [0, 2])
    assert np.array_equal(nt.distances[1], [1.0, 2.0])


def test_duplicate_point_is_first_neighbor():
    ps = PointSet(np.array([[1.0, 1.0], [1.0, 1.0], [5.0, 5.0]]))
    nt = build_knn(ps, 2)
    assert nt.distances[0, 0] == 0.0
    assert nt.indices[0, 0] == 1
    assert nt.distances[1, 0] == 0.0
    assert nt.indices[1, 0] == 0


def test_tie_broken_by_smaller_index():
    ps = PointSet(np.array([[-1.0], [0.0], [1.0]]))
    nt = build_knn(ps, 2)
    # Point 1 sees points 0 and 2 both at distance 1; 0 must come first.
    assert np.array_equal(nt.indices[1], [0, 2])


def test_matches_allpairs_oracle_on_blobs():
    ps = gen_synthetic("blobs", {"clusters": 3, "size": 50, "separation": 8.0}, seed=7)
    nt = build_knn(ps, 20)
    dist, idx = allpairs_oracle(ps.points, 20)
    assert np.array_equal(nt.indices, idx)
    assert np.array_equal(nt.distances, dist)


def test_row_invariants():
    ps = gen_synthetic("moons", {"size": 60, "noise": 0.1}, seed=2)
    nt = build_knn(ps, 15)
    n = ps.n
    for r in range(n):
        row = nt.distances[r]
        assert np.all(np.diff(row) >= 0)
        assert np.all(row >= 0)
        assert r not in nt.indices[r]
        assert len(set(nt.indices[r].tolist())) == nt.k_max


def test_determinism():
    ps = gen_synthetic("circles", {"radii": [1.0, 2.0], "size": 30, "noise": 0.02}, seed=9)
    a = build_knn(ps, 10)
    b = build_knn(ps, 10)
    assert np.array_equal(a.distances, b.distances)
    assert np.array_equal(a.indices, b.indices)


@pytest.mark.parametrize("bad_k", [0, -1, 100])
def test_k_max_out_of_range(bad_k):
    ps = PointSet(np.zeros((5, 2)) + np.arange(5)[:, None])
    with pytest.raises(InputError):
        build_knn(ps, bad_k)


def test_k_max_full_range_allowed():
    ps = PointSet(np.arange(10, dtype=float)[:, None])
    nt = build_knn(ps, 9)
    assert nt.distances.shape == (10, 9)
