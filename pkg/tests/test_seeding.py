import logging

import numpy as np
import pytest

from placecenter import classical_mds_seed, parse_variant, spherical_seed, total_cost
from placecenter.geometry import pairwise_distances
from placecenter.seeding import random_sphere_points, top_eigen_coordinates


def test_three_points_on_a_line():
    D = np.abs(np.subtract.outer([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]))
    X = classical_mds_seed(D, 1)
    assert sorted(np.round(np.abs(X.ravel()), 12)) == [0.0, 1.0, 1.0]
    assert sorted(np.round(X.ravel(), 12)) == [-1.0, 0.0, 1.0]
    assert np.allclose(pairwise_distances("euclidean", X), D, atol=1e-9)


def test_two_points():
    X = classical_mds_seed(np.array([[0.0, 1.0], [1.0, 0.0]]), 1)
    assert np.allclose(np.sort(X.ravel()), [-0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("k", [2, 3])
def test_realizable_matrix_recovered(rng, k):
    P = rng.uniform(-1, 1, (20, 2))
    D = pairwise_distances("euclidean", P)
    X = classical_mds_seed(D, k)
    assert total_cost(X, D, parse_variant("fmds")) < 1e-8
    assert np.allclose(pairwise_distances("euclidean", X), D, atol=1e-7)


def test_output_centered(rng):
    D = pairwise_distances("euclidean", rng.standard_normal((15, 5)))
    X = classical_mds_seed(D, 3)
    assert np.linalg.norm(X.mean(axis=0)) < 1e-9


def test_eigenpair_residuals(rng):
    D = pairwise_distances("euclidean", rng.standard_normal((25, 6)))
    n = len(D)
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D * D) @ J
    X = top_eigen_coordinates(B, 4)
    for c in X.T:
        lam = c @ c
        v = c / np.sqrt(lam)
        assert np.linalg.norm(B @ v - lam * v) < 1e-8 * np.linalg.norm(B)


def test_sign_convention_first_nonzero_positive(rng):
    D = pairwise_distances("euclidean", rng.standard_normal((10, 3)))
    X = classical_mds_seed(D, 3)
    for c in X.T:
        nz = c[np.abs(c) > 1e-12]
        assert nz[0] > 0


def test_non_euclidean_matrix_has_no_nan(rng):
    D = rng.uniform(0, 1, (12, 12))
    D = D + D.T
    np.fill_diagonal(D, 0.0)
    D[0, 1:] = D[1:, 0] = 50.0  # badly violates the triangle inequality
    X = classical_mds_seed(D, 5)
    assert np.all(np.isfinite(X))


def test_all_zero_matrix_gives_origin():
    X = classical_mds_seed(np.zeros((4, 4)), 2)
    assert np.allclose(X, 0.0)


def test_dimension_checks():
    D = np.abs(np.subtract.outer(np.arange(4.0), np.arange(4.0)))
    with pytest.raises(ValueError):
        classical_mds_seed(D, 4)
    with pytest.raises(ValueError):
        classical_mds_seed(D, 0)
    with pytest.raises(ValueError):
        spherical_seed(D, 4)


def test_asymmetric_matrix_symmetrized_with_warning(rng, caplog):
    P = rng.standard_normal((6, 2))
    D = pairwise_distances("euclidean", P)
    A = D.copy()
    A[0, 1] += 0.2
    A[1, 0] -= 0.2
    with caplog.at_level(logging.WARNING):
        X = classical_mds_seed(A, 2)
    assert "symmetrized" in caplog.text
    assert np.allclose(X, classical_mds_seed(D, 2))


# -- spherical ----------------------------------------------------------------


def test_orthogonal_triple_recovered():
    D = np.full((3, 3), np.pi / 2)
    np.fill_diagonal(D, 0.0)
    X = spherical_seed(D, 2, "normalize_classical")
    assert np.allclose(pairwise_distances("sphere_geodesic", X), D, atol=1e-6)


@pytest.mark.parametrize("mode", ["normalize_classical", "random_uniform"])
def test_spherical_seed_unit_norm(rng, mode):
    Y = random_sphere_points(10, 4, rng)
    D = pairwise_distances("sphere_geodesic", Y)
    X = spherical_seed(D, 3, mode, rng_seed=5)
    assert X.shape == (10, 4)
    assert np.allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-12)


def test_spherical_seed_recovers_chordal_configuration(rng):
    Y = random_sphere_points(12, 3, rng)
    D = pairwise_distances("sphere_chordal", Y)
    X = spherical_seed(D, 2, metric="sphere_chordal")
    assert np.allclose(pairwise_distances("sphere_chordal", X), D, atol=1e-8)


def test_random_uniform_deterministic():
    D = np.zeros((6, 6))
    a = spherical_seed(D, 2, "random_uniform", rng_seed=9)
    b = spherical_seed(D, 2, "random_uniform", rng_seed=9)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, spherical_seed(D, 2, "random_uniform", rng_seed=10))


def test_origin_points_sent_to_fixed_direction(caplog):
    # two tight clusters plus a point orthogonal to both: with k=1 the top
    # two eigenpairs miss the last point, which lands on the origin
    Y = np.array([[1, 0, 0]] * 3 + [[0, 1, 0]] * 3 + [[0, 0, 1]], dtype=float)
    D = pairwise_distances("sphere_geodesic", Y)
    with caplog.at_level(logging.WARNING):
        X = spherical_seed(D, 1)
    assert np.allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-12)
    assert "origin" in caplog.text


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        spherical_seed(np.zeros((3, 3)), 1, mode="svd")
