"""Initial embeddings: classical (spectral) MDS and random sphere points."""

from __future__ import annotations

import logging

import numpy as np

from .core import check_distance_matrix, is_symmetric
from .geometry import SPHERE_CHORDAL, SPHERE_GEODESIC, fallback_direction

logger = logging.getLogger(__name__)


def _fix_signs(vecs):
    # first nonzero component of each eigenvector made positive
    for c in range(vecs.shape[1]):
        col = vecs[:, c]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            vecs[:, c] = -col
    return vecs


def top_eigen_coordinates(B, k: int) -> np.ndarray:
    """Coordinates sqrt(lambda) * v from the k largest eigenpairs of the
    symmetric matrix ``B``; negative eigenvalues are clamped to zero."""
    vals, vecs = np.linalg.eigh(B)
    order = np.argsort(vals)[::-1][:k]
    vals = np.clip(vals[order], 0.0, None)
    vecs = _fix_signs(vecs[:, order].copy())
    return vecs * np.sqrt(vals)


def _symmetrized(D):
    D = check_distance_matrix(D)
    if not is_symmetric(D):
        logger.warning("asymmetric distance matrix symmetrized by averaging for seeding")
        D = 0.5 * (D + D.T)
    return D


def classical_mds_seed(D, k: int) -> np.ndarray:
    """Torgerson/classical MDS into R^k.

    B = -1/2 J (D*D) J with J the centering matrix; coordinates come from
    the top-k eigenpairs of B.
    """
    D = _symmetrized(D)
    n = len(D)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n - 1:
        raise ValueError(f"k={k} exceeds n-1={n - 1}")
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (D * D) @ J
    B = 0.5 * (B + B.T)
    X = top_eigen_coordinates(B, k)
    return X - X.mean(axis=0)


def _normalize_rows(X):
    X = np.array(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    small = norms < 1e-12
    if small.any():
        logger.warning("%d seed points at the origin sent to a fixed direction", int(small.sum()))
        X[small] = fallback_direction(np.zeros(X.shape[1]))
        norms[small] = 1.0
    return X / norms[:, None]


def random_sphere_points(n: int, dim: int, rng) -> np.ndarray:
    """``n`` i.i.d. uniform points on the unit sphere in R^dim."""
    G = rng.standard_normal((n, dim))
    return _normalize_rows(G)


def spherical_seed(D, k: int, mode: str = "normalize_classical", rng_seed: int = 0,
                   metric: str = SPHERE_GEODESIC) -> np.ndarray:
    """Seed on S^k (points in R^(k+1)).

    ``normalize_classical`` turns the spherical distances into the Gram
    matrix of unit vectors (cos d for geodesic, 1 - d^2/2 for chordal),
    takes its top k+1 eigenpairs and projects each point onto the sphere.
    ``random_uniform`` draws points uniformly from a seeded generator.
    """
    D = check_distance_matrix(D)
    n = len(D)
    if k < 1:
        raise ValueError("k must be at least 1")
    if mode == "random_uniform":
        return random_sphere_points(n, k + 1, np.random.default_rng(rng_seed))
    if mode != "normalize_classical":
        raise ValueError(f"unknown spherical seed mode {mode!r}")
    if k + 1 > n:
        raise ValueError(f"k+1={k + 1} exceeds n={n}")
    D = _symmetrized(D)
    if metric == SPHERE_GEODESIC:
        G = np.cos(np.clip(D, 0.0, np.pi))
    elif metric == SPHERE_CHORDAL:
        c = np.clip(D, 0.0, 2.0)
        G = 1.0 - 0.5 * c * c
    else:
        raise ValueError(f"unknown spherical metric {metric!r}")
    X = top_eigen_coordinates(G, k + 1)
    return _normalize_rows(X)
