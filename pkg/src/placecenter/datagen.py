"""Synthetic instances: planted low-dimensional point sets with Poisson-shaped noise."""

from __future__ import annotations

import numpy as np

from .geometry import pairwise_distances

POISSON_RATE = 10.0


def centered_poisson(rng, size):
    """Zero-mean, unit-relative noise (P - rate) / rate with P ~ Poisson(rate)."""
    return (rng.poisson(POISSON_RATE, size) - POISSON_RATE) / POISSON_RATE


def random_orthonormal(rng, d: int, k: int) -> np.ndarray:
    """d x k matrix with orthonormal columns spanning a uniformly random subspace."""
    Q, R = np.linalg.qr(rng.standard_normal((d, k)))
    return Q * np.sign(np.diag(R))


def euclidean_distances(P) -> np.ndarray:
    diff = P[:, None, :] - P[None, :, :]
    D = np.sqrt(np.sum(diff * diff, axis=-1))
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def planted_euclidean(n: int, d: int, k: int, noise_fraction: float, rng_seed: int):
    """Points near a random k-dimensional subspace of R^d and their distances.

    Subspace coordinates are uniform on [0, 1]. Every one of the d ambient
    coordinates then gets noise_fraction * (range of that coordinate) times
    centered Poisson noise.
    """
    if k > d:
        raise ValueError(f"k={k} exceeds d={d}")
    if k < 1 or n < 1:
        raise ValueError("n and k must be positive")
    if noise_fraction < 0:
        raise ValueError("noise_fraction must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    basis = random_orthonormal(rng, d, k)
    P = rng.uniform(0.0, 1.0, (n, k)) @ basis.T
    if noise_fraction > 0:
        spread = P.max(axis=0) - P.min(axis=0)
        P = P + noise_fraction * spread * centered_poisson(rng, (n, d))
    return P, euclidean_distances(P)


def perturbed_matrix(n: int, k: int, perturb_fraction: float, rng_seed: int, return_mask: bool = False):
    """Distances of clean points in R^k with a random fraction of entries
    multiplied by (1 + centered Poisson noise).

    Exactly round(fraction * n(n-1)/2) unordered pairs are perturbed, both
    (i, j) and (j, i). With ``return_mask`` the boolean mask of perturbed
    entries is returned too.
    """
    if not 0.0 <= perturb_fraction <= 1.0:
        raise ValueError("perturb_fraction must lie in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    P = rng.uniform(0.0, 1.0, (n, k))
    D = euclidean_distances(P)
    iu, ju = np.triu_indices(n, 1)
    m = int(round(perturb_fraction * len(iu)))
    pick = rng.choice(len(iu), size=m, replace=False)
    factor = np.clip(1.0 + centered_poisson(rng, m), 0.0, None)
    D[iu[pick], ju[pick]] *= factor
    D[ju[pick], iu[pick]] = D[iu[pick], ju[pick]]
    mask = np.zeros((n, n), dtype=bool)
    mask[iu[pick], ju[pick]] = True
    mask |= mask.T
    return (D, mask) if return_mask else D


def planted_spherical(n: int, d: int, k: int, noise_level: float, rng_seed: int,
                      metric: str = "sphere_geodesic"):
    """Points on a random great S^k inside S^d, jittered in the tangent
    space by ``noise_level`` and renormalized.

    Returns the points and their geodesic distances (entries in [0, pi]);
    ``metric="sphere_chordal"`` gives chord lengths instead.
    """
    if k > d:
        raise ValueError(f"k={k} exceeds d={d}")
    rng = np.random.default_rng(rng_seed)
    basis = random_orthonormal(rng, d + 1, k + 1)
    Z = rng.standard_normal((n, k + 1))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    P = Z @ basis.T
    if noise_level > 0:
        T = rng.standard_normal((n, d + 1))
        T -= np.sum(T * P, axis=1)[:, None] * P
        P = P + noise_level * T
        P /= np.linalg.norm(P, axis=1)[:, None]
    if metric not in ("sphere_geodesic", "sphere_chordal"):
        raise ValueError(f"unknown spherical metric {metric!r}")
    D = pairwise_distances(metric, P)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return P, D
