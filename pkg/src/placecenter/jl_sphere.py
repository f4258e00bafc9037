"""Random projection between spheres, distortion measurement, and the
small-angle sine inequalities behind the geodesic bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SPHERE_CHORDAL, SPHERE_GEODESIC, pairwise_distances
from .seeding import random_sphere_points


@dataclass
class SphereProjection:
    """Orthonormal (k+1) x (d+1) basis of a subspace H plus a scale.

    The scale is kept for completeness; normalizing back to the sphere
    removes it, so it never changes the projected points.
    """

    basis: np.ndarray
    source_dim: int
    target_dim: int
    scale: float


@dataclass
class DistortionReport:
    gamma: float
    best_scale: float
    fixed_scale_distortion: float
    ratios: np.ndarray
    pairs: np.ndarray
    metric: str
    excluded_pairs: int = 0

    @property
    def per_pair(self):
        return np.abs(self.ratios - 1.0)


def random_subspace(d: int, k: int, rng_seed) -> SphereProjection:
    """Uniformly random (k+1)-dimensional subspace of R^(d+1).

    ``k == d`` is allowed and yields a rotation of the full space.
    """
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    rng = np.random.default_rng(rng_seed)
    Q, R = np.linalg.qr(rng.standard_normal((d + 1, k + 1)))
    Q = Q * np.sign(np.diag(R))
    return SphereProjection(Q.T.copy(), d, k, float(np.sqrt(d / k)))


def project_to_sphere(Y, P: SphereProjection) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if Y.shape[1] != P.basis.shape[1]:
        raise ValueError(f"points live in R^{Y.shape[1]}, projection expects R^{P.basis.shape[1]}")
    Z = (Y @ P.basis.T) * P.scale
    norms = np.linalg.norm(Z, axis=1)
    bad = np.flatnonzero(norms < 1e-12)
    if bad.size:
        raise ValueError(f"point {bad[0]} projects to (near) zero; resample the subspace")
    return Z / norms[:, None]


def measure_distortion(Y, X, metric: str = SPHERE_GEODESIC) -> DistortionReport:
    """Distortion of ``X`` relative to ``Y`` over all unordered pairs.

    With r_ij = f(x_i, x_j) / f(y_i, y_j) ranging over [lo, hi], the
    smallest gamma admitting some c with (1 - gamma) <= c r_ij <= (1 + gamma)
    is (hi - lo) / (hi + lo), attained at c = 2 / (hi + lo). The c = 1
    distortion max |r_ij - 1| is reported alongside.
    """
    Y = np.asarray(Y, dtype=float)
    X = np.asarray(X, dtype=float)
    if len(Y) != len(X) or len(Y) < 2:
        raise ValueError("need two equally sized point sets with at least two points")
    if metric not in (SPHERE_GEODESIC, SPHERE_CHORDAL, "geodesic", "chordal"):
        raise ValueError(f"unknown metric {metric!r}")
    space = SPHERE_GEODESIC if "geodesic" in metric else SPHERE_CHORDAL
    fy = pairwise_distances(space, Y)
    fx = pairwise_distances(space, X)
    iu, ju = np.triu_indices(len(Y), 1)
    src = fy[iu, ju]
    # coincident points come back as roundoff, not exact zeros
    keep = src > 1e-12 * max(src.max(), 1e-300)
    if not keep.any():
        raise ValueError("all source distances are zero")
    ratios = fx[iu, ju][keep] / src[keep]
    lo, hi = ratios.min(), ratios.max()
    if hi == 0:
        raise ValueError("all target distances are zero")
    return DistortionReport(
        gamma=float((hi - lo) / (hi + lo)),
        best_scale=float(2.0 / (hi + lo)),
        fixed_scale_distortion=float(np.max(np.abs(ratios - 1.0))),
        ratios=ratios,
        pairs=np.column_stack([iu[keep], ju[keep]]),
        metric=space,
        excluded_pairs=int((~keep).sum()),
    )


@dataclass
class LemmaReport:
    violations_first: int
    violations_second: int
    worst_margin_first: float
    worst_margin_second: float
    points_checked: int

    @property
    def violations(self) -> int:
        return self.violations_first + self.violations_second


def sine_margins(eps, x):
    """Margins of sin((1-2e)x) <= (1-e) sin x and sin((1+2e)x) >= (1+e) sin x.

    Nonnegative margins mean the inequality holds.
    """
    eps = np.asarray(eps, dtype=float)
    x = np.asarray(x, dtype=float)
    first = (1.0 - eps) * np.sin(x) - np.sin((1.0 - 2.0 * eps) * x)
    second = np.sin((1.0 + 2.0 * eps) * x) - (1.0 + eps) * np.sin(x)
    return first, second


def check_lemma_small_angle(eps_grid, x_grid, enforce_range: bool = True, tol: float = 1e-12) -> LemmaReport:
    """Evaluate both sine inequalities on the full eps x x grid.

    A margin below ``-tol`` counts as a violation; ``tol`` absorbs round-off
    where the two sides agree exactly (eps = 0, x = 0). With
    ``enforce_range`` the grids must stay inside eps in [0, 0.5] and
    x in [0, 0.7].
    """
    eps_grid = np.asarray(eps_grid, dtype=float).ravel()
    x_grid = np.asarray(x_grid, dtype=float).ravel()
    if enforce_range:
        if eps_grid.min() < 0 or eps_grid.max() > 0.5 + 1e-12:
            raise ValueError("eps grid must lie in [0, 0.5]")
        if x_grid.min() < 0 or x_grid.max() > 0.7 + 1e-12:
            raise ValueError("x grid must lie in [0, 0.7]")
    E, Xg = np.meshgrid(eps_grid, x_grid, indexing="ij")
    first, second = sine_margins(E, Xg)
    return LemmaReport(
        violations_first=int(np.sum(first < -tol)),
        violations_second=int(np.sum(second < -tol)),
        worst_margin_first=float(first.min()),
        worst_margin_second=float(second.min()),
        points_checked=int(E.size),
    )


def great_circle_points(a, b, count: int) -> np.ndarray:
    """``count`` points equally spaced strictly between unit vectors a and b
    on the shorter great-circle arc."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    u = b - (a @ b) * a
    theta = np.arctan2(np.linalg.norm(u), a @ b)
    u = u / np.linalg.norm(u)
    ts = theta * np.arange(1, count + 1) / (count + 1)
    return np.cos(ts)[:, None] * a + np.sin(ts)[:, None] * u


def long_pair_segments(a, b, inserted: int = 6) -> np.ndarray:
    """Chord lengths of the consecutive segments after subdividing the arc
    a-b with ``inserted`` interior points (6 gives 7 segments, each of
    angle at most pi/7 < 1/2)."""
    pts = np.vstack([a, great_circle_points(a, b, inserted), b])
    return np.linalg.norm(np.diff(pts, axis=0), axis=1)


def sample_with_far_pair(n: int, d: int, rng, far_angle: float = 3.0) -> np.ndarray:
    """n uniform points on S^d where the last point sits at geodesic
    distance ``far_angle`` from the first."""
    Y = random_sphere_points(n, d + 1, rng)
    if n >= 2:
        a = Y[0]
        u = rng.standard_normal(d + 1)
        u -= (u @ a) * a
        u /= np.linalg.norm(u)
        Y[-1] = np.cos(far_angle) * a + np.sin(far_angle) * u
    return Y


def jl_experiment(n: int, d: int, k_list, trials: int, rng_seed: int, far_angle: float = 3.0):
    """Project uniform points on S^d to random S^k and measure geodesic
    distortion at c = 1.

    Each (k, trial) cell draws from its own generator seeded by
    (rng_seed, k, trial), so cells are independent of execution order.
    Returns a list of rows (k, trial, median_distortion, max_distortion).
    """
    if n < 2:
        raise ValueError("need at least two points")
    rows = []
    for k in k_list:
        if not 1 <= k <= d:
            raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
        for trial in range(trials):
            rng = np.random.default_rng([rng_seed, k, trial])
            Y = sample_with_far_pair(n, d, rng, far_angle)
            P = random_subspace(d, k, rng)
            X = project_to_sphere(Y, P)
            per_pair = measure_distortion(Y, X, SPHERE_GEODESIC).per_pair
            rows.append((k, trial, float(np.median(per_pair)), float(per_pair.max())))
    return rows


def median_max_by_k(rows) -> dict:
    """Median over trials of the per-trial max distortion, keyed by k."""
    out = {}
    for k in dict.fromkeys(r[0] for r in rows):
        out[k] = float(np.median([r[3] for r in rows if r[0] == k]))
    return out
