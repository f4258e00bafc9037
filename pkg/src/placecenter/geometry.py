"""Target-space metrics and the sphere/ray anchor construction used by Place."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

EUCLIDEAN = "euclidean"
SPHERE_CHORDAL = "sphere_chordal"
SPHERE_GEODESIC = "sphere_geodesic"
SPACES = (EUCLIDEAN, SPHERE_CHORDAL, SPHERE_GEODESIC)

# below this length a direction is treated as undefined
DIRECTION_EPS = 1e-12


def is_spherical(space: str) -> bool:
    return space in (SPHERE_CHORDAL, SPHERE_GEODESIC)


def check_space(space: str) -> str:
    if space not in SPACES:
        raise ValueError(f"unknown space {space!r}; expected one of {SPACES}")
    return space


def radius_cap(space: str) -> float:
    """Largest radius a geodesic/chordal sphere can have (inf for euclidean)."""
    if space == SPHERE_GEODESIC:
        return np.pi
    if space == SPHERE_CHORDAL:
        return 2.0
    return np.inf


def geodesic_to(x, Y):
    """Angles between unit vector ``x`` and each row of ``Y``.

    Uses atan2(|orthogonal part|, dot) which stays accurate near 0 and pi,
    where arccos of the dot product loses digits.
    """
    Y = np.asarray(Y, dtype=float)
    dots = Y @ x
    orth = Y - dots[..., None] * x
    return np.arctan2(np.linalg.norm(orth, axis=-1), dots)


def distances_to(space: str, x, Y):
    """Distances from the single point ``x`` to every row of ``Y``."""
    x = np.asarray(x, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.shape[-1] != x.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {Y.shape[-1]}")
    if space == SPHERE_GEODESIC:
        return geodesic_to(x, Y)
    check_space(space)
    return np.linalg.norm(Y - x, axis=-1)


def distance(space: str, a, b) -> float:
    """Distance between two points of ``space``.

    >>> round(distance("sphere_chordal", [1, 0, 0], [0, 1, 0]) ** 2, 12)
    2.0
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(distances_to(space, a, b[None, :])[0])


def pairwise_distances(space: str, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = np.empty((len(X), len(X)))
    for i in range(len(X)):
        out[i] = distances_to(space, X[i], X)
    np.fill_diagonal(out, 0.0)
    return out


def fallback_direction(base) -> np.ndarray:
    """First canonical basis vector made orthogonal to ``base`` (unit length).

    Used whenever a ray direction is undefined. Any direction is
    cost-equivalent in that case; a fixed one keeps runs reproducible.
    """
    base = np.asarray(base, dtype=float)
    nb = np.linalg.norm(base)
    for axis in range(base.shape[-1]):
        e = np.zeros_like(base)
        e[axis] = 1.0
        if nb > 0:
            e = e - (e @ base) / nb**2 * base
        ne = np.linalg.norm(e)
        if ne > 1e-6:
            return e / ne
    raise ValueError("cannot build a direction orthogonal to a full-rank 1-D base")


def _unit_directions(src, toward, tangent: bool):
    """Unit directions from each row of ``src`` toward ``toward``.

    With ``tangent=True`` the direction is projected onto the tangent space
    of the sphere at each source point. Returns (directions, n_degenerate).
    """
    diff = toward - src
    if tangent:
        diff = diff - np.sum(diff * src, axis=1)[:, None] * src
    norms = np.linalg.norm(diff, axis=1)
    bad = norms < DIRECTION_EPS
    norms[bad] = 1.0
    dirs = diff / norms[:, None]
    for j in np.flatnonzero(bad):
        dirs[j] = fallback_direction(src[j] if tangent else np.zeros_like(src[j]))
    return dirs, int(bad.sum())


@dataclass
class AnchorSet:
    """Anchors x̂_j for placing point ``center_index``.

    ``points[j]`` lies at distance ``radii[j]`` from ``centers[j]`` on the ray
    toward the current iterate. ``n_clamped`` counts radii that exceeded the
    space's maximum, ``n_degenerate`` counts rays that needed the fallback.
    """

    points: np.ndarray
    radii: np.ndarray
    centers: np.ndarray
    center_index: int = -1
    space: str = EUCLIDEAN
    n_clamped: int = 0
    n_degenerate: int = 0

    def __len__(self):
        return len(self.points)


def euclidean_anchor(x_j, r_j, x_i) -> np.ndarray:
    """Point at distance ``r_j`` from ``x_j`` on the ray toward ``x_i``."""
    x_j = np.asarray(x_j, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    if r_j < 0:
        raise ValueError("radius must be nonnegative")
    return build_anchors(EUCLIDEAN, x_j[None, :], np.array([r_j], float), x_i).points[0]


def geodesic_anchor(x_j, r_j, x_i) -> np.ndarray:
    """Point at geodesic distance ``r_j`` (clamped to [0, pi]) from ``x_j``
    along the great circle toward ``x_i``."""
    x_j = np.asarray(x_j, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    return build_anchors(SPHERE_GEODESIC, x_j[None, :], np.array([r_j], float), x_i).points[0]


def chordal_anchor(x_j, r_j, x_i) -> np.ndarray:
    """Point at chordal distance ``r_j`` (clamped to [0, 2]) from ``x_j``
    along the great circle toward ``x_i``."""
    x_j = np.asarray(x_j, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    return build_anchors(SPHERE_CHORDAL, x_j[None, :], np.array([r_j], float), x_i).points[0]


def build_anchors(space: str, centers, radii, x, center_index: int = -1) -> AnchorSet:
    """Vectorized anchor construction for all centers at once."""
    check_space(space)
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    x = np.asarray(x, dtype=float)
    if centers.ndim != 2 or centers.shape[1] != x.shape[-1]:
        raise ValueError(f"dimension mismatch: centers {centers.shape} vs point {x.shape}")
    if np.any(radii < 0):
        raise ValueError("radii must be nonnegative")

    cap = radius_cap(space)
    over = radii > cap
    n_clamped = int(over.sum())
    if n_clamped:
        logger.debug("clamped %d radii to %.6g", n_clamped, cap)
        radii = np.minimum(radii, cap)

    if space == EUCLIDEAN:
        dirs, n_deg = _unit_directions(centers, x, tangent=False)
        points = centers + radii[:, None] * dirs
    else:
        dirs, n_deg = _unit_directions(centers, x, tangent=True)
        theta = radii if space == SPHERE_GEODESIC else 2.0 * np.arcsin(radii / 2.0)
        points = np.cos(theta)[:, None] * centers + np.sin(theta)[:, None] * dirs
        points /= np.linalg.norm(points, axis=1)[:, None]
    return AnchorSet(points, radii, centers, center_index, space, n_clamped, n_deg)
