"""Domain types, the MDS variant taxonomy, and cost evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    EUCLIDEAN,
    SPHERE_CHORDAL,
    SPHERE_GEODESIC,
    check_space,
    distances_to,
    is_spherical,
)

ABS = "abs"
SQUARE = "square"
POWER = "power"
ERR_KINDS = (ABS, SQUARE, POWER)

PLAIN = "plain"
SQUARED = "squared"

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class MdsVariant:
    """Error function, target metric and radius rule of one MDS flavour."""

    err: str = SQUARE
    space: str = EUCLIDEAN
    radius_rule: str = PLAIN
    p: float = 2.0
    name: str = ""

    def __post_init__(self):
        if self.err not in ERR_KINDS:
            raise ValueError(f"unknown error kind {self.err!r}")
        check_space(self.space)
        if self.radius_rule not in (PLAIN, SQUARED):
            raise ValueError(f"unknown radius rule {self.radius_rule!r}")
        if self.err == POWER and not 1.0 < self.p < 2.0:
            raise ValueError(f"power-p error needs p in the open range (1, 2), got {self.p}")
        if self.radius_rule == SQUARED and self.space != EUCLIDEAN:
            raise ValueError("squared radii are only defined for euclidean targets")

    @property
    def spherical(self) -> bool:
        return is_spherical(self.space)

    def error(self, delta):
        delta = np.abs(delta)
        if self.err == SQUARE:
            return delta * delta
        if self.err == ABS:
            return delta
        return delta**self.p

    def radii(self, row):
        row = np.asarray(row, dtype=float)
        return row * row if self.radius_rule == SQUARED else row

    def ambient_dim(self, k: int) -> int:
        return k + 1 if self.spherical else k


VARIANTS = {
    "fmds": MdsVariant(SQUARE, EUCLIDEAN, PLAIN, name="fmds"),
    "rmds": MdsVariant(ABS, EUCLIDEAN, PLAIN, name="rmds"),
    "r2mds": MdsVariant(ABS, EUCLIDEAN, SQUARED, name="r2mds"),
    "c1s": MdsVariant(ABS, SPHERE_CHORDAL, PLAIN, name="c1s"),
    "c2s": MdsVariant(SQUARE, SPHERE_CHORDAL, PLAIN, name="c2s"),
    "g1s": MdsVariant(ABS, SPHERE_GEODESIC, PLAIN, name="g1s"),
    "g2s": MdsVariant(SQUARE, SPHERE_GEODESIC, PLAIN, name="g2s"),
}


def parse_variant(text: str) -> MdsVariant:
    """Look up a variant by its short name; ``lp:<p>`` selects |delta|^p error.

    >>> parse_variant("lp:1.5").p
    1.5
    """
    key = text.strip().lower()
    if key in VARIANTS:
        return VARIANTS[key]
    if key.startswith("lp:"):
        try:
            p = float(key[3:])
        except ValueError:
            raise ValueError(f"bad exponent in variant {text!r}") from None
        if not 1.0 < p < 2.0:
            raise ValueError(f"lp exponent must lie in the open range (1, 2), got {p}")
        return MdsVariant(POWER, EUCLIDEAN, PLAIN, p=p, name=f"lp:{p:g}")
    raise ValueError(f"unknown variant {text!r}; expected one of {sorted(VARIANTS)} or lp:<p>")


def check_distance_matrix(D) -> np.ndarray:
    """Validate a dissimilarity matrix and return it as a float array.

    Symmetry is not required.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise ValueError("distance matrix has non-finite entries")
    if np.any(D < 0):
        raise ValueError("distance matrix has negative entries")
    if np.any(np.diag(D) != 0):
        raise ValueError("distance matrix diagonal must be exactly zero")
    return D


def is_symmetric(D, atol: float = 0.0) -> bool:
    D = np.asarray(D, dtype=float)
    return bool(np.allclose(D, D.T, rtol=0.0, atol=atol))


def check_embedding(X, space: str, n: int | None = None, tol: float = UNIT_NORM_TOL) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"embedding must be 2-D (points x coords), got shape {X.shape}")
    if n is not None and X.shape[0] != n:
        raise ValueError(f"embedding has {X.shape[0]} points, distance matrix has {n}")
    if not np.all(np.isfinite(X)):
        raise ValueError("embedding has non-finite coordinates")
    if is_spherical(space):
        norms = np.linalg.norm(X, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
        if bad.size:
            raise ValueError(f"spherical embedding point {bad[0]} has norm {norms[bad[0]]:.12g}")
    return X


def point_cost(X, D, v: MdsVariant, i: int) -> float:
    """Row component C_i = sum_j Err(f(x_i, x_j) - r_ij)."""
    D = check_distance_matrix(D)
    X = check_embedding(X, v.space, len(D))
    if not 0 <= i < len(D):
        raise IndexError(f"point index {i} out of range for n={len(D)}")
    return _row_cost(X, D, v, i, X[i])


def _row_cost(X, D, v: MdsVariant, i: int, x) -> float:
    f = distances_to(v.space, x, X)
    f[i] = 0.0
    return float(np.sum(v.error(f - v.radii(D[i]))))


def total_cost(X, D, v: MdsVariant) -> float:
    """C(X, D) = sum_i sum_j Err(f(x_i, x_j) - r_ij).

    Every ordered pair is counted, so each unordered pair contributes twice
    for symmetric D. Rows are reduced in index order.
    """
    D = check_distance_matrix(D)
    X = check_embedding(X, v.space, len(D))
    total = 0.0
    for i in range(len(D)):
        total += _row_cost(X, D, v, i, X[i])
    return total


@dataclass
class ConvergenceTrace:
    """Per-sweep (iteration, cost, elapsed seconds) records."""

    records: list = field(default_factory=list)

    def append(self, iteration: int, cost: float, seconds: float):
        if self.records:
            last_it, _, last_t = self.records[-1]
            if iteration <= last_it:
                raise ValueError("trace iterations must be strictly increasing")
            seconds = max(seconds, last_t)
        self.records.append((int(iteration), float(cost), float(seconds)))

    @property
    def costs(self):
        return [c for _, c, _ in self.records]

    def __len__(self):
        return len(self.records)
