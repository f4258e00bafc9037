"""PlaceCenter: block relaxation over points, each moved by the Place routine.

``place`` alternates between building anchors around the other points and
solving the min-sum problem for those anchors. ``place_center`` sweeps
``place`` over every point until a sweep stops paying for itself.
``smacof_baseline`` is the plain Guttman-transform iteration, kept for
side-by-side benchmarks.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

from . import recenter as rc
from .core import (
    ABS,
    SQUARE,
    ConvergenceTrace,
    MdsVariant,
    check_distance_matrix,
    check_embedding,
    is_symmetric,
    parse_variant,
    total_cost,
)
from .geometry import EUCLIDEAN, SPHERE_CHORDAL, SPHERE_GEODESIC, build_anchors, distances_to, radius_cap

logger = logging.getLogger(__name__)

# relative gain per alternation below which a slide along a sphere is tried
SLOW_PROGRESS = 1e-2
ACTIVE_TOL = 1e-6
MAX_DOUBLINGS = 10


@dataclass(frozen=True)
class SolverConfig:
    outer_threshold_t: float = 1e-6
    max_outer_iterations: int = 500
    inner: rc.RecenterConfig = rc.DEFAULT_CONFIG
    place_tolerance: float = 1e-9
    max_place_iterations: int = 100
    trace_enabled: bool = True
    # absolute-error variants only: escape kinks the anchor alternation stalls on (slower)
    kink_slides: bool = False
    rng_seed: int = 0
    clock: Callable[[], float] | None = time.perf_counter

    def __post_init__(self):
        if self.outer_threshold_t <= 0 or self.place_tolerance <= 0:
            raise ValueError("thresholds must be positive")
        if self.max_outer_iterations < 1 or self.max_place_iterations < 1:
            raise ValueError("iteration caps must be at least 1")


@dataclass
class SolverStats:
    sweeps: int = 0
    converged: bool = False
    place_calls: int = 0
    rejected_places: int = 0
    alternations: int = 0
    cost_terms: int = 0
    clamped_radii: int = 0
    degenerate_rays: int = 0
    slides: int = 0
    sweep_cost_terms: list = field(default_factory=list)


@dataclass
class SolverResult:
    embedding: np.ndarray
    trace: ConvergenceTrace
    stats: SolverStats

    @property
    def cost(self) -> float:
        return self.trace.records[-1][1]

    def __iter__(self):
        # allows ``X, trace = place_center(...)``
        return iter((self.embedding, self.trace))


def _recenter(v: MdsVariant, anchors, x, cfg: rc.RecenterConfig):
    if v.space == EUCLIDEAN:
        if v.err == SQUARE:
            return rc.recenter_centroid(anchors)
        if v.err == ABS:
            return rc.recenter_weiszfeld(anchors, x, cfg)
        return rc.recenter_lp(anchors, v.p, x, cfg)
    if v.space == SPHERE_CHORDAL:
        if v.err == SQUARE:
            return rc.recenter_sphere_centroid(anchors)
        return rc.recenter_chordal_median(anchors, x, cfg)
    if v.err == SQUARE:
        return rc.recenter_karcher(anchors, x, cfg)
    return rc.recenter_geodesic_median(anchors, x, cfg)


def _point_objective(v, X, D, i, x, stats=None):
    f = distances_to(v.space, x, X)
    f[i] = 0.0
    if stats is not None:
        stats.cost_terms += len(f)
    return float(np.sum(v.error(f - v.radii(D[i]))))


def place(X, D, v: MdsVariant, i: int, cfg: SolverConfig = SolverConfig(), history=None, stats=None):
    """Best placement of point ``i`` with every other point held fixed.

    Returns a point whose row cost is no larger than that of ``X[i]``; when
    no alternation improves, ``X[i]`` comes back unchanged. ``history``
    (a list) receives the row cost before the first and after each accepted
    alternation.
    """
    if isinstance(v, str):
        v = parse_variant(v)
    D = check_distance_matrix(D)
    X = check_embedding(X, v.space, len(D))
    if not 0 <= i < len(D):
        raise IndexError(f"point index {i} out of range for n={len(D)}")
    return _place(X, D, v, i, cfg, history, stats)


# fast-path status codes
_KERNEL_DONE = 0
_KERNEL_BAIL = 1


@njit(cache=True)
def _row_cost_kernel(C, R, x, q):
    # q = 1 absolute, 2 squared, otherwise |delta|^q
    total = 0.0
    for j in range(C.shape[0]):
        s = 0.0
        for c in range(C.shape[1]):
            t = x[c] - C[j, c]
            s += t * t
        e = abs(np.sqrt(s) - R[j])
        total += e if q == 1.0 else (e * e if q == 2.0 else e**q)
    return total


@njit(cache=True)
def _place_euclidean_kernel(C, R, x, q, place_tol, max_alt, inner_tol, max_inner, eps, hist):
    """The place alternation for euclidean variants, anchors and all.

    Returns (x, cost, history length, alternations, objective evaluations,
    status). Status 1 hands the current x back to the general loop because
    a ray from some center to x was degenerate.
    """
    m, k = C.shape
    A = np.empty((m, k))
    inner_hist = np.empty(max_inner + 1)
    cost = _row_cost_kernel(C, R, x, q)
    hist[0] = cost
    nh = 1
    evals = 1
    for alt in range(max_alt):
        for j in range(m):
            s = 0.0
            for c in range(k):
                t = x[c] - C[j, c]
                s += t * t
            nd = np.sqrt(s)
            if nd < 1e-12:
                return x, cost, nh, alt, evals, _KERNEL_BAIL
            for c in range(k):
                A[j, c] = C[j, c] + R[j] * (x[c] - C[j, c]) / nd
        cand = np.zeros(k)
        for j in range(m):
            for c in range(k):
                cand[c] += A[j, c]
        for c in range(k):
            cand[c] /= m
        if q != 2.0:
            cand, _ = rc._weiszfeld_solve(A, x.copy(), q, inner_tol, max_inner, eps, inner_hist)
        new_cost = _row_cost_kernel(C, R, cand, q)
        evals += 1
        if not new_cost <= cost:
            return x, cost, nh, alt + 1, evals, _KERNEL_DONE
        old = cost
        x = cand
        cost = new_cost
        hist[nh] = cost
        nh += 1
        if old - cost < place_tol * max(old, 1e-300):
            return x, cost, nh, alt + 1, evals, _KERNEL_DONE
    return x, cost, nh, max_alt, evals, _KERNEL_DONE


def _place(X, D, v, i, cfg, history, stats):
    others = np.arange(len(D)) != i
    centers = X[others]
    radii = v.radii(D[i])[others]

    x = X[i].copy()
    if len(centers) == 0:
        if history is not None:
            history.append(0.0)
        return x
    improved = False
    budget = cfg.max_place_iterations
    if v.space == EUCLIDEAN and not cfg.kink_slides:
        q = 2.0 if v.err == SQUARE else (1.0 if v.err == ABS else v.p)
        hist = np.empty(budget + 1)
        inner = cfg.inner
        x, cost, nh, alts, evals, status = _place_euclidean_kernel(
            np.ascontiguousarray(centers), np.ascontiguousarray(radii), x, q, cfg.place_tolerance, budget,
            inner.inner_tolerance, inner.max_inner_iterations, inner.singularity_epsilon, hist)
        if history is not None:
            history.extend(hist[:nh].tolist())
        if stats is not None:
            stats.alternations += alts
            stats.cost_terms += evals * len(D)
        improved = nh > 1
        budget -= alts
        if status == _KERNEL_DONE or budget <= 0:
            if stats is not None:
                stats.place_calls += 1
                stats.rejected_places += not improved
            return x if improved else X[i].copy()
    else:
        cost = _point_objective(v, X, D, i, x, stats)
        if history is not None:
            history.append(cost)
    for _ in range(budget):
        anchors = build_anchors(v.space, centers, radii, x, i)
        if stats is not None:
            stats.alternations += 1
            stats.clamped_radii += anchors.n_clamped
            stats.degenerate_rays += anchors.n_degenerate
        cand = _recenter(v, anchors, x, cfg.inner)
        new_cost = _point_objective(v, X, D, i, cand, stats)
        stalled = not new_cost <= cost
        slow = stalled
        if not stalled:
            old = cost
            x, cost = cand, new_cost
            improved = True
            if history is not None:
                history.append(cost)
            stalled = old - cost < cfg.place_tolerance * max(old, 1e-300)
            slow = stalled or old - cost < SLOW_PROGRESS * old
        if slow and cfg.kink_slides and v.err == ABS:
            moved = _slide(v, X, D, i, x, cost, centers, radii, stats)
            if moved is not None:
                x, cost = moved
                improved = True
                if history is not None:
                    history.append(cost)
                continue
        if stalled:
            break
    if stats is not None:
        stats.place_calls += 1
        stats.rejected_places += not improved
    return x if improved else X[i].copy()


def _distance_gradients(space, x, centers, f):
    """Gradients of f(x, c_j) in x (Riemannian on the sphere), one per row."""
    if space == SPHERE_GEODESIC:
        cos = centers @ x
        g = -(centers - cos[:, None] * x)
    else:
        g = x - centers
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = np.sin(f) if space == SPHERE_GEODESIC else f
        g = np.where(denom[:, None] > 1e-12, g / denom[:, None], 0.0)
    if space != EUCLIDEAN:
        g = g - (g @ x)[:, None] * x
    return g


def _onto_sphere_of(space, c, r, y):
    """Nearest point to ``y`` on the sphere of radius ``r`` around ``c``."""
    if space == EUCLIDEAN:
        u = y - c
        nu = np.linalg.norm(u)
        return c + r * (u / nu) if nu > 1e-12 else None
    u = y - (y @ c) * c
    nu = np.linalg.norm(u)
    if nu < 1e-12:
        return None
    theta = min(r, np.pi) if space == SPHERE_GEODESIC else 2.0 * np.arcsin(min(r, 2.0) / 2.0)
    p = np.cos(theta) * c + np.sin(theta) * (u / nu)
    return p / np.linalg.norm(p)


def _slide(v, X, D, i, x, cost, centers, radii, stats):
    """Move along the sphere of a center whose absolute-error term is (near) zero.

    The anchor surrogate is kinked at such an anchor in every direction
    while the true term is kinked only across the sphere, so the
    alternation can stop, or crawl, at a point that is not stationary.
    Snaps onto the nearest sphere when that helps, then line-searches along
    the sphere against the gradient of the nonzero terms (or away from
    other zero terms). Returns (point, cost) or None.
    """
    start_cost = cost
    f = distances_to(v.space, x, centers)
    if f.min() <= 1e-12:
        return None
    delta = f - np.minimum(radii, radius_cap(v.space))
    rel = np.abs(delta) / (1.0 + radii)
    near = int(np.argmin(rel))
    if rel[near] > ACTIVE_TOL:
        snapped = _onto_sphere_of(v.space, centers[near], radii[near], x)
        if snapped is not None:
            c = _point_objective(v, X, D, i, snapped, stats)
            if c < cost:
                x, cost = snapped, c
                f = distances_to(v.space, x, centers)
                if f.min() <= 1e-12:
                    return x, cost
                delta = f - np.minimum(radii, radius_cap(v.space))
                rel = np.abs(delta) / (1.0 + radii)
    active = np.flatnonzero(rel <= ACTIVE_TOL)
    grads = _distance_gradients(v.space, x, centers, f)
    g = np.sign(delta) @ grads
    for j in sorted(set(active.tolist()) | {near}):
        normal = grads[j]
        nn = np.linalg.norm(normal)
        if nn == 0.0:
            continue
        normal = normal / nn
        for d in [-g] + [sgn * grads[k] for k in active if k != j for sgn in (1.0, -1.0)]:
            d = d - (d @ normal) * normal
            nd = np.linalg.norm(d)
            if nd < 1e-12:
                continue
            moved = _sphere_line_search(v, X, D, i, x, cost, centers[j], radii[j], d / nd, 0.5 * f[j], stats)
            if moved is not None:
                x, cost = moved
                break
        else:
            continue
        break
    if cost < start_cost:
        if stats is not None:
            stats.slides += 1
        return x, cost
    return None


def _sphere_line_search(v, X, D, i, x, cost, c, r, d, step, stats):
    """Halve ``step`` until moving along d (then back onto the sphere of c)
    lowers the row cost, then keep rescaling while it keeps dropping."""

    def along(t):
        y = x + t * d
        if v.spherical:
            y = y / np.linalg.norm(y)
        p = _onto_sphere_of(v.space, c, r, y)
        return (p, _point_objective(v, X, D, i, p, stats)) if p is not None else (None, np.inf)

    for _ in range(rc.MAX_HALVINGS):
        best = along(step)
        if best[1] < cost:
            for factor in (0.5, 2.0):
                t = step
                for _ in range(MAX_DOUBLINGS):
                    t *= factor
                    cand = along(t)
                    if not cand[1] < best[1]:
                        break
                    best = cand
            return best
        step *= 0.5
    return None


def _elapsed(cfg, start):
    if cfg.clock is None:
        return 0.0
    return cfg.clock() - start


def place_center(
    D,
    v: MdsVariant | str,
    seed,
    cfg: SolverConfig = SolverConfig(),
    place_hook: Callable[[int, int, list], None] | None = None,
) -> SolverResult:
    """Sweep ``place`` over all points in index order until the cost drop
    of a full sweep falls below ``cfg.outer_threshold_t``.

    ``place_hook(sweep, i, history)`` is called after every place with the
    per-alternation row costs. The trace holds the seed cost at iteration 0
    and the cost after every sweep.
    """
    if isinstance(v, str):
        v = parse_variant(v)
    D = check_distance_matrix(D)
    X = check_embedding(seed, v.space, len(D)).copy()
    n = len(D)
    stats = SolverStats()
    trace = ConvergenceTrace()
    start = cfg.clock() if cfg.clock is not None else 0.0

    cost = total_cost(X, D, v)
    stats.cost_terms += n * n
    trace.append(0, cost, _elapsed(cfg, start))
    for sweep in range(1, cfg.max_outer_iterations + 1):
        terms_before = stats.cost_terms
        eps = cost
        for i in range(n):
            history = [] if place_hook is not None else None
            old_x = X[i].copy()
            new_x = _place(X, D, v, i, cfg, history, stats)
            if place_hook is not None:
                place_hook(sweep, i, history)
            if np.array_equal(new_x, old_x):
                continue
            # O(n) incremental update through row i and column i
            old_row = _pair_terms(v, X, D, i, old_x)
            X[i] = new_x
            new_row = _pair_terms(v, X, D, i, new_x)
            stats.cost_terms += 4 * n
            cost += float(np.sum(new_row - old_row))
        cost = total_cost(X, D, v)
        stats.cost_terms += n * n
        stats.sweep_cost_terms.append(stats.cost_terms - terms_before)
        stats.sweeps = sweep
        trace.append(sweep, cost, _elapsed(cfg, start))
        if eps - cost < cfg.outer_threshold_t:
            stats.converged = True
            break
    return SolverResult(X, trace, stats)


def _pair_terms(v, X, D, i, x):
    """Err terms of row i plus column i for point i placed at ``x``."""
    f = distances_to(v.space, x, X)
    f[i] = 0.0
    return v.error(f - v.radii(D[i])) + v.error(f - v.radii(D[:, i]))


def stress(X, D) -> float:
    """Raw stress over unordered pairs: sum_{i<j} (|x_i - x_j| - d_ij)^2."""
    diff = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1) - D
    return float(np.sum(np.triu(diff, 1) ** 2))


def guttman_transform(X, D) -> np.ndarray:
    n = len(D)
    dist = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist > 0, D / dist, 0.0)
    B = -ratio
    np.fill_diagonal(B, 0.0)
    np.fill_diagonal(B, -B.sum(axis=1))
    return B @ X / n


def smacof_baseline(D, k: int, seed, cfg: SolverConfig = SolverConfig(),
                    measure: MdsVariant | None = None) -> SolverResult:
    """Unweighted SMACOF for the squared-error (fMDS) objective.

    Each Guttman transform is checked against the majorization guarantee.
    The trace stores the fMDS cost (ordered pairs, i.e. twice the stress),
    or the cost under ``measure`` when given, so runs can be compared with
    PlaceCenter on that variant's own scale.
    """
    D = check_distance_matrix(D)
    if not is_symmetric(D, atol=1e-12):
        raise ValueError("SMACOF needs a symmetric distance matrix")
    X = check_embedding(seed, EUCLIDEAN, len(D)).copy()
    if X.shape[1] != k:
        raise ValueError(f"seed has dimension {X.shape[1]}, expected {k}")
    stats = SolverStats()
    trace = ConvergenceTrace()
    start = cfg.clock() if cfg.clock is not None else 0.0
    if measure is not None and measure.spherical:
        raise ValueError("SMACOF produces euclidean embeddings")

    def traced(X, s):
        return 2.0 * s if measure is None else total_cost(X, D, measure)

    s = stress(X, D)
    trace.append(0, traced(X, s), _elapsed(cfg, start))
    for it in range(1, cfg.max_outer_iterations + 1):
        X_new = guttman_transform(X, D)
        s_new = stress(X_new, D)
        if s_new > s + 1e-12 * max(1.0, s):
            raise ArithmeticError(f"stress increased at iteration {it}: {s} -> {s_new}")
        X, prev, s = X_new, s, s_new
        stats.sweeps = it
        trace.append(it, traced(X, s), _elapsed(cfg, start))
        if 2.0 * (prev - s) < cfg.outer_threshold_t:
            stats.converged = True
            break
    return SolverResult(X, trace, stats)
