"""Min-sum solvers: find a point that lowers sum_j Err(f(x, a_j)) for fixed anchors a_j.

Each solver takes an (m, dim) array of anchors (or an AnchorSet) and, for the
iterative ones, a warm-start point. Passing a list as ``history`` records the
objective after every accepted iterate, starting with the initial value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import fallback_direction, geodesic_to

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30


@dataclass(frozen=True)
class RecenterConfig:
    inner_tolerance: float = 1e-9
    max_inner_iterations: int = 200
    singularity_epsilon: float = 1e-12

    def __post_init__(self):
        if self.inner_tolerance <= 0 or self.singularity_epsilon <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_inner_iterations < 1:
            raise ValueError("max_inner_iterations must be at least 1")


DEFAULT_CONFIG = RecenterConfig()


def _points(anchors) -> np.ndarray:
    pts = np.asarray(getattr(anchors, "points", anchors), dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("need a non-empty (m, dim) anchor array")
    return pts


def _converged(old: float, new: float, step: float, scale: float, tol: float) -> bool:
    # both the relative objective drop and the relative step must be small
    return old - new <= tol * max(old, 1e-300) and step <= tol * scale


def _record(history, value):
    if history is not None:
        history.append(float(value))


# -- euclidean ---------------------------------------------------------------


def sum_sq(x, A) -> float:
    return float(np.sum((A - x) ** 2))


def sum_dist(x, A) -> float:
    return float(np.sum(np.linalg.norm(A - x, axis=1)))


def sum_pow(x, A, p: float) -> float:
    return float(np.sum(np.linalg.norm(A - x, axis=1) ** p))


def recenter_centroid(anchors) -> np.ndarray:
    """Exact minimizer of sum_j |x - a_j|^2: the mean."""
    return _points(anchors).mean(axis=0)


@njit(cache=True)
def _anchor_costs(A, p):
    m, dim = A.shape
    out = np.zeros(m)
    for i in range(m):
        for j in range(i + 1, m):
            s = 0.0
            for c in range(dim):
                t = A[i, c] - A[j, c]
                s += t * t
            d = np.sqrt(s)
            v = d if p == 1.0 else d**p
            out[i] += v
            out[j] += v
    return out


@njit(cache=True)
def _weiszfeld_kernel(A, x, p, tol, max_iter, eps, scale, anchor_costs, hist):
    """Plain (generalized) Weiszfeld steps until convergence, an anchor hit,
    or ``max_iter``. Returns (x, entries written to hist, iterations, status)
    with status 1 meaning the iterate sits on an anchor."""
    m, dim = A.shape
    dist = np.empty(m)
    cost = 0.0
    for j in range(m):
        s = 0.0
        for c in range(dim):
            t = A[j, c] - x[c]
            s += t * t
        dist[j] = np.sqrt(s)
        cost += dist[j] if p == 1.0 else dist[j] ** p
    hist[0] = cost
    n = 1
    x_new = np.empty(dim)
    dist_new = np.empty(m)
    for it in range(max_iter):
        jmin = 0
        for j in range(m):
            if dist[j] < dist[jmin]:
                jmin = j
        if dist[jmin] < eps:
            return x, n, it, 1
        wsum = 0.0
        for c in range(dim):
            x_new[c] = 0.0
        for j in range(m):
            w = 1.0 / dist[j] if p == 1.0 else dist[j] ** (p - 2.0)
            wsum += w
            for c in range(dim):
                x_new[c] += w * A[j, c]
        for c in range(dim):
            x_new[c] /= wsum
        new_cost = 0.0
        for j in range(m):
            s = 0.0
            for c in range(dim):
                t = A[j, c] - x_new[c]
                s += t * t
            dist_new[j] = np.sqrt(s)
            new_cost += dist_new[j] if p == 1.0 else dist_new[j] ** p
        if new_cost > cost:
            # only round-off gets here; keep the better point
            return x, n, it, 2
        # Weiszfeld crawls sublinearly toward an optimal anchor; try it directly
        jmin = 0
        for j in range(m):
            if dist_new[j] < dist_new[jmin]:
                jmin = j
        if anchor_costs[jmin] <= new_cost and dist[jmin] > 0.0:
            for c in range(dim):
                x_new[c] = A[jmin, c]
            for j in range(m):
                s = 0.0
                for c in range(dim):
                    t = A[j, c] - x_new[c]
                    s += t * t
                dist_new[j] = np.sqrt(s)
            new_cost = anchor_costs[jmin]
        step = 0.0
        for c in range(dim):
            t = x_new[c] - x[c]
            step += t * t
        step = np.sqrt(step)
        old = cost
        x = x_new.copy()
        for j in range(m):
            dist[j] = dist_new[j]
        cost = new_cost
        hist[n] = cost
        n += 1
        if old - cost <= tol * max(old, 1e-300) and step <= tol * scale:
            return x, n, it + 1, 0
    return x, n, max_iter, 0


@njit(cache=True)
def _escape_kernel(A, x, p, eps, cost):
    """Step off an anchor the iterate sits on, or report that it is optimal.

    For the 1-median this is the Vardi-Zhang test (optimal iff the pull of
    the other anchors has norm <= multiplicity) followed by their step;
    for p > 1 a backtracking move along the pull. Returns (x, cost, moved).
    """
    m, dim = A.shape
    dist = np.empty(m)
    for j in range(m):
        s = 0.0
        for c in range(dim):
            t = A[j, c] - x[c]
            s += t * t
        dist[j] = np.sqrt(s)
    pull = np.zeros(dim)
    multiplicity = 0
    inv_sum = 0.0
    nearest = np.inf
    for j in range(m):
        if dist[j] < eps:
            multiplicity += 1
            continue
        w = 1.0 / dist[j] if p == 1.0 else dist[j] ** (p - 2.0)
        inv_sum += 1.0 / dist[j]
        nearest = min(nearest, dist[j])
        for c in range(dim):
            pull[c] += w * (A[j, c] - x[c])
    if multiplicity == m:
        return x, cost, False
    norm_pull = np.sqrt(np.sum(pull * pull))
    if norm_pull == 0.0 or (p == 1.0 and norm_pull <= multiplicity):
        return x, cost, False
    step = (norm_pull - multiplicity) / inv_sum if p == 1.0 else nearest
    direction = pull / norm_pull
    for _ in range(MAX_HALVINGS):
        cand = x + step * direction
        c_new = 0.0
        for j in range(m):
            s = 0.0
            for c in range(dim):
                t = A[j, c] - cand[c]
                s += t * t
            d = np.sqrt(s)
            c_new += d if p == 1.0 else d**p
        if c_new < cost:
            return cand, c_new, True
        step *= 0.5
    return x, cost, False


@njit(cache=True)
def _weiszfeld_solve(A, x, p, tol, max_iter, eps, hist):
    """Weiszfeld steps with anchor escapes; hist needs max_iter + 1 slots.
    Returns (x, entries written to hist)."""
    m, dim = A.shape
    mean = np.zeros(dim)
    for j in range(m):
        for c in range(dim):
            mean[c] += A[j, c] / m
    far = 0.0
    for j in range(m):
        s = 0.0
        for c in range(dim):
            t = A[j, c] - mean[c]
            s += t * t
        far = max(far, np.sqrt(s))
    anchor_costs = _anchor_costs(A, p)
    buf = np.empty(max_iter + 1)
    budget = max_iter
    nh = 0
    first = True
    while True:
        x, n, used, status = _weiszfeld_kernel(A, x, p, tol, budget, eps, 1.0 + far, anchor_costs, buf)
        for t in range(0 if first else 1, n):
            hist[nh] = buf[t]
            nh += 1
        first = False
        budget -= used
        if status != 1 or budget <= 0:
            return x, nh
        x, c, moved = _escape_kernel(A, x, p, eps, buf[n - 1])
        if not moved:
            return x, nh
        hist[nh] = c
        nh += 1
        budget -= 1
        if budget <= 0:
            return x, nh


def _weiszfeld_family(A, init, cfg, history, p):
    x = np.asarray(init, dtype=float).copy()
    if x.shape != A.shape[1:]:
        raise ValueError(f"init has shape {x.shape}, anchors have dimension {A.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("init must be finite")
    hist = np.empty(cfg.max_inner_iterations + 1)
    x, nh = _weiszfeld_solve(np.ascontiguousarray(A), x, float(p), cfg.inner_tolerance,
                             cfg.max_inner_iterations, cfg.singularity_epsilon, hist)
    if history is not None:
        history.extend(hist[:nh].tolist())
    return x


def recenter_weiszfeld(anchors, init, cfg: RecenterConfig = DEFAULT_CONFIG, history=None) -> np.ndarray:
    """Weiszfeld iteration for the Fermat-Weber point (1-median)."""
    return _weiszfeld_family(_points(anchors), init, cfg, history, 1.0)


def recenter_lp(anchors, p: float, init, cfg: RecenterConfig = DEFAULT_CONFIG, history=None) -> np.ndarray:
    """Generalized Weiszfeld for sum_j |x - a_j|^p with 1 < p < 2.

    Each step minimizes the quadratic majorizer with weights |x - a_j|^(p-2),
    so the objective never increases.
    """
    if not 1.0 < p < 2.0:
        raise ValueError(f"p must lie in the open range (1, 2), got {p}")
    return _weiszfeld_family(_points(anchors), init, cfg, history, float(p))


# -- sphere ------------------------------------------------------------------


def _normalize(v):
    return v / np.linalg.norm(v)


def _check_unit(name, V, tol=1e-9):
    norms = np.linalg.norm(np.atleast_2d(V), axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ValueError(f"{name} must be unit-norm")


def recenter_sphere_centroid(anchors) -> np.ndarray:
    """Exact minimizer of the chordal sum of squares over the unit sphere."""
    A = _points(anchors)
    s = A.sum(axis=0)
    ns = np.linalg.norm(s)
    if ns < 1e-12 * len(A):
        logger.warning("anchors sum to zero; minimizer not unique, using fallback direction")
        return fallback_direction(np.zeros_like(s))
    return s / ns


def sum_chord(x, A) -> float:
    return float(np.sum(np.linalg.norm(A - x, axis=1)))


def sum_geo(x, A) -> float:
    return float(np.sum(geodesic_to(x, A)))


def sum_geo_sq(x, A) -> float:
    return float(np.sum(geodesic_to(x, A) ** 2))


def log_map(x, A):
    """Tangent vectors at ``x`` pointing to each anchor, length = angle.

    Returns (unit_directions, angles). Antipodal anchors get the fallback
    tangent; zero-angle anchors get a zero direction.
    """
    dots = A @ x
    orth = A - dots[:, None] * x
    sin = np.linalg.norm(orth, axis=1)
    theta = np.arctan2(sin, dots)
    dirs = np.zeros_like(A)
    ok = sin > 1e-15
    dirs[ok] = orth[ok] / sin[ok, None]
    antipodal = (~ok) & (dots < 0)
    if antipodal.any():
        dirs[antipodal] = fallback_direction(x)
    return dirs, theta


def exp_map(x, v):
    t = np.linalg.norm(v)
    if t == 0.0:
        return x.copy()
    return _normalize(np.cos(t) * x + np.sin(t) * (v / t))


def _tangent_descent(A, init, cfg, history, objective, direction_fn):
    x = _normalize(np.asarray(init, dtype=float))
    _check_unit("anchors", A)
    cost = objective(x)
    _record(history, cost)
    stalled = True
    for _ in range(cfg.max_inner_iterations):
        v = direction_fn(x)
        if v is None:
            stalled = False
            break
        t = 1.0
        for _ in range(MAX_HALVINGS):
            cand = exp_map(x, t * v)
            c = objective(cand)
            if c <= cost:
                break
            t *= 0.5
        else:
            stalled = False
            break
        old = cost
        step = float(np.linalg.norm(cand - x))
        x, cost = cand, c
        _record(history, cost)
        if _converged(old, cost, step, 1.0, cfg.inner_tolerance):
            stalled = False
            break
    if stalled:
        logger.debug("sphere recenter hit max_inner_iterations; returning best iterate")
    return x


def recenter_karcher(anchors, init, cfg: RecenterConfig = DEFAULT_CONFIG, history=None) -> np.ndarray:
    """Karcher mean: minimizer of the geodesic sum of squares.

    Steps along the mean of the log-mapped anchors, halving the step if the
    objective would go up.
    """
    A = _points(anchors)

    def direction(x):
        dirs, theta = log_map(x, A)
        v = (theta[:, None] * dirs).mean(axis=0)
        return None if np.linalg.norm(v) < 1e-16 else v

    return _tangent_descent(A, init, cfg, history, lambda x: sum_geo_sq(x, A), direction)


def recenter_geodesic_median(anchors, init, cfg: RecenterConfig = DEFAULT_CONFIG, history=None) -> np.ndarray:
    """Weiszfeld on the sphere: minimizer of the geodesic sum of distances.

    The tangent step is sum_j u_j / sum_j 1/theta_j where u_j is the unit
    direction to anchor j. On an anchor the Vardi-Zhang test decides whether
    to stop or to push off along the remaining pull.
    """
    A = _points(anchors)
    eps = cfg.singularity_epsilon

    def direction(x):
        dirs, theta = log_map(x, A)
        at = theta < eps
        if at.any():
            pull = dirs[~at].sum(axis=0)
            norm_pull = np.linalg.norm(pull)
            if norm_pull <= at.sum() or norm_pull == 0.0:
                return None
            step = (norm_pull - at.sum()) / np.sum(1.0 / theta[~at])
            return step * pull / norm_pull
        v = dirs.sum(axis=0) / np.sum(1.0 / theta)
        return None if np.linalg.norm(v) < 1e-16 else v

    return _tangent_descent(A, init, cfg, history, lambda x: sum_geo(x, A), direction)


def recenter_chordal_median(anchors, init, cfg: RecenterConfig = DEFAULT_CONFIG, history=None) -> np.ndarray:
    """Projected Weiszfeld for the chordal sum of distances on the sphere.

    The Weiszfeld point is pushed back to the sphere each step; the step is
    halved if the chordal cost would increase.
    """
    A = _points(anchors)
    _check_unit("anchors", A)
    eps = cfg.singularity_epsilon
    x = _normalize(np.asarray(init, dtype=float))
    cost = sum_chord(x, A)
    _record(history, cost)
    for _ in range(cfg.max_inner_iterations):
        dist = np.linalg.norm(A - x, axis=1)
        at = dist < eps
        if at.any():
            # tangent pull of the other anchors
            diff = A[~at] - x
            if len(diff) == 0:
                break
            pull = (diff / dist[~at, None]).sum(axis=0)
            pull -= (pull @ x) * x
            norm_pull = np.linalg.norm(pull)
            if norm_pull <= at.sum():
                break
            target = x + pull / np.sum(1.0 / dist[~at])
        else:
            w = 1.0 / dist
            target = (w[:, None] * A).sum(axis=0) / w.sum()
        t = 1.0
        for _ in range(MAX_HALVINGS):
            y = x + t * (target - x)
            ny = np.linalg.norm(y)
            if ny > 1e-12:
                cand = y / ny
                c = sum_chord(cand, A)
                if c <= cost:
                    break
            t *= 0.5
        else:
            break
        old = cost
        step = float(np.linalg.norm(cand - x))
        x, cost = cand, c
        _record(history, cost)
        if _converged(old, cost, step, 1.0, cfg.inner_tolerance):
            break
    return x
