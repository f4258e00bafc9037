import numpy as np
import pytest


def unit_rows(A):
    A = np.asarray(A, dtype=float)
    return A / np.linalg.norm(A, axis=1)[:, None]


def random_rotation(rng, dim):
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    return Q * np.sign(np.diag(R))


def grid_minimum(objective, lo, hi, cells=400):
    """Brute-force minimum of a 2-D objective on a cells x cells grid.

    Returns (best_point, best_value, spread) where spread is the largest
    objective change across two grid cells around the best point.
    """
    xs = np.linspace(lo[0], hi[0], cells)
    ys = np.linspace(lo[1], hi[1], cells)
    G = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    vals = objective(G.reshape(-1, 2)).reshape(cells, cells)
    a, b = np.unravel_index(np.argmin(vals), vals.shape)
    window = vals[max(a - 2, 0):a + 3, max(b - 2, 0):b + 3]
    return G[a, b], float(vals[a, b]), float(window.max() - vals[a, b])


def hemisphere_anchors(rng, m, dim=3):
    pole = unit_rows(rng.standard_normal((1, dim)))[0]
    A = unit_rows(rng.standard_normal((m, dim)))
    A[A @ pole < 0] *= -1
    # keep clear of the equator so the set stays in an open hemisphere
    A = unit_rows(A + 0.3 * pole)
    return A, pole


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
