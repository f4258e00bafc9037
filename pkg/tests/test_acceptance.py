"""Exit criteria. Each test prints one PASS/FAIL line (visible without -s)
and then asserts, so a failing criterion still reports what it measured."""

import time

import numpy as np
import pytest

from conftest import grid_minimum, hemisphere_anchors, unit_rows
from placecenter import (
    SolverConfig,
    classical_mds_seed,
    cli,
    datagen,
    jl_sphere,
    parse_variant,
    place_center,
    seeding,
    smacof_baseline,
    total_cost,
)
from placecenter.geometry import pairwise_distances
from placecenter.recenter import (
    recenter_geodesic_median,
    recenter_karcher,
    recenter_weiszfeld,
    sum_dist,
    sum_geo,
    sum_geo_sq,
)

pytestmark = pytest.mark.acceptance

VARIANT_NAMES = ["fmds", "rmds", "r2mds", "lp:1.5", "c1s", "c2s", "g1s", "g2s"]


@pytest.fixture
def report(capsys):
    def emit(number, checks, detail, elapsed, budget=None):
        ok = all(checks.values())
        if budget is not None:
            ok = ok and elapsed < budget
        failed = [name for name, good in checks.items() if not good]
        if budget is not None and elapsed >= budget:
            failed.append(f"runtime over {budget:g} s")
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s) {detail}"
        if failed:
            line += " | failed: " + "; ".join(failed)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def monotone_instance(m):
    name = VARIANT_NAMES[m % 8]
    n = (10, 25, 50)[m % 3]
    v = parse_variant(name)
    if v.spherical:
        metric = v.space
        _, D = datagen.planted_spherical(n, 5, 2, 0.1, m, metric=metric)
        return name, D, seeding.spherical_seed(D, 2, metric=metric)
    _, D = datagen.planted_euclidean(n, 6, 2, 0.3, m)
    return name, D, classical_mds_seed(D, 2)


@pytest.fixture(scope="module")
def monotone_runs():
    # sweeps are capped so the 100 runs fit the budget; every sweep that
    # does run is checked
    cfg = SolverConfig(max_outer_iterations=15)
    t0 = time.perf_counter()
    runs = []
    for m in range(100):
        name, D, X0 = monotone_instance(m)
        worst_inner = [0.0]

        def hook(sweep, i, h, worst=worst_inner):
            if len(h) > 1:
                worst[0] = max(worst[0], float(np.max(np.diff(h))))

        res = place_center(D, name, X0, cfg, place_hook=hook)
        runs.append((name, len(D), res.trace.costs, worst_inner[0], res.stats.place_calls))
    return runs, time.perf_counter() - t0


def test_criterion_1_outer_monotonicity(monotone_runs, report):
    runs, elapsed = monotone_runs
    worst = max(float(np.max(np.diff(c))) if len(c) > 1 else -np.inf for _, _, c, _, _ in runs)
    checks = {
        "100 instances": len(runs) == 100,
        "all 8 variants": {r[0] for r in runs} == set(VARIANT_NAMES),
        "all sizes": {r[1] for r in runs} == {10, 25, 50},
        "sweep cost nonincreasing within 1e-9": worst <= 1e-9,
    }
    sweeps = sum(len(c) - 1 for _, _, c, _, _ in runs)
    report(1, checks, f"{len(runs)} runs, {sweeps} sweeps, largest sweep increase {worst:.3g}", elapsed, 120)


def test_criterion_2_inner_monotonicity(monotone_runs, report):
    runs, elapsed = monotone_runs
    worst = max(r[3] for r in runs)
    calls = sum(r[4] for r in runs)
    checks = {"per-alternation row cost nonincreasing within 1e-12": worst <= 1e-12}
    report(2, checks, f"{calls} place calls, largest alternation increase {worst:.3g}", elapsed)


def test_criterion_3_weiszfeld_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    misses = []
    for trial in range(50):
        A = rng.uniform(-1, 1, (int(rng.integers(2, 7)), 2))
        x = recenter_weiszfeld(A, A.mean(axis=0))
        lo, hi = A.min(axis=0) - 0.1, A.max(axis=0) + 0.1
        _, best, spread = grid_minimum(
            lambda G: np.linalg.norm(G[:, None, :] - A[None], axis=-1).sum(axis=1), lo, hi)
        if sum_dist(x, A) > best + spread:
            misses.append(trial)
    T = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    fermat = recenter_weiszfeld(T, T.mean(axis=0))
    expect = (3 - np.sqrt(3)) / 6
    err = float(np.max(np.abs(fermat - expect)))
    checks = {"grid oracle on 50 sets": not misses, "Fermat point within 1e-6": err < 1e-6}
    report(3, checks, f"grid misses {misses}, Fermat error {err:.2e}", time.perf_counter() - t0, 30)


def test_criterion_4_spherical_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    losses, norm_err = [], 0.0
    for trial in range(50):
        A, pole = hemisphere_anchors(rng, int(rng.integers(3, 9)))
        C = unit_rows(rng.standard_normal((1000, 3)))
        init = unit_rows(A.mean(axis=0, keepdims=True))[0]
        for solve, f in ((recenter_karcher, sum_geo_sq), (recenter_geodesic_median, sum_geo)):
            x = solve(A, init)
            norm_err = max(norm_err, abs(np.linalg.norm(x) - 1.0))
            best = min(f(c, A) for c in C)
            if f(x, A) > best + 1e-12 * max(1.0, best):
                losses.append((trial, solve.__name__))
    checks = {"no candidate beats either solver": not losses, "unit norm within 1e-12": norm_err <= 1e-12}
    report(4, checks, f"{len(losses)} losses over 100 solves, max norm error {norm_err:.1e}",
           time.perf_counter() - t0, 30)


def test_criterion_5_exact_recovery(report):
    t0 = time.perf_counter()
    worst_cost, worst_entry = 0.0, 0.0
    for k in (2, 5):
        for seed in range(3):
            _, D = datagen.planted_euclidean(50, 10, k, 0.0, seed)
            X0 = classical_mds_seed(D, k)
            worst_entry = max(worst_entry, float(np.max(np.abs(pairwise_distances("euclidean", X0) - D))))
            res = place_center(D, "fmds", X0)
            worst_cost = max(worst_cost, res.cost)
    checks = {"fMDS cost below 1e-8": worst_cost < 1e-8, "seed reconstructs D within 1e-7": worst_entry < 1e-7}
    report(5, checks, f"worst cost {worst_cost:.2e}, worst entry error {worst_entry:.2e}",
           time.perf_counter() - t0, 30)


def test_criterion_6_cross_solver_parity(report):
    t0 = time.perf_counter()
    fmds = parse_variant("fmds")
    gaps = []
    for seed in range(20):
        _, D = datagen.planted_euclidean(50, 10, 3, 0.3, 100 + seed)
        X0 = classical_mds_seed(D, 3)
        pc = total_cost(place_center(D, fmds, X0).embedding, D, fmds)
        sm = total_cost(smacof_baseline(D, 3, X0).embedding, D, fmds)
        gaps.append(abs(pc - sm) / max(pc, sm))
    worst = max(gaps)
    checks = {"final costs within 5%": worst <= 0.05}
    report(6, checks, f"largest relative gap {worst:.4f} over 20 instances", time.perf_counter() - t0, 60)


def test_criterion_7_robustness_ordering(report):
    t0 = time.perf_counter()
    rmds = parse_variant("rmds")
    wins = 0
    for seed in range(20):
        D = datagen.perturbed_matrix(50, 3, 0.3, 200 + seed)
        X0 = classical_mds_seed(D, 3)
        pc = total_cost(place_center(D, rmds, X0).embedding, D, rmds)
        sm = total_cost(smacof_baseline(D, 3, X0).embedding, D, rmds)
        wins += pc <= sm
    checks = {"PC-rMDS no worse in at least 80% of trials": wins >= 16}
    report(7, checks, f"PC-rMDS no worse in {wins}/20 trials", time.perf_counter() - t0, 120)


def test_criterion_8_sine_grid(report):
    t0 = time.perf_counter()
    eps = np.round(np.arange(51) * 0.01, 10)
    xs = np.round(np.arange(701) * 0.001, 10)
    grid = jl_sphere.check_lemma_small_angle(eps, xs)
    edge = jl_sphere.check_lemma_small_angle(eps, [0.75], enforce_range=False)
    checks = {
        "no violations on the grid": grid.violations == 0,
        "first inequality violated at x=0.75": edge.violations_first > 0,
    }
    detail = (f"grid {grid.points_checked} points, {grid.violations} violations; at x=0.75 "
              f"first inequality {edge.violations_first} violations, second {edge.violations_second}")
    report(8, checks, detail, time.perf_counter() - t0, 5)


def test_criterion_9_projection_trend(report):
    t0 = time.perf_counter()
    ks = [16, 32, 64, 128]
    med = jl_sphere.median_max_by_k(jl_sphere.jl_experiment(64, 255, ks, 20, 9))
    full = max(r[3] for r in jl_sphere.jl_experiment(64, 255, [255], 5, 9))
    seq = [med[k] for k in ks]
    checks = {
        "median max distortion strictly decreasing": all(a > b for a, b in zip(seq, seq[1:])),
        "k=d distortion below 1e-9": full < 1e-9,
    }
    detail = ", ".join(f"k={k}: {m:.4f}" for k, m in zip(ks, seq)) + f"; k=d {full:.1e}"
    report(9, checks, detail, time.perf_counter() - t0, 60)


def _command_outputs(root):
    cmds = [
        ["generate", "--n", 30, "--d", 12, "--k", 3, "--seed", 7, "--out", root / "planted"],
        ["generate", "--mode", "perturbed", "--n", 30, "--k", 3, "--seed", 7, "--out", root / "perturbed"],
        ["generate", "--mode", "spherical", "--n", 20, "--d", 5, "--k", 2, "--seed", 7, "--out", root / "sphere"],
        ["embed", "--variant", "rmds", "--k", 3, "--seed-mode", "random", "--seed", 3, "--clock", "none",
         "--in", root / "perturbed" / "D.csv", "--out", root / "embed_rmds"],
        ["embed", "--variant", "g1s", "--k", 2, "--seed-mode", "random", "--seed", 3, "--clock", "none",
         "--in", root / "sphere" / "D.csv", "--out", root / "embed_g1s"],
        ["bench", "--variants", "fmds,lp:1.5", "--seed-modes", "classical,random", "--k", "2,3",
         "--seed", 5, "--clock", "none", "--in", root / "planted" / "D.csv", "--out", root / "bench"],
        ["jl", "--n", 16, "--d", 31, "--k", "4,8", "--trials", 3, "--seed", 2, "--out", root / "jl.csv"],
    ]
    codes = [cli.main([str(a) for a in c]) for c in cmds]
    files = {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*.csv"))}
    return codes, files


def test_criterion_10_determinism(tmp_path, report):
    t0 = time.perf_counter()
    codes_a, a = _command_outputs(tmp_path / "a")
    codes_b, b = _command_outputs(tmp_path / "b")
    differing = sorted(str(k) for k in a if a.get(k) != b.get(k))
    checks = {
        "every command succeeded": all(c in (0, 3) for c in codes_a + codes_b),
        "same file set": a.keys() == b.keys(),
        "byte-identical CSV": not differing,
    }
    report(10, checks, f"{len(a)} CSV files compared, differing: {differing or 'none'}", time.perf_counter() - t0)
