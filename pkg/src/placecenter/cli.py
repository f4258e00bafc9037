"""Command line: generate | embed | bench | jl.

All files are header-less CSV of 17-significant-digit decimals, except
traces (header ``iter,cost,seconds``) and the JL table.
Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 iteration cap hit.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import datagen, jl_sphere, seeding
from .core import check_distance_matrix, parse_variant, total_cost
from .solver import SolverConfig, place_center, smacof_baseline

logger = logging.getLogger("placecenter")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_CAP = 3


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([fmt(x) for x in row])


def read_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path} is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path} has ragged rows")
    return np.array(rows, dtype=float)


def write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "cost", "seconds"])
        for it, cost, sec in trace.records:
            w.writerow([it, fmt(cost), fmt(sec)])


def read_trace(path):
    with open(path, newline="") as fh:
        return [(int(r["iter"]), float(r["cost"]), float(r["seconds"])) for r in csv.DictReader(fh)]


def int_list(text: str):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def str_list(text: str):
    return [t.strip() for t in text.split(",") if t.strip()]


# -- commands ----------------------------------------------------------------


def cmd_generate(args, parser):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.mode == "planted":
        P, D = datagen.planted_euclidean(args.n, args.d, args.k, args.noise, args.seed)
    elif args.mode == "perturbed":
        D = datagen.perturbed_matrix(args.n, args.k, args.fraction, args.seed)
        P = None
    else:
        P, D = datagen.planted_spherical(args.n, args.d, args.k, args.noise, args.seed)
    write_matrix(out / "D.csv", D)
    if P is not None and not args.no_points:
        write_matrix(out / "points.csv", P)
    print(f"wrote {out / 'D.csv'} ({len(D)} x {len(D)})")
    return EXIT_OK


def _euclidean_random_seed(D, k, seed):
    rng = np.random.default_rng(seed)
    off = D[~np.eye(len(D), dtype=bool)]
    sigma = (off.mean() if off.size else 1.0) / np.sqrt(2.0 * k)
    return rng.standard_normal((len(D), k)) * max(sigma, 1e-12)


def make_seed(D, v, k, mode, seed, seed_file=None):
    if mode == "file":
        if seed_file is None:
            raise ValueError("--seed-mode file needs --seed-file")
        X = read_matrix(seed_file)
        if v.spherical:
            X = X / np.linalg.norm(X, axis=1)[:, None]
        return X
    if v.spherical:
        smode = "normalize_classical" if mode == "classical" else "random_uniform"
        return seeding.spherical_seed(D, k, smode, seed, metric=v.space)
    if mode == "classical":
        return seeding.classical_mds_seed(D, k)
    if mode == "random":
        return _euclidean_random_seed(D, k, seed)
    raise ValueError(f"unknown seed mode {mode!r}")


def _solver_config(args):
    return SolverConfig(
        outer_threshold_t=args.threshold,
        max_outer_iterations=args.max_iter,
        rng_seed=args.seed,
        kink_slides=args.kink_slides,
        clock=None if args.clock == "none" else time.perf_counter,
    )


def run_cell(D, v, k, solver_name, seed_mode, args):
    X0 = make_seed(D, v, k, seed_mode, args.seed, getattr(args, "seed_file", None))
    cfg = _solver_config(args)
    if solver_name == "pc":
        return place_center(D, v, X0, cfg)
    if solver_name == "smacof":
        if v.spherical:
            raise ValueError("smacof baseline only supports euclidean variants")
        return smacof_baseline(D, k, X0, cfg, measure=v)
    raise ValueError(f"unknown solver {solver_name!r}")


def cmd_embed(args, parser):
    try:
        v = parse_variant(args.variant)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        D = check_distance_matrix(read_matrix(args.input))
    except (OSError, ValueError) as exc:
        print(f"error: cannot read distance matrix {args.input}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    res = run_cell(D, v, args.k, args.solver, args.seed_mode, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "embedding.csv", res.embedding)
    write_trace(out / "trace.csv", res.trace)
    status = "converged" if res.stats.converged else "stopped at iteration cap"
    print(f"{args.solver}/{v.name}: cost {res.cost:.10g} after {res.stats.sweeps} sweeps ({status})")
    return EXIT_OK if res.stats.converged else EXIT_CAP


def cmd_bench(args, parser):
    try:
        variants = [parse_variant(t) for t in args.variants]
    except ValueError as exc:
        parser.error(str(exc))
    for s in args.solvers:
        if s not in ("pc", "smacof"):
            parser.error(f"unknown solver {s!r}")
    try:
        D = check_distance_matrix(read_matrix(args.input))
    except (OSError, ValueError) as exc:
        print(f"error: cannot read distance matrix {args.input}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for k in args.k:
        for v in variants:
            for solver_name in args.solvers:
                if solver_name == "smacof" and v.spherical:
                    continue
                for mode in args.seed_modes:
                    res = run_cell(D, v, k, solver_name, mode, args)
                    tag = f"{solver_name}_{v.name.replace(':', '-')}_{mode}_k{k}"
                    write_trace(out / f"trace_{tag}.csv", res.trace)
                    summary.append([solver_name, v.name, mode, k, res.stats.sweeps,
                                    int(res.stats.converged), fmt(res.cost)])
                    print(f"{tag}: cost {res.cost:.10g}")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["solver", "variant", "seed_mode", "k", "sweeps", "converged", "final_cost"])
        w.writerows(summary)
    return EXIT_OK


def cmd_jl(args, parser):
    if args.check_lemma:
        eps = np.round(np.arange(0, 51) * 0.01, 10)
        xs = np.round(np.arange(0, 701) * 0.001, 10)
        rep = jl_sphere.check_lemma_small_angle(eps, xs)
        print(f"lemma grid: {rep.points_checked} points, {rep.violations} violations "
              f"(worst margins {rep.worst_margin_first:.3g}, {rep.worst_margin_second:.3g})")
        if args.n is None:
            return EXIT_OK if rep.violations == 0 else EXIT_FAIL
    if args.n is None or args.d is None or not args.k:
        parser.error("jl needs --n, --d and --k (or only --check-lemma)")
    bad = [k for k in args.k if not 1 <= k < args.d]
    if bad:
        parser.error(f"every k must satisfy 1 <= k < d={args.d}; got {bad}")
    rows = jl_sphere.jl_experiment(args.n, args.d, args.k, args.trials, args.seed)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "trial", "median_distortion", "max_distortion"])
        for k, trial, med, mx in rows:
            w.writerow([k, trial, fmt(med), fmt(mx)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    for k, m in jl_sphere.median_max_by_k(rows).items():
        print(f"k={k}: median max distortion {m:.6g}", file=sys.stderr)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_solver_flags(p):
    p.add_argument("--in", dest="input", required=True, help="distance matrix CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-6, help="stop when a sweep gains less than this")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--clock", choices=["wall", "none"], default="wall",
                   help="'none' writes zero seconds so traces are byte-reproducible")
    p.add_argument("--kink-slides", action="store_true",
                   help="absolute-error variants: slide along spheres where the alternation stalls (slower)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="placecenter", description="PlaceCenter MDS toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic distance matrix")
    g.add_argument("--mode", choices=["planted", "perturbed", "spherical"], default="planted")
    g.add_argument("--n", type=int, default=300)
    g.add_argument("--d", type=int, default=200)
    g.add_argument("--k", type=int, default=10)
    g.add_argument("--noise", type=float, default=0.3)
    g.add_argument("--fraction", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-points", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("embed", help="embed a distance matrix")
    _add_solver_flags(e)
    e.add_argument("--variant", default="fmds", help="fmds|rmds|r2mds|lp:<p>|c1s|c2s|g1s|g2s")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--solver", choices=["pc", "smacof"], default="pc")
    e.add_argument("--seed-mode", choices=["classical", "random", "file"], default="classical")
    e.add_argument("--seed-file")
    e.set_defaults(func=cmd_embed)

    b = sub.add_parser("bench", help="run variant x solver x seed-mode cells, one trace each")
    _add_solver_flags(b)
    b.add_argument("--variants", type=str_list, default=["fmds"])
    b.add_argument("--solvers", type=str_list, default=["pc", "smacof"])
    b.add_argument("--seed-modes", type=str_list, default=["classical"])
    b.add_argument("--k", type=int_list, default=[10])
    b.set_defaults(func=cmd_bench)

    j = sub.add_parser("jl", help="spherical random projection experiment")
    j.add_argument("--n", type=int)
    j.add_argument("--d", type=int)
    j.add_argument("--k", type=int_list, default=[])
    j.add_argument("--trials", type=int, default=20)
    j.add_argument("--seed", type=int, default=0)
    j.add_argument("--out", help="CSV path (default stdout)")
    j.add_argument("--check-lemma", action="store_true")
    j.set_defaults(func=cmd_jl)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "bench":
        for m in args.seed_modes:
            if m not in ("classical", "random"):
                parser.error(f"bench seed modes are classical|random, got {m!r}")
    try:
        return args.func(args, parser)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
