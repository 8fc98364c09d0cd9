"""Experiment drivers behind the ``estimate`` and ``bench`` commands."""

import statistics
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .datagen import DatasetSpec, gen_gaussian
from .ridge import lambda_grid, mse, mspe, ridge_fit, summarize, total_loss
from .sampling import Algorithm, SampleConfig, make_rng, sample


def estimate(problem, algorithm, size, sample_lam, ridge_lam, replicates, seed=0,
             rescale=None, jobs=1):
    """Sample, fit and score ``replicates`` times.

    Leverage-score subsets are importance-rescaled unless ``rescale`` is
    ``False``; volume subsets never are. Returns per-replicate rows and
    summaries of the full-data loss (and exact MSPE/MSE when the problem
    carries its ground truth).
    """
    algorithm = Algorithm(algorithm)
    if rescale is None:
        rescale = algorithm is Algorithm.LEVERAGE
    cfg = SampleConfig(size, sample_lam, seed, algorithm)

    def one(r):
        res = sample(problem.X, cfg, rng=make_rng(seed, algorithm, replicate=r))
        probs = res.probabilities if rescale else None
        fit = ridge_fit(problem.X, problem.y, res.subset, ridge_lam, rescale_probs=probs)
        row = {
            "replicate": r,
            "subset": res.subset.tolist(),
            "trials": res.trials,
            "loss": total_loss(problem.X, problem.y, fit),
        }
        if problem.has_truth:
            row["mspe"] = mspe(problem, res.subset, ridge_lam, probs)
            row["mse"] = mse(problem, res.subset, ridge_lam, probs)
        return row, res.wall_time

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            out = list(pool.map(one, range(replicates)))
    else:
        out = [one(r) for r in range(replicates)]
    rows = [row for row, _ in out]
    summary = {}
    for key in ("loss", "mspe", "mse"):
        if rows and key in rows[0]:
            est = summarize([row[key] for row in rows])
            summary[key] = {"mean": est.mean, "stderr": est.stderr}
    sampling_time = sum(t for _, t in out)
    return rows, summary, sampling_time


def select_lambda(problem, algorithm, size, replicates, seed=0, grid=None):
    """Grid-search the lambda (shared by sampler and estimator) with the lowest mean loss."""
    if grid is None:
        grid = lambda_grid(float(np.var(problem.y)) or 1.0)
    means = []
    for lam in grid:
        _, summary, _ = estimate(problem, algorithm, size, lam, lam, replicates, seed)
        means.append(summary["loss"]["mean"])
    best = int(np.argmin(means))
    return float(grid[best]), [float(v) for v in grid], means


def benchmark(algorithms, n_grid, d, size, lam, reps, seed=0, data_seed=0):
    """Median wall time per (algorithm, n) on prefixes of one Gaussian design.

    Returns rows sorted by algorithm then n with keys ``algorithm``, ``n``,
    ``median_seconds``, ``seconds`` (all reps) and ``trials``.
    """
    n_grid = list(n_grid)
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n grid must be strictly ascending")
    X = gen_gaussian(DatasetSpec(d=d, n=max(n_grid), seed=data_seed)).X
    prefixes = {n: np.ascontiguousarray(X[:, :n]) for n in n_grid}
    algorithms = [Algorithm(a) for a in algorithms]
    times = {(a, n): [] for a in algorithms for n in n_grid}
    trials = {(a, n): [] for a in algorithms for n in n_grid}
    # reps are interleaved across grid points so slow drift in machine speed
    # does not bias one n against another
    for r in range(reps):
        for alg in algorithms:
            for n in n_grid:
                cfg = SampleConfig(size, lam, seed, alg)
                t0 = time.perf_counter()
                res = sample(prefixes[n], cfg, rng=make_rng(seed, alg, replicate=r))
                times[alg, n].append(time.perf_counter() - t0)
                trials[alg, n].append(res.trials)
    return [{
        "algorithm": alg.value,
        "n": n,
        "median_seconds": statistics.median(times[alg, n]),
        "seconds": times[alg, n],
        "trials": trials[alg, n],
    } for alg in algorithms for n in n_grid]


def scaling_ratios(rows, algorithm):
    """``time(n_{k+1}) / time(n_k)`` for consecutive grid points of one algorithm."""
    pts = [(r["n"], r["median_seconds"]) for r in rows if r["algorithm"] == Algorithm(algorithm).value]
    return [(a[0], b[0], b[1] / a[1]) for a, b in zip(pts, pts[1:])]
