"""Command-line interface: ``regvol sample | estimate | bench | verify``.

Every command prints a JSON report (or CSV rows with ``--format csv``) to
stdout or ``--out``. Subset indices in all outputs are 0-based. Wall-clock
timings live under ``timing`` and are the only non-deterministic fields.
"""

import csv
import io
import json
import sys

import click
import numpy as np

from . import __version__
from .datagen import DatasetSpec, add_intercept, generate, load_csv, load_libsvm, standardize
from .errors import RegVolError, VerificationFailure
from .experiments import benchmark, estimate, scaling_ratios, select_lambda
from .ridge import statistical_dimension
from .sampling import Algorithm, SampleConfig, sample
from .verify import SUITES

ALGORITHMS = [a.value for a in Algorithm]


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def dataset_options(fn):
    opts = [
        click.option("--csv", "csv_path", type=click.Path(exists=True, dir_okay=False),
                     help="CSV file, one example per row."),
        click.option("--libsvm", "libsvm_path", type=click.Path(exists=True, dir_okay=False),
                     help="LIBSVM regression file."),
        click.option("--synthetic", type=click.Choice(["gaussian-spectrum", "identity-blocks"]),
                     default="gaussian-spectrum", show_default=True,
                     help="Synthetic generator used when no file is given."),
        click.option("--d", "dim", type=int, default=5, show_default=True),
        click.option("--n", "n", type=int, default=100, show_default=True),
        click.option("--profile", default=None, help="Comma-separated eigenvalues of XX^T/n."),
        click.option("--w-norm", type=float, default=1.0, show_default=True),
        click.option("--sigma", type=float, default=1.0, show_default=True),
        click.option("--a", "a", type=float, default=1.0, show_default=True,
                     help="identity-blocks: w* = a*sigma*1."),
        click.option("--data-seed", type=int, default=0, show_default=True),
        click.option("--label-col", type=int, default=-1, show_default=True),
        click.option("--header/--no-header", default=False),
        click.option("--standardize/--no-standardize", default=False,
                     help="Center and scale features (off by default)."),
        click.option("--intercept/--no-intercept", default=False,
                     help="Append a constant feature."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def load_problem(kw):
    if kw["csv_path"] and kw["libsvm_path"]:
        raise click.UsageError("give at most one of --csv and --libsvm")
    if kw["csv_path"]:
        prob = load_csv(kw["csv_path"], label_col=kw["label_col"], header=kw["header"])
        source = {"source": "csv", "path": kw["csv_path"]}
    elif kw["libsvm_path"]:
        prob = load_libsvm(kw["libsvm_path"])
        source = {"source": "libsvm", "path": kw["libsvm_path"]}
    else:
        profile = _floats(kw["profile"]) if kw["profile"] else None
        spec = DatasetSpec(kind=kw["synthetic"], d=kw["dim"], n=kw["n"], profile=profile,
                           w_norm=kw["w_norm"], sigma=kw["sigma"], a=kw["a"], seed=kw["data_seed"])
        prob = generate(spec)
        source = {"source": "synthetic", "kind": spec.kind, "d": spec.d, "n": spec.n,
                  "profile": list(profile) if profile else None, "w_norm": spec.w_norm,
                  "sigma": spec.sigma, "a": spec.a, "seed": spec.seed}
    if kw["standardize"]:
        prob = standardize(prob)
    if kw["intercept"]:
        prob = add_intercept(prob)
    source.update(standardize=kw["standardize"], intercept=kw["intercept"],
                  d_effective=prob.d, n_effective=prob.n)
    return prob, source


def _dataset_keys():
    return ("csv_path", "libsvm_path", "synthetic", "dim", "n", "profile", "w_norm", "sigma",
            "a", "data_seed", "label_col", "header", "standardize", "intercept")


def _split(kwargs):
    data = {k: kwargs.pop(k) for k in _dataset_keys()}
    return data, kwargs


def emit(report, rows, fmt, out):
    if fmt == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                                 for k, v in row.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def make_report(command, config, results, timing):
    return {"command": command, "argv": sys.argv[1:], "config": config, "results": results,
            "timing": timing, "version": __version__}


class RegVolGroup(click.Group):
    """Maps package errors to one-line diagnostics and distinct exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except RegVolError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(exc.exit_code)


output_options = [
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                 show_default=True),
    click.option("--out", type=click.Path(dir_okay=False), default=None,
                 help="Write to this file instead of stdout."),
]


def with_output(fn):
    for opt in reversed(output_options):
        fn = opt(fn)
    return fn


@click.group(cls=RegVolGroup)
@click.version_option(__version__, prog_name="regvol")
def main():
    """Regularized volume sampling for subsampled ridge regression."""


@main.command("sample")
@dataset_options
@click.option("--algorithm", type=click.Choice(ALGORITHMS), default="hybrid", show_default=True)
@click.option("--size", type=int, required=True)
@click.option("--lambda", "lam", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--recompute-interval", type=int, default=None)
@with_output
def sample_cmd(**kwargs):
    """Draw one subset and report its indices."""
    data, kw = _split(kwargs)
    prob, source = load_problem(data)
    cfg = SampleConfig(kw["size"], kw["lam"], kw["seed"], kw["algorithm"], kw["recompute_interval"])
    res = sample(prob.X, cfg)
    results = {"subset": res.subset.tolist(), "size": int(res.subset.size),
               "trials": int(res.trials)}
    if res.probabilities is not None:
        results["probabilities"] = res.probabilities.tolist()
    rows = [{"position": k, "index": int(i)} for k, i in enumerate(res.subset.tolist())]
    if res.probabilities is not None:
        for row, p in zip(rows, res.probabilities.tolist()):
            row["probability"] = p
    config = {"dataset": source, "algorithm": cfg.algorithm.value, "size": cfg.size,
              "lambda": cfg.lam, "seed": cfg.seed, "recompute_interval": kw["recompute_interval"]}
    emit(make_report("sample", config, results, {"sampling_seconds": res.wall_time}),
         rows, kw["fmt"], kw["out"])


@main.command("estimate")
@dataset_options
@click.option("--algorithm", type=click.Choice(ALGORITHMS), default="hybrid", show_default=True)
@click.option("--size", type=int, required=True)
@click.option("--ridge-lambda", type=float, default=None,
              help="Ridge regularizer (default 0, or the grid optimum with --select-lambda).")
@click.option("--sample-lambda", type=float, default=None,
              help="Sampling regularizer; defaults to --ridge-lambda.")
@click.option("--select-lambda", is_flag=True,
              help="Pick the shared lambda from a log grid by mean loss.")
@click.option("--replicates", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--rescale/--no-rescale", default=None,
              help="Importance-rescale leverage subsets (default: on for leverage).")
@click.option("--jobs", type=int, default=1, envvar="REGVOL_JOBS", show_default=True,
              help="Worker threads for replicates (env REGVOL_JOBS).")
@with_output
def estimate_cmd(**kwargs):
    """Evaluate the subsampled ridge estimator over repeated samples."""
    import time

    data, kw = _split(kwargs)
    prob, source = load_problem(data)
    t0 = time.perf_counter()
    grid_info = None
    ridge_lam = kw["ridge_lambda"]
    if kw["select_lambda"]:
        ridge_lam, grid, means = select_lambda(prob, kw["algorithm"], kw["size"],
                                               kw["replicates"], kw["seed"])
        grid_info = {"grid": grid, "mean_loss": means}
    if ridge_lam is None:
        ridge_lam = 0.0
    sample_lam = ridge_lam if kw["sample_lambda"] is None else kw["sample_lambda"]
    rows, summary, sampling_time = estimate(prob, kw["algorithm"], kw["size"], sample_lam,
                                            ridge_lam, kw["replicates"], kw["seed"],
                                            rescale=kw["rescale"], jobs=kw["jobs"])
    results = {"replicates": rows, "summary": summary}
    if grid_info:
        results["lambda_selection"] = grid_info
    if prob.has_truth and sample_lam == ridge_lam:
        try:
            d_lam = statistical_dimension(prob.X, ridge_lam)
            results["d_lambda"] = d_lam
            if kw["size"] > d_lam - 1:
                results["mspe_bound"] = prob.sigma ** 2 * d_lam / (kw["size"] - d_lam + 1)
        except RegVolError:
            pass
    config = {"dataset": source, "algorithm": kw["algorithm"], "size": kw["size"],
              "ridge_lambda": ridge_lam, "sample_lambda": sample_lam,
              "replicates": kw["replicates"], "seed": kw["seed"], "rescale": kw["rescale"]}
    timing = {"total_seconds": time.perf_counter() - t0, "sampling_seconds": sampling_time}
    emit(make_report("estimate", config, results, timing), rows, kw["fmt"], kw["out"])


@main.command("bench")
@click.option("--algorithm", "algorithms", type=click.Choice(ALGORITHMS), multiple=True,
              default=("fastregvol", "regvol"), show_default=True)
@click.option("--n-grid", default="5000,10000,20000,40000", show_default=True)
@click.option("--d", "dim", type=int, default=12, show_default=True)
@click.option("--size", type=int, default=None, help="Target size (default 2d).")
@click.option("--lambda", "lam", type=float, default=0.0, show_default=True)
@click.option("--reps", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--data-seed", type=int, default=0, show_default=True)
@with_output
def bench_cmd(algorithms, n_grid, dim, size, lam, reps, seed, data_seed, fmt, out):
    """Wall time versus n on prefixes of a Gaussian design."""
    grid = _ints(n_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise click.BadParameter("grid values must be strictly ascending", param_hint="--n-grid")
    size = 2 * dim if size is None else size
    rows = benchmark(algorithms, grid, dim, size, lam, reps, seed, data_seed)
    ratios = {a: [{"n": lo, "n_next": hi, "ratio": r} for lo, hi, r in scaling_ratios(rows, a)]
              for a in dict.fromkeys(algorithms)}
    config = {"algorithms": list(algorithms), "n_grid": grid, "d": dim, "size": size,
              "lambda": lam, "reps": reps, "seed": seed, "data_seed": data_seed}
    results = {"trials": {f"{r['algorithm']}/{r['n']}": r["trials"] for r in rows}}
    timing = {"rows": rows, "ratios": ratios}
    csv_rows = [{"algorithm": r["algorithm"], "n": r["n"], "median_seconds": r["median_seconds"],
                 "seconds": r["seconds"]} for r in rows]
    emit(make_report("bench", config, results, timing), csv_rows, fmt, out)


@main.command("verify")
@click.option("--suite", type=click.Choice(sorted(SUITES)), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--runs", type=int, default=100_000, show_default=True,
              help="distribution suite: sampler runs per instance.")
@click.option("--replicates", type=int, default=2000, show_default=True,
              help="theorem2/theorem3 suites: Monte Carlo replicates.")
@with_output
def verify_cmd(suite, seed, runs, replicates, fmt, out):
    """Run a verification suite; exit 0 iff every check passes."""
    fn = SUITES[suite]
    if suite == "distribution":
        checks = fn(seed=seed, runs=runs)
    elif suite in ("theorem2", "theorem3"):
        checks = fn(seed=seed, replicates=replicates)
    else:
        checks = fn(seed=seed)
    rows = [c.as_dict() for c in checks]
    passed = all(c.passed for c in checks)
    config = {"suite": suite, "seed": seed, "runs": runs, "replicates": replicates}
    emit(make_report("verify", config, {"passed": passed, "checks": rows}, {}), rows, fmt, out)
    if not passed:
        raise VerificationFailure(c.name for c in checks if not c.passed)


if __name__ == "__main__":
    main()
