"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (visible with ``pytest -s`` or in
the captured output of ``pytest -v``) before asserting.
"""

import math

import numpy as np
import pytest

from regvol import oracle, verify
from regvol.datagen import DatasetSpec, gen_gaussian, gen_lower_bound
from regvol.experiments import benchmark, scaling_ratios
from regvol.ridge import monte_carlo_mspe, statistical_dimension, statistical_dimension_eig
from regvol.sampling import SampleConfig, fastregvol

pytestmark = pytest.mark.slow


def report(number, title, passed, detail=""):
    line = f"[criterion {number:>2}] {'PASS' if passed else 'FAIL'}  {title}"
    print(line + (f"  ({detail})" if detail else ""))
    return passed


def failed(checks):
    return [f"{c.name}={c.value:.4g} vs {c.threshold:.4g}" for c in checks if not c.passed]


@pytest.fixture(scope="module")
def distribution_checks():
    return verify.distribution_suite(seed=0, runs=100_000)


def test_criterion_01_oracle_agreement(distribution_checks):
    tv = [c for c in distribution_checks if c.name.endswith("/tv") or c.name.endswith("/chi2")]
    instances = verify.small_instances()
    assert len(instances) >= 5
    assert all(i.X.shape[1] <= 8 and i.X.shape[0] <= 3 for i in instances)
    assert {i.lam for i in instances} == {0.0, 0.5, 2.0}
    worst = max(c.value for c in tv if c.name.endswith("/tv"))
    bad = failed(tv)
    assert report(1, "empirical vs exact chain distribution, TV <= 0.02", not bad,
                  f"worst TV {worst:.4f}"), bad


def test_criterion_02_chain_equals_marginals(distribution_checks):
    checks = [c for c in distribution_checks if c.name.endswith("chain=marginals")]
    rng = np.random.default_rng(2)
    for d, n, s in ((1, 6, 2), (2, 7, 3), (3, 8, 5), (3, 8, 3)):
        X = rng.standard_normal((d, n))
        chain = oracle.exact_chain_distribution(X, 0.0, s)
        marg = oracle.volume_marginals(X, s)
        diff = float(np.max(np.abs(chain.vector(marg.keys()) - marg.vector())))
        checks.append(verify.Check(f"random-{d}x{n}/s={s}", diff <= 1e-10, diff, 1e-10))
    worst = max(c.value for c in checks)
    bad = failed(checks)
    assert report(2, "lambda=0 chain law equals volume marginals to 1e-10", not bad,
                  f"worst {worst:.2e}"), bad


def test_criterion_03_cached_weights():
    checks = verify.lemma2_suite(seed=0, total_removals=1000)
    bad = failed(checks)
    assert report(3, "cached RegVol weights match fresh weights to 1e-8", not bad,
                  f"max diff {checks[0].value:.2e}; {checks[0].detail}"), bad


def test_criterion_04_psd_gap():
    checks = [c for c in verify.theorem1_suite(seed=0) if c.name.startswith("psd-gap")]
    assert len(checks) == 4
    bad = failed(checks)
    assert report(4, "expected regularized inverse PSD gap >= -1e-8", not bad,
                  f"min eigenvalue {min(c.value for c in checks):.3e}"), bad


def test_criterion_05_mspe_bound():
    problems = verify.theorem2_problems(seed=0)
    blocks = problems[0][1]
    assert blocks.X.shape == (4, 40) and blocks.sigma == 1.0
    np.testing.assert_array_equal(blocks.w_star, 1.0)
    checks = verify.theorem2_suite(seed=0, replicates=2000)
    assert len(checks) == 3 * len(problems)
    bad = failed(checks)
    assert report(5, "volume-sampled MSPE <= sigma^2 d_lam/(s-d_lam+1) + 3 stderr", not bad,
                  f"{len(checks)} (instance, s) pairs"), bad


def test_criterion_06_sharpness():
    d, n, a, sigma, lam = 2, 6, 1.0, 1.0, 1.0
    checks = []
    for s in range(0, n + 1):
        sw = oracle.lower_bound_sweep(d, n, a, sigma, lam, s)
        below = min(v - sw.bound for v in sw.values.values())
        checks.append(verify.Check(f"s={s}/all>=bound", below >= -1e-10, below, -1e-10))
        balanced = [v for k, v in sw.values.items() if len(set(sw.counts[k])) == 1]
        if balanced:
            dev = max(abs(v - sw.jensen_bound) for v in balanced)
            checks.append(verify.Check(f"s={s}/balanced", dev <= 1e-10, dev, 1e-10))
            gap = abs(sw.min_mspe - min(balanced))
            checks.append(verify.Check(f"s={s}/balanced-is-min", gap <= 1e-10, gap, 1e-10))
    bad = failed(checks)
    assert report(6, "every subset MSPE >= bound; balanced subsets attain the minimum", not bad,
                  f"{len(checks)} checks"), bad


def test_criterion_07_separation():
    d = 8
    a, lam, sigma = math.sqrt(2 * d), 1.0 / (2 * d), 1.0
    prob = gen_lower_bound(d, 80, a, sigma, seed=0)
    d_lam = statistical_dimension(prob.X, lam)
    s_iid = math.floor(d_lam * (math.log(d_lam) - 1))
    s_vol = 2 * math.ceil(d_lam)
    lev = monte_carlo_mspe(prob, "leverage", lam, s_iid, 2000, seed=0)
    vol = monte_carlo_mspe(prob, "hybrid", lam, s_vol, 2000, seed=0)
    bound = sigma ** 2 * d_lam / (s_vol - d_lam + 1)
    ok_lev = lev.mean >= sigma ** 2 - 3 * lev.stderr
    ok_vol = vol.mean <= bound + 3 * vol.stderr
    detail = (f"leverage s={s_iid}: {lev.mean:.3f}+/-{lev.stderr:.3f} >= 1; "
              f"volume s={s_vol}: {vol.mean:.3f}+/-{vol.stderr:.3f} <= {bound:.3f}")
    assert report(7, "i.i.d. leverage fails where volume sampling succeeds",
                  ok_lev and ok_vol, detail), detail


def test_criterion_08_trial_budget():
    d, n = 5, 1000
    X = gen_gaussian(DatasetSpec(d=d, n=n, seed=8)).X
    trials = [fastregvol(X, SampleConfig(2 * d, 0.0, seed=k)).trials for k in range(50)]
    mean = float(np.mean(trials))
    assert report(8, "mean FastRegVol trials <= 2.2 n", mean <= 2.2 * n,
                  f"mean {mean:.1f} = {mean / n:.3f} n"), mean


def test_criterion_09_runtime_scaling():
    grid = [5000, 10_000, 20_000, 40_000]
    rows = benchmark(["fastregvol", "regvol"], grid, d=12, size=24, lam=0.0, reps=5)
    fast = scaling_ratios(rows, "fastregvol")
    slow = scaling_ratios(rows, "regvol")
    ok_fast = all(r <= 2.5 for _, _, r in fast)
    ok_slow = all(r >= 3.0 for _, _, r in slow)
    detail = ("fastregvol " + ", ".join(f"{r:.2f}" for _, _, r in fast)
              + "; regvol " + ", ".join(f"{r:.2f}" for _, _, r in slow))
    assert report(9, "time(2n)/time(n): FastRegVol <= 2.5, RegVol >= 3", ok_fast and ok_slow,
                  detail), detail


def test_criterion_10_dimension_forms():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 10))
        n = int(rng.integers(d, 50))
        X = rng.standard_normal((d, n)) * rng.uniform(0.1, 3.0, size=(d, 1))
        lam = float(10 ** rng.uniform(-3, 2))
        worst = max(worst, abs(statistical_dimension(X, lam) - statistical_dimension_eig(X, lam)))
    # the [TRIVIAL]/[DERIVED] operation examples live in the per-module test files
    assert report(10, "d_lambda trace and eigenvalue forms agree to 1e-8", worst <= 1e-8,
                  f"worst {worst:.2e}; operation examples covered by the unit suite"), worst
