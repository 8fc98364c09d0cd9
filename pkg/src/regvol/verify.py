"""Verification suites run by ``regvol verify``.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks pass.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, oracle
from .datagen import DatasetSpec, gen_gaussian, gen_lower_bound
from .ridge import monte_carlo_mspe, statistical_dimension
from .sampling import SampleConfig, SampleState, fastregvol, hybrid, regvol, removal_weight

TV_TOLERANCE = 0.02
CHI2_ALPHA = 1e-3
PSD_TOLERANCE = 1e-8
EXACT_TOLERANCE = 1e-10
WEIGHT_TOLERANCE = 1e-8
NEGATIVE_H_TOLERANCE = 1e-9


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "value": float(self.value),
                "threshold": float(self.threshold), "detail": self.detail}


@dataclass(frozen=True)
class SmallInstance:
    name: str
    X: np.ndarray
    lam: float
    s: int
    samplers: tuple = ("regvol", "fastregvol", "hybrid")


def _gauss(d, n, seed):
    return np.random.default_rng(seed).standard_normal((d, n))


def small_instances():
    """Fixed instances with n <= 8, d <= 3 and lambda in {0, 0.5, 2}."""
    return [
        SmallInstance("line-1x3-lam0", np.array([[1.0, 2.0, 3.0]]), 0.0, 2),
        SmallInstance("gauss-2x6-lam0", _gauss(2, 6, 11), 0.0, 4),
        SmallInstance("gauss-3x8-lam2", _gauss(3, 8, 12), 2.0, 3),
        SmallInstance("gauss-3x8-lam0.5", _gauss(3, 8, 13), 0.5, 1),
        SmallInstance("blocks-2x4-lam2", np.tile(np.eye(2), 2), 2.0, 1),
        # size < 2d at lambda = 0 is out of reach for plain fastregvol
        SmallInstance("gauss-3x7-lam0", _gauss(3, 7, 14), 0.0, 3, ("regvol", "hybrid")),
    ]


SAMPLER_FUNCS = {"regvol": regvol, "fastregvol": fastregvol, "hybrid": hybrid}


def distribution_suite(seed=0, runs=100_000, instances=None):
    """Empirical sampler laws vs the exact chain distribution (TV and chi-square)."""
    checks = []
    for k, inst in enumerate(instances or small_instances()):
        exact = oracle.exact_chain_distribution(inst.X, inst.lam, inst.s)
        tables = {}
        for j, name in enumerate(inst.samplers):
            emp = oracle.empirical_distribution(SAMPLER_FUNCS[name], inst.X, inst.lam, inst.s,
                                                runs, seed=seed * 1000 + 10 * k + j)
            tables[name] = emp
            tv = emp.tv_distance(exact)
            checks.append(Check(f"{inst.name}/{name}/tv", tv <= TV_TOLERANCE, tv, TV_TOLERANCE,
                                f"{runs} runs, {len(exact.probs)} subsets"))
        if "fastregvol" in tables:
            p = oracle.chi_square_homogeneity(tables["regvol"], tables["fastregvol"])
            checks.append(Check(f"{inst.name}/regvol~fastregvol/chi2", p > CHI2_ALPHA, p,
                                CHI2_ALPHA, "p-value"))
        if inst.lam == 0:
            marg = oracle.volume_marginals(inst.X, inst.s)
            diff = max(abs(exact.probs[k2] - marg.probs[k2]) for k2 in marg.probs)
            checks.append(Check(f"{inst.name}/chain=marginals", diff <= EXACT_TOLERANCE, diff,
                                EXACT_TOLERANCE))
    return checks


def theorem1_suite(seed=0):
    """PSD bound on the expected regularized inverse, plus the normalizer bound."""
    X = _gauss(3, 10, 100 + seed)
    checks = []
    for lam in (0.1, 1.0):
        for s in (4, 6):
            gap = oracle.inverse_expectation_gap(X, lam, s)
            checks.append(Check(f"psd-gap/lam={lam}/s={s}", gap >= -PSD_TOLERANCE, gap,
                                -PSD_TOLERANCE, "smallest eigenvalue"))
            slack = oracle.exact_chain_distribution(X, lam, s).min_normalizer_slack
            checks.append(Check(f"normalizer/lam={lam}/s={s}", slack >= -EXACT_TOLERANCE, slack,
                                -EXACT_TOLERANCE, "min sum_i h_i(S) - (|S| - d_lam)"))
    return checks


def theorem2_problems(seed=0):
    """Witness problems with lambda = sigma^2 / ||w*||^2."""
    blocks = gen_lower_bound(4, 40, 1.0, 1.0, seed=seed)
    g1 = gen_gaussian(DatasetSpec(d=4, n=40, profile=(4.0, 2.0, 1.0, 0.25), w_norm=2.0,
                                  sigma=1.0, seed=seed + 1))
    g2 = gen_gaussian(DatasetSpec(d=4, n=40, profile=(1.0, 0.1, 0.01, 0.001), w_norm=2.0,
                                  sigma=1.0, seed=seed + 2))
    return [("blocks-4x40", blocks), ("gauss-fast-decay-4x40", g2), ("gauss-4x40", g1)]


def mspe_bound(sigma, d_lam, s):
    return sigma ** 2 * d_lam / (s - d_lam + 1)


def theorem2_suite(seed=0, replicates=2000):
    checks = []
    for name, prob in theorem2_problems(seed):
        lam = prob.sigma ** 2 / float(prob.w_star @ prob.w_star)
        d_lam = statistical_dimension(prob.X, lam)
        c = math.ceil(d_lam)
        for s in (c + 1, 2 * c, 4 * c):
            est = monte_carlo_mspe(prob, "hybrid", lam, s, replicates, seed=seed)
            bound = mspe_bound(prob.sigma, d_lam, s)
            checks.append(Check(f"{name}/s={s}", est.mean <= bound + 3 * est.stderr, est.mean,
                                bound + 3 * est.stderr,
                                f"mean {est.mean:.4f} +/- {est.stderr:.4f}, bound {bound:.4f}"))
    return checks


def theorem3_suite(seed=0, replicates=2000, n=80):
    checks = []
    for s in range(0, 7):
        sw = oracle.lower_bound_sweep(2, 6, 1.0, 1.0, 1.0, s)
        checks.append(Check(f"part1/s={s}/min>=bound", sw.min_mspe >= sw.bound - EXACT_TOLERANCE,
                             sw.min_mspe, sw.bound))
        balanced = [v for k, v in sw.values.items() if len(set(sw.counts[k])) == 1]
        if balanced:
            dev = max(abs(v - sw.jensen_bound) for v in balanced)
            checks.append(Check(f"part1/s={s}/balanced=d/(s+d)", dev <= EXACT_TOLERANCE, dev,
                                EXACT_TOLERANCE))
    d = 8
    a, lam, sigma = math.sqrt(2 * d), 1.0 / (2 * d), 1.0
    prob = gen_lower_bound(d, n, a, sigma, seed=seed)
    d_lam = statistical_dimension(prob.X, lam)
    s_iid = math.floor(d_lam * (math.log(d_lam) - 1))
    lev = monte_carlo_mspe(prob, "leverage", lam, s_iid, replicates, seed=seed)
    checks.append(Check(f"part2/leverage/s={s_iid}", lev.mean >= sigma ** 2 - 3 * lev.stderr,
                        lev.mean, sigma ** 2 - 3 * lev.stderr))
    s_vol = 2 * math.ceil(d_lam)
    vol = monte_carlo_mspe(prob, "hybrid", lam, s_vol, replicates, seed=seed)
    bound = mspe_bound(sigma, d_lam, s_vol)
    checks.append(Check(f"part2/volume/s={s_vol}", vol.mean <= bound + 3 * vol.stderr,
                        vol.mean, bound + 3 * vol.stderr))
    return checks


def lemma2_suite(seed=0, total_removals=1000):
    """Cached RegVol weights vs weights recomputed from a fresh inverse."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    lowest = math.inf
    removals = 0
    k = 0
    while removals < total_removals:
        d = int(rng.integers(1, 6))
        n = int(rng.integers(2 * d + 1, 51))
        lam = float(rng.choice([0.0, 0.5, 2.0]))
        s = d if lam == 0 else int(rng.integers(0, d + 1))
        X = rng.standard_normal((d, n))
        cfg = SampleConfig(s, lam, seed=seed * 7919 + k, recompute_interval=0)
        k += 1

        def observe(state, cached):
            nonlocal worst, lowest
            fresh = SampleState(state.X, state.lam, state.active,
                                linalg.spd_inverse(linalg.regularized_gram(state.X[:, state.active],
                                                                           state.lam)))
            expect = np.array([removal_weight(fresh, int(i)) for i in state.active])
            got = np.where(cached <= 1e-12, 0.0, np.minimum(cached, 1.0))
            if got.size:
                worst = max(worst, float(np.max(np.abs(got - expect))))
                lowest = min(lowest, float(cached.min()))

        res = regvol(X, cfg, observer=observe)
        if res.removed_h.size:
            lowest = min(lowest, float(res.removed_h.min()))
        removals += n - s
    return [
        Check("cached=fresh", worst <= WEIGHT_TOLERANCE, worst, WEIGHT_TOLERANCE,
              f"{removals} removals"),
        Check("h>=-1e-9", lowest >= -NEGATIVE_H_TOLERANCE, lowest, -NEGATIVE_H_TOLERANCE),
    ]


SUITES = {
    "distribution": distribution_suite,
    "theorem1": theorem1_suite,
    "theorem2": theorem2_suite,
    "theorem3": theorem3_suite,
    "lemma2": lemma2_suite,
}
