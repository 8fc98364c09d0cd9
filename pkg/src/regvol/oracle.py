"""Exhaustive ground truth for small instances.

Everything here is computed by enumeration with determinants evaluated
directly, so it shares no update formulas with the samplers it checks.
Subsets are keyed by sorted tuples of 0-based indices.
"""

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import linalg
from .datagen import gen_lower_bound
from .errors import InstanceTooLarge, InvalidConfig, SingularGram
from .ridge import mspe, statistical_dimension
from .sampling import ZERO_WEIGHT, SampleConfig, make_rng

MAX_N = 22


@dataclass
class DistributionTable:
    """Probability of every size-``s`` subset of ``{0..n-1}``."""

    X: np.ndarray
    lam: float
    s: int
    probs: dict
    # smallest value of sum_i h_i(S) - (|S| - d_lam) seen in the removal chain
    min_normalizer_slack: float | None = None
    meta: dict = field(default_factory=dict)

    def keys(self):
        return sorted(self.probs)

    def total(self):
        return math.fsum(self.probs.values())

    def vector(self, keys=None):
        keys = self.keys() if keys is None else keys
        return np.array([self.probs.get(k, 0.0) for k in keys])

    def tv_distance(self, other):
        keys = sorted(set(self.probs) | set(other.probs))
        return 0.5 * float(np.abs(self.vector(keys) - other.vector(keys)).sum())

    def expectation(self, fn):
        """``sum_S P(S) fn(S)`` over the support."""
        terms = [p * np.asarray(fn(np.array(k, dtype=np.int64)), dtype=np.float64)
                 for k, p in sorted(self.probs.items()) if p > 0]
        return sum(terms[1:], terms[0])


def _guard(n):
    if n > MAX_N:
        raise InstanceTooLarge(f"n={n} exceeds the enumeration guard of {MAX_N}")


def _det(X, cols, lam):
    d = X.shape[0]
    if lam == 0 and len(cols) < d:
        return 0.0
    Xs = X[:, list(cols)]
    G = Xs @ Xs.T
    G[np.diag_indices(d)] += lam
    sign, logdet = np.linalg.slogdet(G)
    return float(np.exp(logdet)) if sign > 0 else 0.0


def exact_chain_distribution(X, lam, s):
    """Exact law of the final set of the regularized removal chain.

    Dynamic program over all subsets from size ``n`` down to ``s``: the mass of
    each set is split among its children ``S - i`` in proportion to
    ``det(Z_{S-i}) / det(Z_S)``, with ``Z_S = X_S X_S^T + lam I``. Each level is
    renormalized to sum to one.

    Raises
    ------
    InstanceTooLarge
        ``n > 22``.
    InvalidConfig
        ``lam == 0`` and ``s < d``.
    SingularGram
        ``lam == 0`` and some reachable set has all weights zero.
    """
    X = linalg.as_matrix(X, "X")
    d, n = X.shape
    _guard(n)
    if not 0 <= s <= n:
        raise InvalidConfig(f"size {s} out of range for n={n}")
    if lam == 0 and s < d and s < n:
        raise InvalidConfig("lambda=0 requires s >= d")
    d_lam = statistical_dimension(X, lam) if (lam > 0 or n >= d) else float(d)

    level = {tuple(range(n)): 1.0}
    dets = {}

    def det_of(cols):
        if cols not in dets:
            dets[cols] = _det(X, cols, lam)
        return dets[cols]

    min_slack = math.inf
    for size in range(n, s, -1):
        nxt = {}
        for S, mass in sorted(level.items()):
            if mass == 0.0:
                continue
            base = det_of(S)
            if base <= 0.0:
                raise SingularGram(f"singular Gram matrix for reachable set {S}")
            children = [S[:k] + S[k + 1:] for k in range(size)]
            h = [det_of(c) / base for c in children]
            h = [0.0 if v <= ZERO_WEIGHT else v for v in h]
            total = math.fsum(h)
            if total <= 0.0:
                raise SingularGram(f"all removal weights vanish at {S}")
            min_slack = min(min_slack, total - (size - d_lam))
            for c, w in zip(children, h):
                if w > 0.0:
                    nxt[c] = nxt.get(c, 0.0) + mass * w / total
        z = math.fsum(nxt.values())
        level = {k: v / z for k, v in nxt.items()}
        # only the previous level's determinants are needed again
        dets = {k: v for k, v in dets.items() if len(k) < size}

    probs = {c: 0.0 for c in itertools.combinations(range(n), s)}
    probs.update(level)
    return DistributionTable(X, float(lam), s, probs,
                             None if min_slack is math.inf else min_slack,
                             {"d_lambda": d_lam})


def volume_marginals(X, s):
    """``P(S) = det(X_S X_S^T) / sum_T det(X_T X_T^T)`` over all ``|T| = s``."""
    X = linalg.as_matrix(X, "X")
    d, n = X.shape
    _guard(n)
    if s < d:
        raise InvalidConfig("volume sampling needs s >= d")
    keys = list(itertools.combinations(range(n), s))
    dets = np.array([_det(X, k, 0.0) for k in keys])
    z = math.fsum(dets)
    if z <= 0.0:
        raise SingularGram("every size-s Gram matrix is singular")
    return DistributionTable(X, 0.0, s, {k: v / z for k, v in zip(keys, dets)})


def empirical_distribution(sampler, X, lam, s, runs, seed=0):
    """Subset frequencies over ``runs`` executions of ``sampler``.

    ``sampler(X, cfg, rng=...)`` follows the signature of the functions in
    :mod:`regvol.sampling`. One generator seeded from ``seed`` drives all runs.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    cfg = SampleConfig(s, lam, seed)
    rng = make_rng(seed, cfg.algorithm)
    counts = Counter()
    for _ in range(runs):
        counts[tuple(sorted(sampler(X, cfg, rng=rng).subset.tolist()))] += 1
    return DistributionTable(linalg.as_matrix(X), float(lam), s,
                             {k: c / runs for k, c in counts.items()},
                             meta={"runs": runs, "counts": dict(counts)})


def chi_square_homogeneity(a, b):
    """p-value that two empirical tables come from the same distribution."""
    keys = sorted(set(a.meta["counts"]) | set(b.meta["counts"]))
    table = np.array([[a.meta["counts"].get(k, 0) for k in keys],
                      [b.meta["counts"].get(k, 0) for k in keys]])
    if table.shape[1] < 2:
        return 1.0
    return float(stats.chi2_contingency(table, correction=False).pvalue)


def expected_inverse(table):
    """``E_S (X_S X_S^T + lam I)^{-1}`` under ``table``."""
    X, lam = table.X, table.lam
    return table.expectation(lambda S: linalg.spd_inverse(linalg.regularized_gram(X[:, S], lam)))


def inverse_expectation_gap(X, lam, s):
    """Smallest eigenvalue of ``c (XX^T + lam I)^{-1} - E_S (X_S X_S^T + lam I)^{-1}``.

    ``c = (n - d_lam + 1) / (s - d_lam + 1)``; the expectation is exact over
    the removal-chain distribution. Nonnegative when the PSD bound holds.
    """
    X = linalg.as_matrix(X, "X")
    n = X.shape[1]
    table = exact_chain_distribution(X, lam, s)
    d_lam = statistical_dimension(X, lam)
    c = (n - d_lam + 1) / (s - d_lam + 1)
    gap = c * linalg.spd_inverse(linalg.regularized_gram(X, lam)) - expected_inverse(table)
    return float(linalg.sym_eigenvalues((gap + gap.T) / 2)[-1])


@dataclass
class LowerBoundSweep:
    min_mspe: float
    bound: float            # sigma^2 d_lam / (s + d_lam)
    jensen_bound: float     # sigma^2 d / (s + d), attained by balanced subsets
    d_lambda: float
    values: dict            # subset -> analytic MSPE
    counts: dict            # subset -> per-coordinate counts s_i

    @property
    def argmin(self):
        return [k for k, v in self.values.items() if v == self.min_mspe]


def lower_bound_sweep(d, n, a, sigma, lam, s, max_subsets=200_000):
    """Analytic MSPE of every size-``s`` subset of the identity-block design.

    The design is ``X = [I, ..., I]`` (d x n) with ``w* = a sigma 1``.
    """
    prob = gen_lower_bound(d, n, a, sigma, seed=0)
    if math.comb(n, s) > max_subsets:
        raise InstanceTooLarge(f"C({n},{s}) subsets exceed the sweep limit")
    d_lam = statistical_dimension(prob.X, lam) if lam > 0 else float(d)
    values, counts = {}, {}
    for S in itertools.combinations(range(n), s):
        values[S] = mspe(prob, np.array(S, dtype=np.int64), lam)
        counts[S] = tuple(np.bincount(np.array(S, dtype=np.int64) % d, minlength=d).tolist())
    lowest = min(values.values())
    bound = sigma ** 2 * d_lam / (s + d_lam)
    jensen = sigma ** 2 * d / (s + d)
    return LowerBoundSweep(lowest, bound, jensen, d_lam, values, counts)


def identity_block_mspe(counts, a, sigma, lam):
    """Closed form ``(sigma^2/d) sum_i (s_i + a^2 lam^2) / (s_i + lam)^2``."""
    counts = np.asarray(counts, dtype=np.float64)
    d = counts.size
    return sigma ** 2 / d * math.fsum((counts + a ** 2 * lam ** 2) / (counts + lam) ** 2)
