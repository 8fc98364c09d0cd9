"""Ridge estimation on label subsets and the error metrics used to judge it."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidConfig, NotPositiveDefinite, SingularGram
from .sampling import Algorithm, SAMPLERS, SampleConfig, SampleResult, make_rng


@dataclass
class RegressionProblem:
    """Design ``X`` (d x n), labels ``y`` and, for synthetic data, the truth.

    ``w_star``/``sigma`` are ``None`` for real datasets. When they are set,
    ``y = X^T w_star + xi`` with ``xi ~ N(0, sigma^2 I)`` drawn from
    ``noise_seed``.
    """

    X: np.ndarray
    y: np.ndarray
    w_star: np.ndarray | None = None
    sigma: float | None = None
    noise_seed: int | None = None
    name: str = ""

    def __post_init__(self):
        self.X = linalg.as_matrix(self.X, "X")
        self.y = linalg.as_vector(self.y, "y")
        if self.y.shape[0] != self.X.shape[1]:
            raise ValueError(f"y has {self.y.shape[0]} entries but X has {self.X.shape[1]} columns")
        if self.w_star is not None:
            self.w_star = linalg.as_vector(self.w_star, "w_star")
            if self.w_star.shape[0] != self.X.shape[0]:
                raise ValueError("w_star length must equal d")

    @property
    def d(self):
        return self.X.shape[0]

    @property
    def n(self):
        return self.X.shape[1]

    @property
    def has_truth(self):
        return self.w_star is not None and self.sigma is not None


@dataclass
class RidgeFit:
    weights: np.ndarray
    subset: np.ndarray
    lam: float
    rescaled: bool = False


def _draw_scales(subset, rescale_probs):
    """Per-draw column scale ``1/sqrt(s p_i)`` (ones when not rescaling)."""
    s = len(subset)
    if rescale_probs is None:
        return np.ones(s)
    p = np.asarray(rescale_probs, dtype=np.float64)
    if p.shape != (s,):
        raise ValueError("rescale_probs must give one probability per draw")
    if np.any(p <= 0):
        raise ValueError("rescale probabilities must be positive")
    return 1.0 / np.sqrt(s * p)


def _as_subset(subset, n):
    subset = np.asarray(subset, dtype=np.int64).reshape(-1)
    if subset.size and (subset.min() < 0 or subset.max() >= n):
        raise IndexError(f"subset index out of range for n={n}")
    return subset


def ridge_fit(X, y, subset, lam, rescale_probs=None):
    """Ridge estimator ``(X_S X_S^T + lam I)^{-1} X_S y_S`` on a (multi)subset.

    With ``rescale_probs`` each selected column and its label are multiplied by
    ``1/sqrt(s p_i)`` before solving (importance weighting for i.i.d. draws).

    Raises
    ------
    NotPositiveDefinite
        ``lam == 0`` and ``X_S`` does not have full row rank.
    """
    X = linalg.as_matrix(X, "X")
    y = linalg.as_vector(y, "y")
    if lam < 0:
        raise InvalidConfig("lambda must be nonnegative")
    subset = _as_subset(subset, X.shape[1])
    scale = _draw_scales(subset, rescale_probs)
    Xs = X[:, subset] * scale
    ys = y[subset] * scale
    A = linalg.regularized_gram(Xs, lam)
    w = linalg.spd_solve(A, Xs @ ys)
    return RidgeFit(w, subset, float(lam), rescale_probs is not None)


def statistical_dimension(X, lam):
    """``tr(X^T (X X^T + lam I)^{-1} X)``, computed as ``tr((XX^T + lam I)^{-1} XX^T)``.

    Raises
    ------
    SingularGram
        ``lam == 0`` and ``rank(X) < d``.
    """
    X = linalg.as_matrix(X, "X")
    if lam < 0:
        raise InvalidConfig("lambda must be nonnegative")
    G = X @ X.T
    G = (G + G.T) / 2
    try:
        Zinv = linalg.spd_inverse(linalg.regularized_gram(X, lam))
    except NotPositiveDefinite:
        raise SingularGram("X X^T + lam I is singular") from None
    return float(np.sum(Zinv * G))


def statistical_dimension_eig(X, lam):
    """Same quantity via the spectrum: ``sum_i ev_i / (ev_i + lam)``."""
    X = linalg.as_matrix(X, "X")
    ev = np.maximum(linalg.sym_eigenvalues(linalg.regularized_gram(X, 0.0)), 0.0)
    if lam == 0:
        if ev.size and ev[-1] <= linalg.PIVOT_RTOL * max(ev[0], 1.0):
            raise SingularGram("X X^T is singular")
        return float(ev.size)
    return math.fsum(ev / (ev + lam))


def total_loss(X, y, fit):
    """Mean squared residual over the full dataset, ``||X^T w - y||^2 / n``."""
    X = linalg.as_matrix(X, "X")
    w = fit.weights if isinstance(fit, RidgeFit) else np.asarray(fit, dtype=np.float64)
    r = X.T @ w - y
    return float(r @ r) / X.shape[1]


def _fixed_subset_moments(problem, subset, lam, rescale_probs):
    """Regularized inverse, variance sandwich core and bias for a fixed S.

    Draw ``k`` of column ``i`` with scale ``c_k`` contributes ``c_k^2 x_i x_i^T``
    to the Gram matrix. Repeated draws of the same column see the same label,
    so the noise covariance aggregates per distinct column:
    ``Var[X_S C^2 xi_S] = sigma^2 sum_i u_i^2 x_i x_i^T`` with ``u_i = sum c_k^2``.
    """
    if not problem.has_truth:
        raise InvalidConfig("analytic errors need w_star and sigma")
    X = problem.X
    subset = _as_subset(subset, problem.n)
    scale = _draw_scales(subset, rescale_probs)
    u = np.bincount(subset, weights=scale ** 2, minlength=problem.n)
    G = (X * u) @ X.T
    V = (X * u ** 2) @ X.T
    G = (G + G.T) / 2
    A = G.copy()
    A.flat[:: A.shape[0] + 1] += lam
    Zinv = linalg.spd_inverse(A)
    cov = problem.sigma ** 2 * (Zinv @ V @ Zinv)
    bias = -lam * (Zinv @ problem.w_star)
    return cov, bias


def mspe(problem, subset, lam, rescale_probs=None):
    """Exact noise-averaged prediction error ``E_xi ||X^T (w_S - w*)||^2 / n``."""
    cov, bias = _fixed_subset_moments(problem, subset, lam, rescale_probs)
    X = problem.X
    variance = float(np.sum(cov * (X @ X.T)))
    pb = X.T @ bias
    return max(0.0, (variance + float(pb @ pb)) / problem.n)


def mse(problem, subset, lam, rescale_probs=None):
    """Exact noise-averaged estimation error ``E_xi ||w_S - w*||^2``."""
    cov, bias = _fixed_subset_moments(problem, subset, lam, rescale_probs)
    return max(0.0, float(np.trace(cov)) + float(bias @ bias))


@dataclass
class MonteCarloEstimate:
    mean: float
    stderr: float
    values: np.ndarray


def summarize(values):
    """Mean and standard error with order-independent (exact) summation."""
    values = np.asarray(values, dtype=np.float64)
    r = values.size
    if r == 0:
        raise ValueError("no values to summarize")
    mean = math.fsum(values) / r
    if r == 1:
        return MonteCarloEstimate(mean, 0.0, values)
    var = math.fsum((values - mean) ** 2) / (r - 1)
    return MonteCarloEstimate(mean, math.sqrt(var / r), values)


def monte_carlo_mspe(problem, sampler, lam, size, replicates, seed=0, rescale=False,
                     metric="mspe", jobs=1):
    """Average the exact fixed-S error over freshly sampled subsets.

    The noise expectation is analytic; only the subset is random.

    Parameters
    ----------
    problem : RegressionProblem
        Must carry ``w_star`` and ``sigma``.
    sampler : Algorithm, str or callable
        Either an algorithm name or ``f(X, cfg, rng) -> SampleResult``.
    lam : float
        Used both for sampling and for the ridge estimator.
    rescale : bool
        Apply importance weights from ``SampleResult.probabilities``.
    metric : {"mspe", "mse"}
    jobs : int
        Worker threads; replicate ``r`` always uses stream ``r`` so the result
        does not depend on scheduling.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    error = {"mspe": mspe, "mse": mse}[metric]
    if callable(sampler):
        fn, stream = sampler, Algorithm.HYBRID
    else:
        stream = Algorithm(sampler)
        fn = SAMPLERS[stream]
    cfg = SampleConfig(size, lam, seed, stream)

    def one(r):
        res = fn(problem.X, cfg, make_rng(seed, stream, replicate=r))
        if not isinstance(res, SampleResult):
            res = SampleResult(np.asarray(res), stream)
        probs = res.probabilities if rescale else None
        return error(problem, res.subset, lam, probs)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            values = list(pool.map(one, range(replicates)))
    else:
        values = [one(r) for r in range(replicates)]
    return summarize(values)


def lambda_grid(sigma2_hat=1.0, per_decade=10, lo=1e-4, hi=1e2):
    """Log-spaced candidate regularizers spanning ``[lo, hi] * sigma2_hat``."""
    decades = math.log10(hi) - math.log10(lo)
    num = int(round(decades * per_decade)) + 1
    return np.logspace(math.log10(lo * sigma2_hat), math.log10(hi * sigma2_hat), num)
