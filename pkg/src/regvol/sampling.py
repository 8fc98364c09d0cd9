"""Lambda-regularized volume sampling and leverage score sampling.

All samplers take a ``d x n`` design matrix (columns are examples) and a
:class:`SampleConfig`. Volume samplers start from the full index set and
remove one column at a time; column ``i`` leaves the current set ``S`` with
probability proportional to

    h_i(S) = det(X_{S-i} X_{S-i}^T + lam I) / det(X_S X_S^T + lam I)
           = 1 - x_i^T (X_S X_S^T + lam I)^{-1} x_i.

Indices are 0-based throughout the library.

Randomness
----------
Every run draws from a ``numpy.random.Generator`` (PCG64). When no generator is
passed in, one is derived from ``SeedSequence([seed, stream, replicate + 1])``
where ``stream`` is a fixed per-algorithm code (see ``STREAMS``). The entropy
list has fixed length so distinct (seed, stream, replicate) triples never
collide, and a regvol run and a fastregvol run with the same seed are
independent yet individually reproducible.
"""

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InvalidConfig, NotPositiveDefinite, SingularGram, TrialBudgetExceeded

# Weights at or below this are treated as exactly zero (never removable).
ZERO_WEIGHT = 1e-12
DEFAULT_RECOMPUTE = 128
DEFAULT_TRIAL_FACTOR = 100


class Algorithm(str, enum.Enum):
    REGVOL = "regvol"
    FASTREGVOL = "fastregvol"
    HYBRID = "hybrid"
    LEVERAGE = "leverage"


STREAMS = {
    Algorithm.REGVOL: 1,
    Algorithm.FASTREGVOL: 2,
    Algorithm.HYBRID: 3,
    Algorithm.LEVERAGE: 4,
}


def make_rng(seed, algorithm=Algorithm.HYBRID, replicate=None):
    """Seeded generator for one run; see the module docstring for the rule."""
    stream = STREAMS[Algorithm(algorithm)]
    rep = 0 if replicate is None else int(replicate) + 1
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream, rep])))


@dataclass(frozen=True)
class SampleConfig:
    """Parameters of a single sampling run.

    ``recompute_interval`` is the number of removals between fresh inverses of
    ``X_S X_S^T + lam I``; ``None`` picks ``max(128, n // 10)`` so the number of
    refreshes stays bounded on large inputs, and ``0`` disables refreshing.
    ``max_trials`` caps the rejection proposals of fastregvol (default ``100 n``).
    """

    size: int
    lam: float = 0.0
    seed: int = 0
    algorithm: Algorithm = Algorithm.HYBRID
    recompute_interval: int | None = None
    max_trials: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.size < 0:
            raise InvalidConfig(f"target size must be nonnegative, got {self.size}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidConfig(f"lambda must be a finite nonnegative number, got {self.lam}")
        if self.recompute_interval is not None and self.recompute_interval < 0:
            raise InvalidConfig("recompute_interval must be nonnegative")

    def interval_for(self, n):
        if self.recompute_interval is None:
            return max(DEFAULT_RECOMPUTE, n // 10)
        return self.recompute_interval

    def check(self, d, n):
        if self.size > n:
            raise InvalidConfig(f"target size {self.size} exceeds n={n}")
        if (self.algorithm is not Algorithm.LEVERAGE and self.lam == 0
                and self.size < d and self.size < n):
            raise InvalidConfig(
                f"lambda=0 requires size >= d (size={self.size}, d={d}); "
                "all smaller Gram matrices are singular")


@dataclass
class SampleState:
    """The evolving index set with its cached regularized inverse."""

    X: np.ndarray
    lam: float
    active: np.ndarray
    Z: np.ndarray
    removal_trace: list = field(default_factory=list)

    @classmethod
    def initial(cls, X, lam):
        X = linalg.as_matrix(X, "X")
        return cls(X, float(lam), np.arange(X.shape[1]), _initial_inverse(X, lam))


@dataclass
class SampleResult:
    subset: np.ndarray
    algorithm: Algorithm
    probabilities: np.ndarray | None = None  # per-draw leverage probabilities
    trials: int = 0
    wall_time: float = 0.0
    # removal order and each removed column's unclamped weight h at removal
    removed: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    removed_h: np.ndarray = field(default_factory=lambda: np.empty(0))


def _initial_inverse(X, lam):
    try:
        return linalg.spd_inverse(linalg.regularized_gram(X, lam))
    except NotPositiveDefinite:
        raise SingularGram("X X^T + lam I is singular; rank(X) < d with lambda=0") from None


def _raw_weights(Xt, Z):
    return 1.0 - np.sum((Xt @ Z) * Xt, axis=1)


def removal_weight(state, i):
    """``1 - x_i^T Z x_i`` for ``i`` in the active set, clamped to ``[0, 1]``.

    Values at or below ``ZERO_WEIGHT`` are returned as exactly zero.
    """
    if not np.any(state.active == i):
        raise ValueError(f"index {i} is not in the active set")
    h = 1.0 - linalg.quad_form(state.Z, state.X[:, i])
    return 0.0 if h <= ZERO_WEIGHT else min(h, 1.0)


def _prepare(X, cfg, rng, default_algorithm):
    X = linalg.as_matrix(X, "X")
    d, n = X.shape
    cfg.check(d, n)
    if rng is None:
        rng = make_rng(cfg.seed, default_algorithm)
    return X, d, n, rng


def regvol(X, cfg, rng=None, observer=None):
    """Sequential removal with all weights kept up to date (RegVol).

    Each step draws the removed column by one uniform draw over the cumulative
    weights, then updates every remaining weight with
    ``h_j -= (x_j^T Z x_i)^2 / h_i`` and ``Z += v v^T`` with ``v = Z x_i / sqrt(h_i)``.
    Cost is O(n^2 d + n d^2).

    Parameters
    ----------
    X : array, shape (d, n)
    cfg : SampleConfig
    rng : numpy.random.Generator, optional
        Overrides the generator derived from ``cfg.seed``.
    observer : callable, optional
        Called as ``observer(state, weights)`` after every removal, where
        ``weights`` are the cached (unclamped) weights aligned with
        ``state.active``.

    Raises
    ------
    InvalidConfig
        ``lam == 0`` and ``size < d``.
    SingularGram
        ``lam == 0`` and the Gram matrix of X, or of every admissible
        remaining subset, is singular.
    """
    start = time.perf_counter()
    X, d, n, rng = _prepare(X, cfg, rng, Algorithm.REGVOL)
    s, lam = cfg.size, float(cfg.lam)
    if n == s:
        return SampleResult(np.arange(n), Algorithm.REGVOL, wall_time=time.perf_counter() - start)

    Xt = np.array(X.T, order="C")
    idx = np.arange(n)
    Z = _initial_inverse(X, lam)
    h = _raw_weights(Xt, Z)
    interval = cfg.interval_for(n)
    uniforms = rng.random(n - s).tolist()
    removed = np.empty(n - s, dtype=np.int64)
    removed_h = np.empty(n - s)
    w = np.empty(n)
    m = n
    removals = 0
    while m > s:
        wm = w[:m]
        np.minimum(h[:m], 1.0, out=wm)
        wm[wm <= ZERO_WEIGHT] = 0.0
        cum = np.cumsum(wm)
        total = cum[-1]
        if total <= 0.0:
            raise SingularGram(
                f"all removal weights vanished at |S|={m} > size={s}; rank(X_S) is too small")
        p = int(np.searchsorted(cum, uniforms[removals] * total, side="right"))
        if p >= m or wm[p] == 0.0:
            # round-off: fall back to the last positive weight at or before p
            p = int(np.flatnonzero(wm[: min(p, m - 1) + 1])[-1])
        hi = float(wm[p])
        xi = Xt[p].copy()
        removed[removals] = idx[p]
        removed_h[removals] = h[p]

        # swap-remove: the last active row takes the removed row's slot
        m -= 1
        Xt[p] = Xt[m]
        idx[p] = idx[m]
        h[p] = h[m]
        v = (Z @ xi) / math.sqrt(hi)
        h[:m] -= (Xt[:m] @ v) ** 2
        Z = linalg.rank_one_update(Z, v, 1.0)
        removals += 1

        if interval and removals % interval == 0 and m > s:
            Z = _refresh(Xt[:m], lam)
            h[:m] = _raw_weights(Xt[:m], Z)
        if observer is not None:
            trace = list(zip(removed[:removals].tolist(), removed_h[:removals].tolist()))
            observer(SampleState(X, lam, idx[:m].copy(), Z.copy(), trace), h[:m].copy())

    return SampleResult(np.sort(idx[:s]), Algorithm.REGVOL, trials=0,
                        wall_time=time.perf_counter() - start,
                        removed=removed, removed_h=removed_h)


def _refresh(Xt_active, lam):
    G = Xt_active.T @ Xt_active
    G[np.diag_indices_from(G)] += lam
    try:
        return linalg.spd_inverse((G + G.T) / 2)
    except NotPositiveDefinite:
        raise SingularGram("Gram matrix of the active set became singular") from None


def fastregvol(X, cfg, rng=None):
    """Volume sampling by local rejection sampling (FastRegVol).

    Each removal proposes a uniform index from the active set, computes its
    weight ``h_i`` and accepts with probability ``h_i``. Only the proposed
    weights are ever evaluated, so a run costs O((n + d) d^2) in expectation.
    The output has exactly the same law as :func:`regvol`.

    With ``lam == 0`` the acceptance rate is only bounded away from zero while
    ``|S| >= 2d``; smaller targets must go through :func:`hybrid`.

    Raises
    ------
    InvalidConfig
        ``lam == 0`` and ``size < 2d`` while removals are needed.
    TrialBudgetExceeded
        More than ``cfg.max_trials`` proposals (default ``100 n``).
    """
    start = time.perf_counter()
    X, d, n, rng = _prepare(X, cfg, rng, Algorithm.FASTREGVOL)
    s, lam = cfg.size, float(cfg.lam)
    if n == s:
        return SampleResult(np.arange(n), Algorithm.FASTREGVOL, wall_time=time.perf_counter() - start)
    if lam == 0 and s < 2 * d:
        raise InvalidConfig(
            f"fastregvol with lambda=0 needs size >= 2d (size={s}, d={d}); use hybrid")
    idx, trials, removed, removed_h = _fast_stage(X, s, lam, cfg, rng)
    return SampleResult(np.sort(idx), Algorithm.FASTREGVOL, trials=trials,
                        wall_time=time.perf_counter() - start,
                        removed=removed, removed_h=removed_h)


def _fast_stage(X, s, lam, cfg, rng):
    d, n = X.shape
    Xt = np.array(X.T, order="C")
    idx = np.arange(n)
    Z = _initial_inverse(X, lam)
    cap = cfg.max_trials if cfg.max_trials is not None else DEFAULT_TRIAL_FACTOR * n
    interval = cfg.interval_for(n)
    chunk = 2 * (n - s) + 16
    buf = rng.random(2 * chunk).tolist()
    pos = 0
    trials = 0
    removals = 0
    removed = np.empty(n - s, dtype=np.int64)
    removed_h = np.empty(n - s)
    m = n
    while m > s:
        while True:
            trials += 1
            if trials > cap:
                raise TrialBudgetExceeded(
                    f"{trials - 1} rejection trials exceeded the cap of {cap} at |S|={m}")
            if pos >= len(buf):
                buf = rng.random(2 * chunk).tolist()
                pos = 0
            p = int(buf[pos] * m)
            coin = buf[pos + 1]
            pos += 2
            x = Xt[p]
            Zx = Z @ x
            h = 1.0 - float(x @ Zx)
            if h > ZERO_WEIGHT and coin < h:
                break
        removed[removals] = idx[p]
        removed_h[removals] = h
        h = min(h, 1.0)
        m -= 1
        Xt[p] = Xt[m]
        idx[p] = idx[m]
        Z = linalg.rank_one_update(Z, Zx, 1.0 / h)
        removals += 1
        if interval and removals % interval == 0 and m > s:
            Z = _refresh(Xt[:m], lam)
    return idx[:s].copy(), trials, removed, removed_h


def hybrid(X, cfg, rng=None):
    """FastRegVol down to ``max(size, 2d)`` columns, then RegVol down to ``size``.

    The second stage runs on the surviving columns only; its indices are mapped
    back to the original numbering.
    """
    start = time.perf_counter()
    X, d, n, rng = _prepare(X, cfg, rng, Algorithm.HYBRID)
    s, lam = cfg.size, float(cfg.lam)
    mid = max(s, 2 * d)
    idx = np.arange(n)
    trials = 0
    removed = np.empty(0, dtype=np.int64)
    removed_h = np.empty(0)
    if n > mid:
        idx, trials, removed, removed_h = _fast_stage(X, mid, lam, cfg, rng)
        idx = np.sort(idx)
    if len(idx) > s:
        sub = regvol(X[:, idx], SampleConfig(s, lam, cfg.seed, Algorithm.REGVOL,
                                             cfg.recompute_interval), rng=rng)
        removed = np.concatenate([removed, idx[sub.removed]])
        removed_h = np.concatenate([removed_h, sub.removed_h])
        idx = idx[sub.subset]
    return SampleResult(np.sort(idx), Algorithm.HYBRID, trials=trials,
                        wall_time=time.perf_counter() - start,
                        removed=removed, removed_h=removed_h)


def leverage_scores(X):
    """Leverage score distribution ``x_i^T (X X^T)^{-1} x_i / d``.

    Raises
    ------
    SingularGram
        If ``X X^T`` is singular.
    """
    X = linalg.as_matrix(X, "X")
    d = X.shape[0]
    try:
        G_inv = linalg.spd_inverse(X @ X.T)
    except NotPositiveDefinite:
        raise SingularGram("X X^T is singular; leverage scores are undefined") from None
    scores = np.einsum("ji,jk,ki->i", X, G_inv, X, optimize=False) / d
    return np.maximum(scores, 0.0)


def leverage_sample(X, cfg, rng=None):
    """Draw ``cfg.size`` indices i.i.d. with replacement from the leverage scores.

    The result keeps draw order and carries each draw's probability in
    ``probabilities`` so the caller can rescale columns by ``1/sqrt(s p_i)``.
    """
    start = time.perf_counter()
    X = linalg.as_matrix(X, "X")
    if cfg.size < 0:
        raise InvalidConfig("size must be nonnegative")
    if rng is None:
        rng = make_rng(cfg.seed, Algorithm.LEVERAGE)
    p = leverage_scores(X)
    draws = rng.choice(p.size, size=cfg.size, replace=True, p=p / p.sum())
    return SampleResult(draws.astype(np.int64), Algorithm.LEVERAGE, probabilities=p[draws],
                        wall_time=time.perf_counter() - start)


SAMPLERS = {
    Algorithm.REGVOL: regvol,
    Algorithm.FASTREGVOL: fastregvol,
    Algorithm.HYBRID: hybrid,
    Algorithm.LEVERAGE: leverage_sample,
}


def sample(X, cfg, rng=None):
    """Dispatch on ``cfg.algorithm``."""
    return SAMPLERS[cfg.algorithm](X, cfg, rng=rng)
