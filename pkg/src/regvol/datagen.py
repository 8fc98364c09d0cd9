"""Dataset loading and synthetic problem generation.

File formats
------------
CSV: comma-separated, '.' decimal point, optional single header row, one
example per row; the label column defaults to the last one.
LIBSVM: ``<label> <idx>:<val> ...`` with 1-based, strictly increasing indices.
Both are read as UTF-8 with LF or CRLF line endings. Rows/columns in error
messages are 1-based.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityMismatch, DivisibilityError, EmptyDataset, NonMonotoneIndex, ParseError
from .ridge import RegressionProblem


def _parse_float(text, row, col):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a number", row=row, col=col) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", row=row, col=col)
    return v


def load_csv(path, label_col=-1, header=False):
    """Read a CSV file into a :class:`RegressionProblem` (columns = examples)."""
    rows = []
    arity = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not record or all(not f.strip() for f in record):
                continue
            if arity is None:
                arity = len(record)
            elif len(record) != arity:
                raise ArityMismatch(f"expected {arity} fields, found {len(record)}", row=lineno)
            rows.append([_parse_float(f.strip(), lineno, j) for j, f in enumerate(record, start=1)])
    if not rows:
        raise EmptyDataset(f"{path} contains no data rows")
    data = np.array(rows, dtype=np.float64)
    k = data.shape[1]
    lc = label_col % k if -k <= label_col < k else None
    if lc is None:
        raise ValueError(f"label column {label_col} out of range for {k} fields")
    features = np.delete(data, lc, axis=1)
    return RegressionProblem(np.ascontiguousarray(features.T), data[:, lc].copy(), name=str(path))


def write_csv(path, problem):
    """Write features then label per row; ``repr`` floats round-trip exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for j in range(problem.n):
            w.writerow([repr(float(v)) for v in problem.X[:, j]] + [repr(float(problem.y[j]))])


def load_libsvm(path):
    """Read a LIBSVM regression file into a dense problem with ``d = max index``."""
    labels, entries = [], []
    d = 0
    with open(path, encoding="utf-8", newline=None) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            labels.append(_parse_float(parts[0], lineno, 1))
            feats = []
            last = 0
            for col, tok in enumerate(parts[1:], start=2):
                key, sep, val = tok.partition(":")
                if not sep:
                    raise ParseError(f"expected idx:val, got {tok!r}", row=lineno, col=col)
                try:
                    idx = int(key)
                except ValueError:
                    raise ParseError(f"bad feature index {key!r}", row=lineno, col=col) from None
                if idx < 1:
                    raise ParseError("feature indices are 1-based", row=lineno, col=col)
                if idx <= last:
                    raise NonMonotoneIndex(f"index {idx} after {last}", row=lineno, col=col)
                last = idx
                feats.append((idx - 1, _parse_float(val, lineno, col)))
            d = max(d, last)
            entries.append(feats)
    if not labels:
        raise EmptyDataset(f"{path} contains no data rows")
    X = np.zeros((d, len(labels)))
    for j, feats in enumerate(entries):
        for i, v in feats:
            X[i, j] = v
    return RegressionProblem(X, np.array(labels), name=str(path))


def standardize(problem):
    """Center and scale every feature to unit variance (constant features are only centered)."""
    X = problem.X
    mu = X.mean(axis=1, keepdims=True)
    sd = X.std(axis=1, keepdims=True)
    sd[sd == 0] = 1.0
    return RegressionProblem((X - mu) / sd, problem.y, name=problem.name)


def add_intercept(problem):
    """Append a constant-one feature row."""
    X = np.vstack([problem.X, np.ones((1, problem.n))])
    return RegressionProblem(X, problem.y, name=problem.name)


@dataclass
class DatasetSpec:
    """Synthetic dataset parameters.

    ``kind`` is ``"gaussian-spectrum"`` or ``"identity-blocks"``. For the
    Gaussian kind, ``profile`` gives the target eigenvalues of ``X X^T / n``
    (defaults to all ones) and ``w_norm`` the length of ``w*``. For identity
    blocks, ``a`` sets ``w* = a sigma 1`` and ``d`` must divide ``n``.
    """

    kind: str = "gaussian-spectrum"
    d: int = 5
    n: int = 100
    profile: tuple | None = None
    w_norm: float = 1.0
    sigma: float = 1.0
    a: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian-spectrum", "identity-blocks"):
            raise ValueError(f"unknown synthetic kind {self.kind!r}")
        if self.d < 1 or self.n < 1:
            raise ValueError("d and n must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.profile is not None:
            if len(self.profile) != self.d or min(self.profile) <= 0:
                raise ValueError("profile needs d positive entries")
        if self.kind == "identity-blocks" and self.n % self.d:
            raise DivisibilityError(f"n={self.n} is not divisible by d={self.d}")


def gen_gaussian(spec):
    """Gaussian design whose ``X X^T / n`` has roughly the requested spectrum.

    Columns are i.i.d. standard normal, then scaled by ``sqrt(profile)`` along a
    random orthonormal basis. ``w*`` has a random direction and norm
    ``spec.w_norm``; noise is ``N(0, sigma^2)``.
    """
    rng = np.random.default_rng(spec.seed)
    profile = np.ones(spec.d) if spec.profile is None else np.asarray(spec.profile, dtype=np.float64)
    G = rng.standard_normal((spec.d, spec.n))
    Q, R = np.linalg.qr(rng.standard_normal((spec.d, spec.d)))
    Q = Q * np.sign(np.diag(R))
    X = Q @ (np.sqrt(profile)[:, None] * G)
    direction = rng.standard_normal(spec.d)
    w_star = spec.w_norm * direction / np.linalg.norm(direction)
    y = X.T @ w_star + spec.sigma * rng.standard_normal(spec.n)
    return RegressionProblem(X, y, w_star, float(spec.sigma), spec.seed, name="gaussian-spectrum")


def gen_lower_bound(d, n, a, sigma, seed=0):
    """Identity-block design ``X = [I, ..., I]`` with ``w* = a sigma 1``.

    Column ``j`` equals ``e_{j mod d}``.
    """
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive")
    if n % d:
        raise DivisibilityError(f"n={n} is not divisible by d={d}")
    rng = np.random.default_rng(seed)
    X = np.tile(np.eye(d), n // d)
    w_star = np.full(d, a * sigma, dtype=np.float64)
    y = X.T @ w_star + sigma * rng.standard_normal(n)
    return RegressionProblem(X, y, w_star, float(sigma), seed, name="identity-blocks")


def generate(spec):
    if spec.kind == "identity-blocks":
        return gen_lower_bound(spec.d, spec.n, spec.a, spec.sigma, spec.seed)
    return gen_gaussian(spec)


def coordinate_counts(subset, d):
    """Per-coordinate counts ``s_i`` of an identity-block subset."""
    return np.bincount(np.asarray(subset, dtype=np.int64) % d, minlength=d)
