"""Regularized volume sampling for subsampled ridge regression."""

__version__ = "0.1.0"

from .errors import RegVolError  # noqa: E402
from .ridge import (  # noqa: E402
    RegressionProblem,
    monte_carlo_mspe,
    mse,
    mspe,
    ridge_fit,
    statistical_dimension,
)
from .sampling import (  # noqa: E402
    Algorithm,
    SampleConfig,
    SampleResult,
    fastregvol,
    hybrid,
    leverage_sample,
    leverage_scores,
    regvol,
    sample,
)

__all__ = [
    "Algorithm", "RegVolError", "RegressionProblem", "SampleConfig", "SampleResult",
    "fastregvol", "hybrid", "leverage_sample", "leverage_scores", "monte_carlo_mspe", "mse",
    "mspe", "regvol", "ridge_fit", "sample", "statistical_dimension",
]
