"""Moment-free scale statistics of samples."""
import numpy as np

from .errors import ParameterError, TooFewSamples

MEDIAN_ABS = "median-abs"
RMS = "rms"


def scale_statistic(values, method: str = MEDIAN_ABS) -> float:
    """median|x|, sqrt(mean x^2) or, for method "quantile(q)", the q-quantile of |x|."""
    x = np.asarray(values, float).ravel()
    x = x[np.isfinite(x)]
    if x.size < 20:
        raise TooFewSamples(f"need at least 20 finite values, got {x.size}")
    if method == MEDIAN_ABS:
        return float(np.median(np.abs(x)))
    if method == RMS:
        return float(np.sqrt(np.mean(x * x)))
    if method.startswith("quantile(") and method.endswith(")"):
        q = float(method[9:-1])
        if not 0 < q < 1:
            raise ParameterError("quantile level must lie in (0,1)")
        return float(np.quantile(np.abs(x), q))
    raise ParameterError(f"unknown scale statistic {method!r}")


def default_statistic(alpha: float) -> str:
    return RMS if alpha == 2 else MEDIAN_ABS
