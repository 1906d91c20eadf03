"""Monte Carlo summaries: means, standard errors, normal confidence intervals and bootstrap slopes"""
import warnings
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import kurtosis, norm, skew

BOOTSTRAP_RESAMPLES = 1000

def sample_mean(x: np.ndarray, axis: int = 0) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.nanmean(np.asarray(x, dtype=float), axis=axis)

def standard_error(x: np.ndarray, axis: int = 0) -> np.ndarray:
    """s / sqrt(n) with ddof = 1 over the finite entries; NaN when fewer than two."""
    x = np.asarray(x, dtype=float)
    n = np.sum(np.isfinite(x), axis=axis)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        s = np.nanstd(x, axis=axis, ddof=1)
    return np.where(n >= 2, s / np.sqrt(np.maximum(n, 1)), np.nan)

def confidence_interval(x: np.ndarray, alpha: float = 0.05, axis: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    mean = sample_mean(x, axis)
    se = standard_error(x, axis)
    z = norm.ppf(1 - alpha / 2)
    return mean - z * se, mean + z * se

def combined_se(*ses: float) -> float:
    return float(np.sqrt(np.sum(np.square(ses))))

class Summary(BaseModel):
    """Mean, standard error and 95% CI of one sample"""
    model_config = ConfigDict(frozen=True)

    n: int
    mean: float
    se: float
    ci_low: float
    ci_high: float
    skewness: Optional[float] = None
    excess_kurtosis: Optional[float] = None

def summarize(x: Sequence[float], shape: bool = False) -> Summary:
    """Summary of the finite entries of x; `shape` adds skewness and excess kurtosis."""
    values = np.asarray(x, dtype=float)
    values = values[np.isfinite(values)]
    n = values.size
    mean = float(np.mean(values)) if n else float("nan")
    se = float(standard_error(values)) if n >= 2 else float("nan")
    z = norm.ppf(0.975)
    extra = {}
    if shape and n >= 3 and np.ptp(values) > 0:
        extra = {"skewness": float(skew(values)), "excess_kurtosis": float(kurtosis(values))}
    return Summary(n=n, mean=mean, se=se, ci_low=mean - z * se, ci_high=mean + z * se, **extra)

def loglog_fit(horizons: Sequence[float], means: Sequence[float]) -> Tuple[float, float]:
    """Least-squares slope and intercept of log(mean) against log(T)."""
    slope, intercept = np.polyfit(np.log(horizons), np.log(means), 1)
    return float(slope), float(intercept)

def bootstrap_slope(
    horizons: Sequence[float],
    samples: Sequence[np.ndarray],
    seed: int = 0,
    n_resamples: int = BOOTSTRAP_RESAMPLES,
    alpha: float = 0.05
) -> Tuple[float, float]:
    """Percentile CI of the log-log slope, resampling trajectories within each horizon."""
    rng = np.random.default_rng(seed)
    log_t = np.log(horizons)
    slopes = np.empty(n_resamples)
    for b in range(n_resamples):
        means = [np.mean(s[rng.integers(0, len(s), len(s))]) for s in samples]
        slopes[b] = np.polyfit(log_t, np.log(means), 1)[0]
    low, high = np.quantile(slopes, [alpha / 2, 1 - alpha / 2])
    return float(low), float(high)
