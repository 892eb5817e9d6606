"""Point-forecast accuracy metrics over an h-step path.

Five classics: RMSE, SMAPE, MASE, Theil's U1 and MDAPE, each computed per
variable over the forecast path.  Division-by-zero terms are dropped (MDAPE)
or defined as zero (SMAPE) with counted :class:`MetricWarning` warnings
instead of poisoning the aggregate — macro series do contain exact zeros.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ConfigError, DataError


class MetricWarning(UserWarning):
    """A metric skipped or zeroed division-by-zero terms."""


def _paired(actual, forecast):
    a = np.asarray(actual, dtype=np.float64).ravel()
    f = np.asarray(forecast, dtype=np.float64).ravel()
    if a.size != f.size:
        raise DataError(f"length mismatch: {a.size} actuals vs {f.size} forecasts")
    if a.size == 0:
        raise DataError("empty input")
    return a, f


def rmse(actual, forecast) -> float:
    """Root mean squared error."""
    a, f = _paired(actual, forecast)
    return float(np.sqrt(np.mean((a - f) ** 2)))


def smape(actual, forecast, mode: str = "fraction") -> float:
    """Symmetric MAPE: mean of |f - a| / ((|f| + |a|) / 2).

    ``fraction`` mode lies in [0, 2]; ``percent`` multiplies by 100.  A time
    point with |f| + |a| = 0 contributes 0 with a warning.
    """
    if mode not in ("fraction", "percent"):
        raise ConfigError(f"mode must be 'fraction' or 'percent', got {mode!r}")
    a, f = _paired(actual, forecast)
    denom = (np.abs(a) + np.abs(f)) / 2.0
    zero = denom == 0.0
    if zero.any():
        warnings.warn(
            f"smape: {int(zero.sum())} both-zero term(s) defined as 0",
            MetricWarning,
            stacklevel=2,
        )
    terms = np.where(zero, 0.0, np.abs(f - a) / np.where(zero, 1.0, denom))
    value = float(np.mean(terms))
    return value * 100.0 if mode == "percent" else value


def mase(actual, forecast, insample, seasonal_period: int = 1) -> float:
    """Mean absolute scaled error against the in-sample seasonal-naive benchmark.

    Denominator: (h / (D - S)) * sum_{t=S+1..D} |y_t - y_{t-S}| over the
    in-sample series of length D with seasonal period S.
    """
    a, f = _paired(actual, forecast)
    x = np.asarray(insample, dtype=np.float64).ravel()
    S = int(seasonal_period)
    if S < 1:
        raise ConfigError("seasonal_period must be >= 1")
    D = x.size
    if D <= S:
        raise DataError(f"in-sample length D={D} must exceed the period S={S}")
    scale = np.sum(np.abs(x[S:] - x[:-S])) / (D - S)
    if scale == 0.0:
        raise DataError("in-sample seasonal-naive benchmark is perfect; MASE undefined")
    return float(np.sum(np.abs(f - a)) / (a.size * scale))


def theil_u1(actual, forecast) -> float:
    """Theil's U1: RMSE / (rms(actual) + rms(forecast)), in [0, 1]."""
    a, f = _paired(actual, forecast)
    denom = np.sqrt(np.mean(a * a)) + np.sqrt(np.mean(f * f))
    if denom == 0.0:
        raise DataError("both series identically zero; U1 undefined")
    return float(np.sqrt(np.mean((a - f) ** 2)) / denom)


def mdape(actual, forecast) -> float:
    """Median absolute percentage error (in percent).

    Horizons with a zero actual are excluded with a warning.
    """
    a, f = _paired(actual, forecast)
    nonzero = a != 0.0
    if not nonzero.any():
        raise DataError("every actual is zero; MDAPE undefined")
    dropped = int((~nonzero).sum())
    if dropped:
        warnings.warn(
            f"mdape: {dropped} zero-actual term(s) excluded",
            MetricWarning,
            stacklevel=2,
        )
    ape = np.abs((a[nonzero] - f[nonzero]) / a[nonzero])
    return float(np.median(ape) * 100.0)


METRIC_NAMES = ("rmse", "smape", "mase", "theil_u1", "mdape")


def metric_table(actual: np.ndarray, forecasts: dict, insample: np.ndarray,
                 var_names, seasonal_period: int = 1,
                 smape_mode: str = "fraction") -> list:
    """All five metrics for every (model, variable) pair.

    ``actual`` is (H, m); ``forecasts`` maps model name -> (H, m) path;
    ``insample`` is (D, m) training data for the MASE denominators.  Returns
    rows of dicts: model, variable, rmse, smape, mase, theil_u1, mdape.
    """
    actual = np.asarray(actual, dtype=np.float64)
    insample = np.asarray(insample, dtype=np.float64)
    rows = []
    for model in forecasts:
        path = np.asarray(forecasts[model], dtype=np.float64)
        if path.shape != actual.shape:
            raise DataError(
                f"forecast for {model!r} has shape {path.shape}, "
                f"actuals have {actual.shape}"
            )
        for j, name in enumerate(var_names):
            rows.append({
                "model": model,
                "variable": name,
                "rmse": rmse(actual[:, j], path[:, j]),
                "smape": smape(actual[:, j], path[:, j], mode=smape_mode),
                "mase": mase(actual[:, j], path[:, j], insample[:, j],
                             seasonal_period=seasonal_period),
                "theil_u1": theil_u1(actual[:, j], path[:, j]),
                "mdape": mdape(actual[:, j], path[:, j]),
            })
    return rows
