"""Hyper-parameter selection by exhaustive grid search under expanding-window
multivariate RMSE.

For each candidate tuple and each origin ``t`` in the origin set, the model is
fit on rows ``1..t`` only, a deterministic point forecast is issued for
``t + h``, and the m-vector error against the realized value is recorded.  The
candidate score is

    MRMSE = sqrt( (1 / (m * |origins|)) * sum_t ||e_{t+h|t}||^2 )

and the winner is the scorewise minimum with lexicographic tuple tie-break.
Future exogenous values are pinned to the training tail (never read ahead),
matching forecast-time behavior.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BvarxError, ConfigError, DataError, NumericalError
from .forecast import StabilityWarning, point_forecast
from .model import ParamDraw, SzHyper, build_design, build_prior, posterior_update
from .panel import Panel, future_exog

DEFAULT_GRID = {
    "p": (1, 2, 3, 4),
    "lambda0": (0.2, 0.4, 0.6, 0.8),
    "lambda1": (0.05, 0.1, 0.2),
    "lambda3": (1.0, 2.0, 3.0),
    "lambda4": (0.1, 0.5),
    "lambda5": (0.0, 0.5, 1.0),
    "mu5": (0.0, 0.5, 1.0),
    "mu6": (0.0, 0.5, 1.0),
}

#: default number of expanding-window origins scored per candidate
DEFAULT_WINDOW = 24

_DIMS = ("p", "lambda0", "lambda1", "lambda3", "lambda4", "lambda5", "mu5", "mu6")


@dataclass(frozen=True)
class GridSpec:
    """Candidate values per hyper-parameter dimension plus the target horizon."""

    horizon: int
    p: tuple = DEFAULT_GRID["p"]
    lambda0: tuple = DEFAULT_GRID["lambda0"]
    lambda1: tuple = DEFAULT_GRID["lambda1"]
    lambda3: tuple = DEFAULT_GRID["lambda3"]
    lambda4: tuple = DEFAULT_GRID["lambda4"]
    lambda5: tuple = DEFAULT_GRID["lambda5"]
    mu5: tuple = DEFAULT_GRID["mu5"]
    mu6: tuple = DEFAULT_GRID["mu6"]
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        for dim in _DIMS:
            values = tuple(getattr(self, dim))
            if not values:
                raise ConfigError(f"grid dimension {dim!r} is empty")
            object.__setattr__(self, dim, values)

    def candidates(self) -> list:
        """Deduplicated cartesian product as SzHyper objects, in lexicographic
        tuple order (the deterministic evaluation and tie-break order)."""
        seen = set()
        out = []
        for combo in itertools.product(*(getattr(self, d) for d in _DIMS)):
            if combo in seen:
                continue
            seen.add(combo)
            out.append(SzHyper(*combo))
        out.sort(key=lambda h: h.astuple())
        return out


@dataclass(frozen=True)
class TuneResult:
    """Winner plus complete sorted leaderboard."""

    best: SzHyper
    score: float
    leaderboard: tuple = field(repr=False)

    def to_rows(self) -> list:
        """Leaderboard as plain rows: (p, lambda0, ..., mu6, score)."""
        return [hyper.astuple() + (score,) for hyper, score in self.leaderboard]


def mrmse(errors) -> float:
    """Multivariate RMSE over per-origin error vectors: sqrt(mean of squared
    entries across all origins and variables)."""
    arr = np.asarray(list(errors), dtype=np.float64)
    if arr.size == 0:
        raise DataError("no forecast errors to aggregate")
    if arr.ndim == 1:
        arr = arr[:, None]
    n, m = arr.shape
    return float(np.sqrt(np.sum(arr * arr) / (m * n)))


def feasible_origins(panel: Panel, horizon: int, p_max: int,
                     window: int = DEFAULT_WINDOW) -> list:
    """Last ``window`` origins t (training row counts, step 1) for which every
    grid candidate can be fit on rows 1..t and scored against row t+h.

    Fitting a candidate with lag order p needs the AR(p) scale estimates,
    which require T - p > p + 1 rows; the binding constraint is p_max.
    """
    min_train = 2 * p_max + 2
    last = panel.T - horizon
    if last < min_train:
        raise DataError(
            f"panel too short to tune: need at least {min_train + horizon} rows "
            f"for p_max={p_max}, h={horizon}; have {panel.T}"
        )
    first = max(min_train, last - window + 1)
    return list(range(first, last + 1))


def _origin_error(panel: Panel, hyper: SzHyper, horizon: int, t: int) -> np.ndarray:
    train = panel.rows(0, t)
    design = build_design(train, hyper.p)
    prior = build_prior(train, hyper)
    post = posterior_update(prior, design)
    params = ParamDraw.from_b_matrix(post.Bbar, post.sigma_mean, post.layout)
    exog = future_exog(train, horizon) if panel.k else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        path = point_forecast(params, train, exog, horizon)
    return panel.endog[t + horizon - 1] - path[horizon - 1]


def evaluate_candidate(panel: Panel, hyper: SzHyper, horizon: int, origins) -> float:
    """MRMSE of one candidate over the origin set; +inf when any origin fails
    (short sample, degenerate prior scales, non-SPD posterior, ...)."""
    errors = []
    for t in origins:
        try:
            errors.append(_origin_error(panel, hyper, horizon, t))
        except BvarxError:
            return float("inf")
    return mrmse(errors)


def grid_search(panel: Panel, grid: GridSpec, workers: int = 1) -> TuneResult:
    """Exhaustive search over the grid; deterministic regardless of worker
    count (results are reduced in candidate order)."""
    cands = grid.candidates()
    p_max = max(grid.p)
    origins = feasible_origins(panel, grid.horizon, p_max, grid.window)

    def score(h: SzHyper) -> float:
        return evaluate_candidate(panel, h, grid.horizon, origins)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, cands))
    else:
        scores = [score(h) for h in cands]

    order = sorted(range(len(cands)), key=lambda i: (scores[i], cands[i].astuple()))
    leaderboard = tuple((cands[i], scores[i]) for i in order)
    best_hyper, best_score = leaderboard[0]
    if not np.isfinite(best_score):
        raise NumericalError("every grid candidate failed on the origin set")
    return TuneResult(best=best_hyper, score=best_score, leaderboard=leaderboard)
