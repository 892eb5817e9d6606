"""Forecasting: deterministic recursions, shock simulation, snap-centering,
and support-truncated shortest-mass credible intervals anchored at the point
forecast.

The interval for variable ``l`` at horizon ``h`` is built from the simulated
draw cube: draws outside the variable's admissible support ``[a_l, b_l]`` are
discarded (acceptance rate ``rho``), the remaining draws are sorted, and the
shortest contiguous window holding at least a ``gamma`` share of them *and*
containing the point forecast is reported.  When truncation binds, the
effective covered mass is ``gamma_eff = gamma * rho``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, NumericalError
from .model import MniwPosterior, ParamDraw, sample_direct
from .panel import ExogPath, Panel


class StabilityWarning(UserWarning):
    """Emitted when forecasting from an explosive (unstable) parameter draw."""


#: lowercase name fragments mapped to default support bounds
_RATE_TOKENS = ("unemployment", "unemp", "interest", "sir")
_LEVEL_TOKENS = ("price", "level", "index", "oil", "reer", "exchange")


@dataclass(frozen=True)
class SupportBounds:
    """Per-variable admissible supports ``[lower_l, upper_l]`` (may be infinite)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigError("bounds must be equal-length 1-D arrays")
        if np.any(~(lower < upper)):
            raise ConfigError("each lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unbounded(cls, m: int) -> "SupportBounds":
        return cls(lower=np.full(m, -np.inf), upper=np.full(m, np.inf))

    @classmethod
    def from_names(cls, names) -> "SupportBounds":
        """Heuristic defaults: rate-like series [0, 100], level/price-like
        series [0, inf), everything else unbounded."""
        lower, upper = [], []
        for name in names:
            low = name.lower()
            if any(tok in low for tok in _RATE_TOKENS):
                lower.append(0.0)
                upper.append(100.0)
            elif any(tok in low for tok in _LEVEL_TOKENS):
                lower.append(0.0)
                upper.append(np.inf)
            else:
                lower.append(-np.inf)
                upper.append(np.inf)
        return cls(lower=np.array(lower), upper=np.array(upper))

    @classmethod
    def from_mapping(cls, mapping, names) -> "SupportBounds":
        """Explicit per-name ``{name: [lo, hi]}`` overrides on top of the heuristic."""
        base = cls.from_names(names)
        lower, upper = base.lower.copy(), base.upper.copy()
        for name, pair in dict(mapping).items():
            if name not in names:
                raise ConfigError(f"bounds given for unknown variable {name!r}")
            j = list(names).index(name)
            lo = -np.inf if pair[0] is None else float(pair[0])
            hi = np.inf if pair[1] is None else float(pair[1])
            lower[j], upper[j] = lo, hi
        return cls(lower=lower, upper=upper)


@dataclass(frozen=True)
class ForecastDistribution:
    """Point path, draw cube and per-cell interval summaries for one forecast run."""

    names: tuple
    point: np.ndarray          # (H, m) tuned point forecast
    draws: np.ndarray          # (S, H, m) snap-centered simulated paths
    lower: np.ndarray          # (H, m)
    upper: np.ndarray          # (H, m)
    rho: np.ndarray            # (H, m) admissible acceptance rate
    gamma: float
    gamma_eff: np.ndarray      # (H, m)
    snap_delta: np.ndarray     # (H, m)
    bounds: SupportBounds = field(compare=False, default=None)

    @property
    def H(self) -> int:
        return self.point.shape[0]

    @property
    def m(self) -> int:
        return self.point.shape[1]


def _exog_values(exog, H: int, k: int) -> np.ndarray:
    if exog is None:
        if k != 0:
            raise DataError("model has exogenous regressors but no future path given")
        return np.zeros((H, 0))
    values = exog.values if isinstance(exog, ExogPath) else np.asarray(exog, dtype=np.float64)
    if values.shape != (H, k):
        raise DataError(
            f"future exogenous path has shape {values.shape}, expected {(H, k)}"
        )
    return values


def _recurse(params: ParamDraw, history: np.ndarray, x_future: np.ndarray,
             shocks: np.ndarray | None) -> np.ndarray:
    """Run the VAR recursion for one parameter draw.

    ``history`` holds the last p observed rows (oldest first); ``shocks`` is
    an (H, m) matrix of additive innovations, or None for the deterministic
    path.
    """
    p, m, _ = params.phi.shape
    H = x_future.shape[0]
    buf = np.vstack([history, np.empty((H, m))])
    for h in range(H):
        y = params.mu + params.gamma.T @ x_future[h]
        for lag in range(1, p + 1):
            y = y + params.phi[lag - 1] @ buf[p + h - lag]
        if shocks is not None:
            y = y + shocks[h]
        buf[p + h] = y
    return buf[p:]


def point_forecast(params: ParamDraw, train: Panel, exog, H: int) -> np.ndarray:
    """Deterministic recursion (all shocks zero) from the end of the training
    sample, conditional on the pinned future exogenous path."""
    p, m, _ = params.phi.shape
    if train.m != m:
        raise DataError("parameter dimension does not match panel")
    if train.T < p:
        raise DataError(f"need at least p={p} training rows")
    if H < 1:
        raise ConfigError("H must be >= 1")
    if not params.stable:
        warnings.warn(
            f"forecasting from an unstable draw (spectral radius "
            f"{params.spectral_radius:.6f})",
            StabilityWarning,
            stacklevel=2,
        )
    x_future = _exog_values(exog, H, params.gamma.shape[0])
    return _recurse(params, train.endog[train.T - p:], x_future, None)


def posterior_mean_forecast(draws, train: Panel, exog, H: int,
                            rng: np.random.Generator,
                            min_stable_frac: float = 0.5) -> np.ndarray:
    """Average of per-draw stochastic paths over the stable draws only.

    Each retained draw contributes one simulated trajectory with innovations
    ``u ~ N(0, Sigma_draw)``.  If fewer than ``min_stable_frac`` of the draws
    are stable the run aborts rather than quietly averaging a biased subset.
    """
    draws = list(draws)
    if not draws:
        raise ConfigError("no draws supplied")
    stable = [dr for dr in draws if dr.stable]
    frac = len(stable) / len(draws)
    if frac < min_stable_frac:
        raise NumericalError(
            f"only {frac:.3f} of draws are stable (need >= {min_stable_frac}); "
            "the posterior is too explosive for averaging"
        )
    p, m, _ = stable[0].phi.shape
    x_future = _exog_values(exog, H, stable[0].gamma.shape[0])
    history = train.endog[train.T - p:]
    acc = np.zeros((H, m))
    for dr in stable:
        chol = _safe_cholesky(dr.sigma)
        shocks = rng.standard_normal((H, m)) @ chol.T if chol is not None else None
        acc += _recurse(dr, history, x_future, shocks)
    return acc / len(stable)


def _safe_cholesky(sigma: np.ndarray):
    """Cholesky factor of a covariance, treating an all-zero matrix as 'no noise'."""
    if not np.any(sigma):
        return None
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"covariance not positive definite: {exc}") from exc


def simulate_paths(mean_params: ParamDraw, sigma_bar: np.ndarray, train: Panel,
                   exog, H: int, S: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate ``S`` future trajectories at fixed (posterior-mean) parameters.

    Innovations are ``eps ~ N(0, sigma_bar)`` drawn independently per step;
    parameter uncertainty is deliberately excluded.  Returns an (S, H, m)
    cube, deterministic for a fixed generator state.
    """
    if S < 1:
        raise ConfigError("S must be >= 1")
    p, m, _ = mean_params.phi.shape
    x_future = _exog_values(exog, H, mean_params.gamma.shape[0])
    chol = _safe_cholesky(np.asarray(sigma_bar, dtype=np.float64))
    eps = np.zeros((S, H, m)) if chol is None else rng.standard_normal((S, H, m)) @ chol.T

    history = train.endog[train.T - p:]
    cube = np.empty((S, H, m))
    # vectorized across draws: one recursion over horizons
    for h in range(H):
        y = mean_params.mu + mean_params.gamma.T @ x_future[h]
        y = np.broadcast_to(y, (S, m)).copy()
        for lag in range(1, p + 1):
            back = h - lag
            prev = cube[:, back, :] if back >= 0 else np.broadcast_to(history[p + back], (S, m))
            y += prev @ mean_params.phi[lag - 1].T
        cube[:, h, :] = y + eps[:, h, :]
    return cube


def snap_center(cube: np.ndarray, tuned_point: np.ndarray,
                deterministic_point: np.ndarray) -> np.ndarray:
    """Shift every simulated path by ``delta = tuned - deterministic`` so the
    cube's central tendency sits on the tuned point forecast.  Pure
    translation: dispersion is untouched."""
    if tuned_point.shape != deterministic_point.shape:
        raise DataError("point path shapes disagree")
    if cube.shape[1:] != tuned_point.shape:
        raise DataError("cube and point path shapes disagree")
    delta = tuned_point - deterministic_point
    return cube + delta[None, :, :]


def _anchored_window(values: np.ndarray, pf: float, gamma: float):
    """Shortest window over sorted ``values`` with >= gamma mass, stretched to
    contain ``pf``.  Returns (L, U).  Ties go to the smallest start index."""
    v = np.sort(values)
    n = v.size
    k = math.ceil(gamma * n)
    k = max(k, 1)
    lows = np.minimum(v[: n - k + 1], pf)
    highs = np.maximum(v[k - 1:], pf)
    widths = highs - lows
    i = int(np.argmin(widths))  # first argmin: smallest start index
    return float(lows[i]), float(highs[i])


def credible_intervals(cube: np.ndarray, bounds: SupportBounds, gamma: float,
                       tuned_point: np.ndarray, names=None):
    """Per-(variable, horizon) truncated shortest-mass intervals.

    Returns arrays ``(lower, upper, rho, gamma_eff)`` each of shape (H, m).
    Draws outside the variable's support are discarded; ``rho`` is the
    surviving fraction and ``gamma_eff = gamma * rho`` whenever truncation
    binds (rho < 1).  The tuned point forecast is always inside [L, U].
    """
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"gamma={gamma} must lie in (0, 1)")
    S, H, m = cube.shape
    if tuned_point.shape != (H, m):
        raise DataError("tuned point path does not match cube shape")
    if bounds.lower.shape != (m,):
        raise ConfigError("bounds dimension does not match cube")

    lower = np.empty((H, m))
    upper = np.empty((H, m))
    rho = np.empty((H, m))
    gamma_eff = np.empty((H, m))
    for j in range(m):
        a, b = bounds.lower[j], bounds.upper[j]
        for h in range(H):
            col = cube[:, h, j]
            adm = col[(col >= a) & (col <= b)]
            r = adm.size / S
            if adm.size == 0:
                label = names[j] if names is not None else f"var{j}"
                raise NumericalError(
                    f"no admissible draws for {label} at horizon {h + 1} "
                    f"(rho=0; support [{a}, {b}])"
                )
            L, U = _anchored_window(adm, float(tuned_point[h, j]), gamma)
            lower[h, j], upper[h, j] = L, U
            rho[h, j] = r
            gamma_eff[h, j] = gamma * r if r < 1.0 else gamma
    return lower, upper, rho, gamma_eff


def forecast_pipeline(train: Panel, post: MniwPosterior, exog, H: int,
                      rng: np.random.Generator, S: int = 1000,
                      gamma: float = 0.50, bounds: SupportBounds | None = None,
                      point_method: str = "deterministic",
                      n_param_draws: int = 1000,
                      min_stable_frac: float = 0.5) -> ForecastDistribution:
    """End-to-end forecast: point path, simulated cube, snap-centering,
    truncated anchored intervals.

    ``point_method`` selects the tuned point forecast: ``"deterministic"``
    (recursion at the posterior-mean parameters, the tuner's convention) or
    ``"draw_mean"`` (average of stochastic paths over stable posterior
    draws).  The simulation cube always uses posterior-mean parameters with
    innovations N(0, posterior-mean Sigma), then gets snapped onto the point
    path.
    """
    if point_method not in ("deterministic", "draw_mean"):
        raise ConfigError(f"unknown point_method {point_method!r}")
    layout = post.layout
    mean_params = ParamDraw.from_b_matrix(post.Bbar, post.sigma_mean, layout)
    if bounds is None:
        bounds = SupportBounds.unbounded(layout.m)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        det = point_forecast(mean_params, train, exog, H)
        if point_method == "deterministic":
            point = det
        else:
            draws = sample_direct(post, n_param_draws, rng)
            point = posterior_mean_forecast(
                draws, train, exog, H, rng, min_stable_frac=min_stable_frac
            )
        cube = simulate_paths(mean_params, post.sigma_mean, train, exog, H, S, rng)

    cube = snap_center(cube, point, det)
    names = getattr(train, "endog_names", tuple(f"var{j}" for j in range(layout.m)))
    lower, upper, rho, gamma_eff = credible_intervals(cube, bounds, gamma, point, names)
    return ForecastDistribution(
        names=tuple(names),
        point=point,
        draws=cube,
        lower=lower,
        upper=upper,
        rho=rho,
        gamma=gamma,
        gamma_eff=gamma_eff,
        snap_delta=point - det,
        bounds=bounds,
    )
