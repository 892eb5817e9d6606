"""Smooth regime-switching local projections.

For each shock series u_m and horizon h = 0..H, the system

    y_{t+h} = a_h + (trend) + sum_j [ B_{j,hi}^h y_{t-j} (1 - F_t)
                                    + B_{j,lo}^h y_{t-j} F_t ]
            + sum_l [ G_{l,hi}^h u_{m,t-l} (1 - F_t)
                    + G_{l,lo}^h u_{m,t-l} F_t ] + e_{t+h}

is estimated by equation-wise OLS, where F_t = 1 / (1 + exp(gamma * z)) is a
decreasing logistic weight in the standardized switch variable z (lagged one
period by default to avoid contemporaneous feedback).  Large z means the
(1 - F)-weighted "high" regime.  The horizon-h impulse response of variable i
to shock m in regime r is the contemporaneous-shock coefficient G_{0,r}^h
read off equation i, with Newey-West confidence bands.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from .errors import ConfigError, DataError, NumericalError

REGIMES = ("high", "low")  # high = (1 - F)-weighted, large switch values


class RegimeCollapseWarning(UserWarning):
    """One regime carries almost no sample weight; its coefficients are fragile."""


@dataclass(frozen=True)
class LpConfig:
    """Settings for the regime-switching local projections."""

    p: int = 6
    exog_lags: int = 4
    gamma: float = 3.0
    H: int = 24
    trend: str = "none"
    lag_switching: bool = True
    conf: float = 0.95
    nw_lag: int | None = None  # None: truncation h + 1 at horizon h

    def __post_init__(self):
        if self.p < 1:
            raise ConfigError("p must be >= 1")
        if self.exog_lags < 0:
            raise ConfigError("exog_lags must be >= 0")
        if not self.gamma > 0:
            raise ConfigError("gamma must be > 0")
        if self.H < 0:
            raise ConfigError("H must be >= 0")
        if self.trend not in ("none", "linear"):
            raise ConfigError(f"trend must be 'none' or 'linear', got {self.trend!r}")
        if not 0.0 < self.conf < 1.0:
            raise ConfigError("conf must lie in (0, 1)")

    def band_multiplier(self) -> float:
        # the 95% band uses the conventional 1.96 exactly
        if abs(self.conf - 0.95) < 1e-12:
            return 1.96
        return float(norm.ppf(0.5 + self.conf / 2.0))


@dataclass(frozen=True)
class LpFit:
    """Estimated coefficient stacks plus shock-coefficient standard errors."""

    coefs: np.ndarray        # (n_shocks, H+1, n_reg, m)
    irf_point: np.ndarray    # (m, n_shocks, 2, H+1)
    irf_se: np.ndarray       # (m, n_shocks, 2, H+1)
    regressor_names: tuple
    var_names: tuple
    shock_names: tuple
    config: LpConfig
    mu_c: float
    sigma_c: float
    F: np.ndarray = field(repr=False)
    collapsed: bool = False
    pseudo_inverse: bool = False


@dataclass(frozen=True)
class IrfProfile:
    """One (variable, shock, regime) horizon profile with confidence bands."""

    horizons: np.ndarray
    point: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    variable: str
    shock: str
    regime: str


@dataclass(frozen=True)
class IrfSurface:
    """All responses: indexed (variable, shock, regime, horizon)."""

    responses: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    var_names: tuple
    shock_names: tuple
    regimes: tuple
    mu_c: float
    sigma_c: float
    gamma: float

    def __post_init__(self):
        if np.any(self.ci_lo > self.responses) or np.any(self.ci_hi < self.responses):
            raise DataError("confidence bands must bracket the responses")


def standardize_switch(z: np.ndarray):
    """Center and scale the switch series by its full-sample mean and sample
    (n-1) standard deviation; the frozen (mu, sigma) pair is reused at every
    horizon."""
    z = np.asarray(z, dtype=np.float64).ravel()
    if z.size < 2:
        raise DataError("switch series too short")
    mu = float(np.mean(z))
    sigma = float(np.std(z, ddof=1))
    if sigma == 0.0:
        raise DataError("switch series is constant; regimes are undefined")
    return (z - mu) / sigma, mu, sigma


def logistic_transition(z_std: np.ndarray, gamma: float) -> np.ndarray:
    """Decreasing logistic weight F(z) = 1 / (1 + exp(gamma z)), overflow-safe."""
    if not gamma > 0:
        raise ConfigError("gamma must be > 0")
    return expit(-gamma * np.asarray(z_std, dtype=np.float64))


def select_lags_bic(endog: np.ndarray, p_max: int) -> int:
    """Lag order minimizing the Gaussian BIC of the VAR-style h=0 system.

    All candidates are scored on the common sample that supports p_max lags;
    BIC(p) = ln det(Sigma_mle) + ln(n)/n * p * m^2.  Ties go to the smaller p.
    """
    Y = np.asarray(endog, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    T, m = Y.shape
    if p_max < 1:
        raise ConfigError("p_max must be >= 1")
    n = T - p_max
    if n <= p_max * m + 1:
        raise DataError(f"too few observations (T={T}) to compare up to p_max={p_max}")
    target = Y[p_max:]
    best_p, best_bic = 1, np.inf
    for p in range(1, p_max + 1):
        X = np.empty((n, 1 + p * m))
        X[:, 0] = 1.0
        for lag in range(1, p + 1):
            X[:, 1 + (lag - 1) * m: 1 + lag * m] = Y[p_max - lag: T - lag]
        beta, *_ = np.linalg.lstsq(X, target, rcond=None)
        E = target - X @ beta
        sigma = E.T @ E / n
        sign, logdet = np.linalg.slogdet(sigma)
        if sign <= 0:
            continue
        bic = logdet + np.log(n) / n * (p * m * m)
        if bic < best_bic - 1e-12:
            best_p, best_bic = p, bic
    return best_p


def _nw_sandwich(X: np.ndarray, resid: np.ndarray, xtx_inv: np.ndarray,
                 lag: int) -> np.ndarray:
    """Newey-West covariance of OLS coefficients for one equation."""
    n = X.shape[0]
    score = X * resid[:, None]
    meat = score.T @ score
    for j in range(1, min(lag, n - 1) + 1):
        w = 1.0 - j / (lag + 1.0)
        G = score[j:].T @ score[:-j]
        meat += w * (G + G.T)
    return xtx_inv @ meat @ xtx_inv


def fit_nl_lp(endog: np.ndarray, shocks: np.ndarray, switch: np.ndarray,
              config: LpConfig, var_names=None, shock_names=None) -> LpFit:
    """Estimate the regime-switching local projections, one model per shock.

    ``endog`` is (T, m); ``shocks`` is (T, n_shocks) in raw units, aligned to
    the same dates; ``switch`` is the raw regime variable (standardized
    internally, transition lagged one period when ``config.lag_switching``).
    """
    Y = np.asarray(endog, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    U = np.asarray(shocks, dtype=np.float64)
    if U.ndim == 1:
        U = U[:, None]
    T, m = Y.shape
    if U.shape[0] != T:
        raise DataError("shock series not aligned with the endogenous sample")
    n_shocks = U.shape[1]
    var_names = tuple(var_names) if var_names else tuple(f"var{i}" for i in range(m))
    shock_names = tuple(shock_names) if shock_names else tuple(
        f"shock{i}" for i in range(n_shocks))

    z_std, mu_c, sigma_c = standardize_switch(switch)
    F_all = logistic_transition(z_std, config.gamma)

    t0 = max(config.p, config.exog_lags, 1 if config.lag_switching else 0)
    t_last = T - 1 - config.H
    if t_last < t0 + 2:
        raise DataError(
            f"sample too short: T={T} with p={config.p}, H={config.H} leaves "
            f"{max(t_last - t0 + 1, 0)} usable rows"
        )
    t_idx = np.arange(t0, t_last + 1)
    n = t_idx.size
    F = F_all[t_idx - 1] if config.lag_switching else F_all[t_idx]
    w_high, w_low = 1.0 - F, F

    low_weight, high_weight = float(np.sum(w_low)), float(np.sum(w_high))
    collapsed = min(low_weight, high_weight) < 0.05 * n
    if collapsed:
        warnings.warn(
            f"regime collapse: total weights high={high_weight:.2f}, "
            f"low={low_weight:.2f} over n={n} rows",
            RegimeCollapseWarning,
            stacklevel=2,
        )

    names = ["const"]
    if config.trend == "linear":
        names.append("trend")
    for lag in range(1, config.p + 1):
        for i in range(m):
            names.append(f"{var_names[i]}.l{lag}.high")
            names.append(f"{var_names[i]}.l{lag}.low")
    shock_pos = {}
    for ell in range(config.exog_lags + 1):
        shock_pos[(ell, "high")] = len(names)
        names.append(f"shock.l{ell}.high")
        shock_pos[(ell, "low")] = len(names)
        names.append(f"shock.l{ell}.low")
    n_reg = len(names)

    base = np.empty((n, n_reg))
    base[:, 0] = 1.0
    col = 1
    if config.trend == "linear":
        base[:, col] = t_idx.astype(np.float64)
        col += 1
    for lag in range(1, config.p + 1):
        for i in range(m):
            vals = Y[t_idx - lag, i]
            base[:, col] = vals * w_high
            base[:, col + 1] = vals * w_low
            col += 2

    mult = config.band_multiplier()
    coefs = np.empty((n_shocks, config.H + 1, n_reg, m))
    irf_point = np.empty((m, n_shocks, 2, config.H + 1))
    irf_se = np.empty((m, n_shocks, 2, config.H + 1))
    used_pinv = False

    for s in range(n_shocks):
        X = base.copy()
        for ell in range(config.exog_lags + 1):
            vals = U[t_idx - ell, s]
            X[:, shock_pos[(ell, "high")]] = vals * w_high
            X[:, shock_pos[(ell, "low")]] = vals * w_low
        XtX = X.T @ X
        try:
            xtx_inv = np.linalg.inv(XtX)
            if not np.isfinite(xtx_inv).all() or np.linalg.cond(XtX) > 1e12:
                raise np.linalg.LinAlgError("ill-conditioned design")
        except np.linalg.LinAlgError:
            xtx_inv = np.linalg.pinv(XtX)
            used_pinv = True
            warnings.warn(
                f"rank-deficient LP design for shock {shock_names[s]!r}; "
                "using pseudo-inverse (dead-regime coefficients are zeroed)",
                RegimeCollapseWarning,
                stacklevel=2,
            )
        proj = xtx_inv @ X.T
        hi_col = shock_pos[(0, "high")]
        lo_col = shock_pos[(0, "low")]
        for h in range(config.H + 1):
            target = Y[t_idx + h]
            beta = proj @ target
            coefs[s, h] = beta
            resid = target - X @ beta
            lag = config.nw_lag if config.nw_lag is not None else h + 1
            for i in range(m):
                cov = _nw_sandwich(X, resid[:, i], xtx_inv, lag)
                irf_point[i, s, 0, h] = beta[hi_col, i]
                irf_point[i, s, 1, h] = beta[lo_col, i]
                irf_se[i, s, 0, h] = np.sqrt(max(cov[hi_col, hi_col], 0.0))
                irf_se[i, s, 1, h] = np.sqrt(max(cov[lo_col, lo_col], 0.0))

    return LpFit(
        coefs=coefs,
        irf_point=irf_point,
        irf_se=irf_se,
        regressor_names=tuple(names),
        var_names=var_names,
        shock_names=shock_names,
        config=config,
        mu_c=mu_c,
        sigma_c=sigma_c,
        F=F,
        collapsed=collapsed,
        pseudo_inverse=used_pinv,
    )


def extract_irf(fit: LpFit, variable, shock, regime: str) -> IrfProfile:
    """Horizon profile for one (variable, shock, regime) triple with
    conf-level Newey-West bands."""
    i = fit.var_names.index(variable) if isinstance(variable, str) else int(variable)
    s = fit.shock_names.index(shock) if isinstance(shock, str) else int(shock)
    if regime not in REGIMES:
        raise ConfigError(f"regime must be one of {REGIMES}")
    if not (0 <= i < len(fit.var_names) and 0 <= s < len(fit.shock_names)):
        raise ConfigError("variable or shock index out of range")
    r = REGIMES.index(regime)
    point = fit.irf_point[i, s, r]
    half = fit.config.band_multiplier() * fit.irf_se[i, s, r]
    return IrfProfile(
        horizons=np.arange(fit.config.H + 1),
        point=point.copy(),
        lo=point - half,
        hi=point + half,
        variable=fit.var_names[i],
        shock=fit.shock_names[s],
        regime=regime,
    )


def irf_surface(fit: LpFit) -> IrfSurface:
    """Bundle every (variable, shock, regime, horizon) response with bands."""
    half = fit.config.band_multiplier() * fit.irf_se
    return IrfSurface(
        responses=fit.irf_point.copy(),
        ci_lo=fit.irf_point - half,
        ci_hi=fit.irf_point + half,
        var_names=fit.var_names,
        shock_names=fit.shock_names,
        regimes=REGIMES,
        mu_c=fit.mu_c,
        sigma_c=fit.sigma_c,
        gamma=fit.config.gamma,
    )
