"""Forecast-comparison statistics.

Implements four complementary procedures:

* Murphy-diagram differentials: mean extremal-score differences between two
  forecast sequences over a threshold grid, with Newey-West (Bartlett kernel)
  pointwise confidence bands.
* A multivariate Diebold-Mariano Wald test over k models, built on a vector
  of loss differentials with rectangular-kernel HAC covariance and a
  Harvey-Leybourne-Newbold style finite-sample correction.
* An unconditional Giacomini-White Wald test with Parzen-kernel HAC
  covariance.
* Multiple-comparison-with-the-best (Friedman/Nemenyi) mean-rank intervals
  with the critical distance CD = q_alpha * sqrt(A(A+1)/(6D)).

Losses are "lower is better" everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2, norm, rankdata

from .errors import ConfigError, DataError

# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MurphyCurve:
    """Extremal-score differential curve D(theta) with pointwise HAC bands."""

    thetas: np.ndarray
    diff: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    alpha_expectile: float
    conf_level: float
    lag: int

    def __post_init__(self):
        if np.any(np.diff(self.thetas) <= 0):
            raise ConfigError("theta grid must be strictly increasing")
        if np.any(self.band_lo > self.diff + 1e-12) or np.any(self.band_hi < self.diff - 1e-12):
            raise DataError("bands must bracket the curve pointwise")


@dataclass(frozen=True)
class WaldTestResult:
    """Chi-square Wald test summary."""

    statistic: float
    dof: int
    p_value: float
    kernel: str
    correction: str
    degenerate: bool = False
    pseudo_inverse: bool = False

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "kernel": self.kernel,
            "correction": self.correction,
            "degenerate": self.degenerate,
            "pseudo_inverse": self.pseudo_inverse,
        }


@dataclass(frozen=True)
class McbResult:
    """Mean ranks with critical-distance intervals; lower rank = better."""

    mean_ranks: np.ndarray
    cd: float
    alpha: float
    intervals: np.ndarray  # (A, 2): mean_rank -/+ cd/2
    best: int
    names: tuple = field(default=None, compare=False)

    def significantly_different(self, i: int, j: int) -> bool:
        return abs(self.mean_ranks[i] - self.mean_ranks[j]) > self.cd


# ---------------------------------------------------------------------------
# HAC variance helpers
# ---------------------------------------------------------------------------


def auto_bandwidth(n: int) -> int:
    """Automatic Bartlett truncation lag, floor(4 * (N/100)^(2/9))."""
    if n < 2:
        raise DataError("need at least two observations")
    # tiny nudge so exact-integer powers are not floored down by float error
    return int(np.floor(4.0 * (n / 100.0) ** (2.0 / 9.0) + 1e-9))


def newey_west_var(series: np.ndarray, lag: int) -> float:
    """Newey-West variance of the sample mean with Bartlett weights.

    (1/N) * (gamma_0 + 2 * sum_{j=1..lag} (1 - j/(lag+1)) * gamma_j) where
    gamma_j is the (1/N-normalized) sample autocovariance at lag j.
    """
    d = np.asarray(series, dtype=np.float64).ravel()
    n = d.size
    if n < 2:
        raise DataError("need at least two observations")
    if not 0 <= lag < n:
        raise ConfigError(f"lag={lag} must satisfy 0 <= lag < N={n}")
    c = d - d.mean()
    gamma0 = float(c @ c) / n
    acc = gamma0
    for j in range(1, lag + 1):
        w = 1.0 - j / (lag + 1.0)
        acc += 2.0 * w * float(c[j:] @ c[:-j]) / n
    return acc / n


def _hac_matrix(D: np.ndarray, weights) -> np.ndarray:
    """Kernel-weighted long-run covariance of the rows of D (T x r), 1/T scaled.

    ``weights[j]`` multiplies the lag-j autocovariance term (j >= 1); lag 0
    always has weight 1.  The weighted sum adds Gamma_j + Gamma_j' per lag.
    """
    T = D.shape[0]
    C = D - D.mean(axis=0, keepdims=True)
    S = C.T @ C / T
    for j, w in enumerate(weights, start=1):
        if w == 0.0:
            continue
        G = C[j:].T @ C[:-j] / T
        S = S + w * (G + G.T)
    return S


def parzen_weight(u: float) -> float:
    """Parzen kernel: 1 - 6u^2 + 6|u|^3 for |u| <= 1/2, 2(1-|u|)^3 for 1/2 < |u| <= 1."""
    a = abs(u)
    if a <= 0.5:
        return 1.0 - 6.0 * a * a + 6.0 * a**3
    if a <= 1.0:
        return 2.0 * (1.0 - a) ** 3
    return 0.0


# ---------------------------------------------------------------------------
# Murphy diagrams
# ---------------------------------------------------------------------------


def extremal_score(x, y, theta, alpha: float):
    """Elementary (extremal) score at threshold ``theta``.

    (alpha - 1) * (y - theta) when y <= theta < x;
    alpha * (y - theta) when x <= theta < y; else 0.  Lower is better.
    Broadcasts over array inputs.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    case_over = (y <= theta) & (theta < x)   # forecast exceeded threshold, outcome did not
    case_under = (x <= theta) & (theta < y)
    out = np.where(case_over, (alpha - 1.0) * (y - theta), 0.0)
    out = np.where(case_under, alpha * (y - theta), out)
    if out.ndim == 0:
        return float(out)
    return out


def murphy_diff(fA, fB, y, theta_grid, alpha: float = 0.5,
                conf: float = 0.90) -> MurphyCurve:
    """Mean extremal-score differential D(theta) = mean_t [S(fA) - S(fB)] with
    pointwise Newey-West confidence bands.

    Negative D(theta) favours method A at that threshold.  The HAC truncation
    lag follows :func:`auto_bandwidth`; bands are D +/- z_{(1+conf)/2} * se.
    """
    fA = np.asarray(fA, dtype=np.float64).ravel()
    fB = np.asarray(fB, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if not (fA.size == fB.size == y.size):
        raise DataError("forecast and actual lengths disagree")
    n = y.size
    if n < 2:
        raise DataError("need at least two observations")
    thetas = np.asarray(theta_grid, dtype=np.float64).ravel()
    if thetas.size == 0:
        raise ConfigError("empty theta grid")
    lag = auto_bandwidth(n)
    z = norm.ppf(0.5 + conf / 2.0)

    diff = np.empty(thetas.size)
    lo = np.empty(thetas.size)
    hi = np.empty(thetas.size)
    for i, th in enumerate(thetas):
        d = extremal_score(fA, y, th, alpha) - extremal_score(fB, y, th, alpha)
        diff[i] = d.mean()
        se = np.sqrt(max(newey_west_var(d, lag), 0.0))
        lo[i] = diff[i] - z * se
        hi[i] = diff[i] + z * se
    return MurphyCurve(
        thetas=thetas, diff=diff, band_lo=lo, band_hi=hi,
        alpha_expectile=alpha, conf_level=conf, lag=lag,
    )


def default_theta_grid(y, n_points: int = 101) -> np.ndarray:
    """Evenly spaced thresholds spanning the observed range (slightly padded)."""
    y = np.asarray(y, dtype=np.float64).ravel()
    lo, hi = float(y.min()), float(y.max())
    pad = 0.05 * (hi - lo if hi > lo else max(abs(lo), 1.0))
    return np.linspace(lo - pad, hi + pad, n_points)


# ---------------------------------------------------------------------------
# Wald tests
# ---------------------------------------------------------------------------

_DEGENERATE_TOL = 1e-14


def absolute_scaled_error(errors: np.ndarray, insample: np.ndarray,
                          seasonal_period: int = 1) -> np.ndarray:
    """|e_t| divided by the in-sample seasonal-naive mean absolute difference
    (the MASE denominator machinery)."""
    errors = np.asarray(errors, dtype=np.float64)
    x = np.asarray(insample, dtype=np.float64).ravel()
    S = seasonal_period
    if x.size <= S:
        raise DataError("in-sample series shorter than the seasonal period")
    scale = np.mean(np.abs(x[S:] - x[:-S]))
    if scale == 0.0:
        raise DataError("degenerate in-sample naive scale (all increments zero)")
    return np.abs(errors) / scale


def dm_multivariate(losses: np.ndarray, q: int = 1,
                    pairing: str = "adjacent",
                    hln_correction: bool = True) -> WaldTestResult:
    """Multivariate Diebold-Mariano Wald test for equal expected loss across
    k models.

    ``losses`` is (T, k), lower = better.  Differentials are taken between
    adjacent model columns (or every model vs the first with
    ``pairing="vs_first"``), giving d_t in R^{k-1}.  The statistic is
    S = T * dbar' Omega^{-1} dbar with a rectangular-kernel HAC Omega up to
    lag q-1 (q = 1 reduces to the plain sample covariance), multiplied by the
    finite-sample factor c = (T + 1 - 2q + q(q-1)/T) / T when
    ``hln_correction`` is on.  Null distribution: chi-square with k-1 dof.
    """
    L = np.asarray(losses, dtype=np.float64)
    if L.ndim != 2 or L.shape[1] < 2:
        raise DataError("losses must be (T, k) with k >= 2")
    T, k = L.shape
    if T <= k:
        raise DataError(f"need T > k; got T={T}, k={k}")
    if q < 1:
        raise ConfigError("block length q must be >= 1")
    if pairing == "adjacent":
        D = L[:, :-1] - L[:, 1:]
    elif pairing == "vs_first":
        D = L[:, [0]] - L[:, 1:]
    else:
        raise ConfigError(f"unknown pairing {pairing!r}")

    corr = f"hln(q={q})" if hln_correction else "none"
    c = (T + 1 - 2 * q + q * (q - 1) / T) / T if hln_correction else 1.0
    return _wald(D, _hac_matrix(D, [1.0] * (q - 1)), kernel="rectangular",
                 correction=corr, factor=c)


def gw_unconditional(loss_diffs: np.ndarray, bandwidth: int | None = None) -> WaldTestResult:
    """Unconditional Giacomini-White Wald test of E[d_t] = 0 for a (T, r)
    differential matrix, with Parzen-kernel HAC covariance.

    Default truncation L = floor(T^(1/3)); lag-j weight is parzen(j / (L+1)).
    Statistic T * dbar' Sigma^{-1} dbar ~ chi-square(r) under the null.
    """
    D = np.asarray(loss_diffs, dtype=np.float64)
    if D.ndim == 1:
        D = D[:, None]
    T, r = D.shape
    if T <= r:
        raise DataError(f"need T > r; got T={T}, r={r}")
    # the nudge keeps perfect cubes (T = 125 -> L = 5) from flooring down
    L = int(np.floor(T ** (1.0 / 3.0) + 1e-9)) if bandwidth is None else int(bandwidth)
    if L < 0:
        raise ConfigError("bandwidth must be >= 0")
    weights = [parzen_weight(j / (L + 1.0)) for j in range(1, L + 1)]
    return _wald(D, _hac_matrix(D, weights), kernel="parzen",
                 correction=f"bandwidth={L}", factor=1.0)


def _wald(D: np.ndarray, omega: np.ndarray, kernel: str, correction: str,
          factor: float) -> WaldTestResult:
    T, r = D.shape
    dbar = D.mean(axis=0)
    scale = float(np.max(np.abs(omega)))
    data_scale = float(np.max(np.abs(D)))
    # degeneracy is judged relative to the differential magnitude (omega has
    # units of D squared) so the test statistic is invariant to rescaling all
    # losses by a positive constant; identical losses give data_scale = 0
    if data_scale == 0.0 or scale < _DEGENERATE_TOL * data_scale * data_scale:
        return WaldTestResult(
            statistic=0.0, dof=r, p_value=1.0, kernel=kernel,
            correction=correction, degenerate=True,
        )
    used_pinv = False
    try:
        sol = np.linalg.solve(omega, dbar)
        # solve() succeeds on ill-conditioned matrices; verify the residual
        if not np.allclose(omega @ sol, dbar, rtol=1e-8, atol=1e-12 * scale):
            raise np.linalg.LinAlgError("unreliable solve")
    except np.linalg.LinAlgError:
        sol = np.linalg.pinv(omega) @ dbar
        used_pinv = True
    stat = factor * T * float(dbar @ sol)
    stat = max(stat, 0.0)
    return WaldTestResult(
        statistic=stat,
        dof=r,
        p_value=float(chi2.sf(stat, r)),
        kernel=kernel,
        correction=correction,
        pseudo_inverse=used_pinv,
    )


# ---------------------------------------------------------------------------
# MCB / Nemenyi
# ---------------------------------------------------------------------------

#: upper studentized-range quantiles / sqrt(2) for A = 2..20 algorithms
#: (infinite degrees of freedom), keyed by significance level
_NEMENYI_Q = {
    0.01: (2.575829, 2.913494, 3.113250, 3.254686, 3.363740, 3.452213,
           3.526471, 3.590339, 3.646292, 3.696021, 3.740733, 3.781318,
           3.818451, 3.852654, 3.884343, 3.913850, 3.941446, 3.967357,
           3.991770),
    0.05: (1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320,
           3.030878, 3.101730, 3.163684, 3.218654, 3.268004, 3.312739,
           3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073,
           3.543799),
    0.10: (1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732,
           2.779884, 2.854606, 2.919889, 2.977768, 3.029694, 3.076733,
           3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224,
           3.319233),
}


def nemenyi_q(n_algorithms: int, alpha: float) -> float:
    """Critical constant q_alpha for the Nemenyi test (A <= 20)."""
    if not 2 <= n_algorithms <= 20:
        raise ConfigError("embedded critical values cover 2..20 algorithms")
    key = round(alpha, 2)
    if key not in _NEMENYI_Q:
        raise ConfigError(f"alpha={alpha} not tabulated; use one of {sorted(_NEMENYI_Q)}")
    return _NEMENYI_Q[key][n_algorithms - 2]


def mcb(scores: np.ndarray, alpha: float = 0.05, names=None) -> McbResult:
    """Multiple comparison with the best over a (D datasets x A algorithms)
    score matrix, lower = better.

    Per-dataset ranks use average-rank tie handling; the critical distance is
    CD = q_alpha * sqrt(A (A+1) / (6 D)) and each algorithm gets the interval
    mean_rank -/+ CD/2.
    """
    S = np.asarray(scores, dtype=np.float64)
    if S.ndim != 2:
        raise DataError("scores must be a 2-D (datasets x algorithms) matrix")
    D, A = S.shape
    if D < 2 or A < 2:
        raise DataError(f"need >= 2 datasets and >= 2 algorithms; got {D}x{A}")
    ranks = rankdata(S, axis=1, method="average")
    mean_ranks = ranks.mean(axis=0)
    cd = nemenyi_q(A, alpha) * np.sqrt(A * (A + 1) / (6.0 * D))
    intervals = np.column_stack([mean_ranks - cd / 2.0, mean_ranks + cd / 2.0])
    return McbResult(
        mean_ranks=mean_ranks,
        cd=float(cd),
        alpha=alpha,
        intervals=intervals,
        best=int(np.argmin(mean_ranks)),
        names=tuple(names) if names is not None else None,
    )
