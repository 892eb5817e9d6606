"""Conjugate Bayesian VAR with exogenous regressors (matrix-normal/inverse-Wishart).

The model for an m-variate series ``y_t`` with k exogenous regressors ``x_t``:

    y_t = mu + Phi_1 y_{t-1} + ... + Phi_p y_{t-p} + Gamma' x_t + u_t,
    u_t ~ N(0, Sigma)

stacked as ``Y = Z B + U`` with regressor rows ``Z_t = [1, y_{t-1}', ...,
y_{t-p}', x_t']`` and coefficient matrix ``B`` of shape (d, m), d = 1 + m*p + k.
The prior is B | Sigma ~ MN(B0, Omega0, Sigma), Sigma ~ IW(Psi0, nu0), which is
conjugate: the posterior is again MN-IW with closed-form updates.  Shrinkage
follows the tightness-hyperparameter tradition (overall/lag-decay/intercept/
exogenous scales plus sum-of-coefficients and initial-conditions dummy rows).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.stats import invwishart

from .errors import ConfigError, DataError, NumericalError, UnimplementedFamilyError
from .panel import Panel

#: lower bound on any prior standard deviation; a tightness of exactly zero is
#: realised as this (effectively dogmatic) finite value so precisions stay finite
PRIOR_STD_FLOOR = 1e-8

#: strict-stability margin: stable iff spectral radius < 1 - STAB_EPS
STAB_EPS = 1e-9

PRIOR_FAMILIES = ("mn_iw", "flat_gaussian", "flat_flat")


@dataclass(frozen=True)
class SzHyper:
    """Shrinkage hyper-parameters for the conjugate prior.

    ``lambda0`` scales everything; ``lambda1`` the lag coefficients;
    ``lambda3`` is the lag-decay exponent; ``lambda4`` the intercept scale;
    ``lambda5`` the exogenous-coefficient scale; ``mu5``/``mu6`` weight the
    sum-of-coefficients and initial-conditions dummy observations.
    """

    p: int
    lambda0: float
    lambda1: float
    lambda3: float
    lambda4: float
    lambda5: float
    mu5: float
    mu6: float
    prior_family: str = "mn_iw"

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ConfigError(f"lag order p={self.p!r} must be an integer >= 1")
        if not self.lambda0 > 0:
            raise ConfigError("lambda0 must be > 0")
        for name in ("lambda1", "lambda3", "lambda4", "lambda5", "mu5", "mu6"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.prior_family not in PRIOR_FAMILIES:
            raise ConfigError(
                f"unknown prior family {self.prior_family!r}; "
                f"expected one of {PRIOR_FAMILIES}"
            )

    def astuple(self) -> tuple:
        return (
            self.p,
            self.lambda0,
            self.lambda1,
            self.lambda3,
            self.lambda4,
            self.lambda5,
            self.mu5,
            self.mu6,
        )

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "p", "lambda0", "lambda1", "lambda3", "lambda4", "lambda5", "mu5", "mu6")}
        d["prior_family"] = self.prior_family
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SzHyper":
        return cls(**d)


@dataclass(frozen=True)
class Layout:
    """Column layout of the stacked regressor matrix Z."""

    m: int
    p: int
    k: int

    @property
    def d(self) -> int:
        return 1 + self.m * self.p + self.k

    def lag_col(self, lag: int, var: int) -> int:
        """Column of variable ``var`` (0-based) at lag ``lag`` (1-based)."""
        return 1 + (lag - 1) * self.m + var

    def exog_col(self, q: int) -> int:
        return 1 + self.m * self.p + q


@dataclass(frozen=True)
class DesignMatrices:
    """Stacked regression blocks Y (T_eff x m) and Z (T_eff x d)."""

    Y: np.ndarray
    Z: np.ndarray
    layout: Layout

    def __post_init__(self):
        if self.Y.ndim != 2 or self.Z.ndim != 2 or self.Y.shape[0] != self.Z.shape[0]:
            raise DataError("Y and Z must be 2-D with equal row counts")
        if self.Z.shape[1] != self.layout.d:
            raise DataError(
                f"Z has {self.Z.shape[1]} columns, layout expects {self.layout.d}"
            )

    @property
    def T_eff(self) -> int:
        return self.Y.shape[0]


@dataclass(frozen=True)
class MniwPrior:
    """MN-IW prior: B | Sigma ~ MN(B0, diag(omega0_diag), Sigma), Sigma ~ IW(Psi0, nu0).

    ``omega0_diag`` already contains every tightness factor (including the
    squared overall scale), so downstream code never rescales it.  ``dummy_Y``
    and ``dummy_Z`` are appended to the data blocks during the update and
    count toward the effective sample size.
    """

    B0: np.ndarray
    omega0_diag: np.ndarray
    Psi0: np.ndarray
    nu0: float
    dummy_Y: np.ndarray
    dummy_Z: np.ndarray
    layout: Layout
    hyper: SzHyper | None = field(default=None, compare=False)

    def __post_init__(self):
        m, d = self.layout.m, self.layout.d
        if self.B0.shape != (d, m):
            raise DataError(f"B0 must be {d}x{m}")
        if self.omega0_diag.shape != (d,) or np.any(self.omega0_diag <= 0):
            raise DataError("omega0_diag must be a length-d positive vector")
        if self.Psi0.shape != (m, m):
            raise DataError(f"Psi0 must be {m}x{m}")
        if not self.nu0 > m + 1:
            raise ConfigError(f"nu0={self.nu0} must exceed m+1={m + 1}")
        if self.dummy_Y.shape[0] != self.dummy_Z.shape[0]:
            raise DataError("dummy blocks must have equal row counts")

    @property
    def sigma_mean(self) -> np.ndarray:
        """Prior mean of Sigma, Psi0 / (nu0 - m - 1)."""
        return self.Psi0 / (self.nu0 - self.layout.m - 1)


@dataclass(frozen=True)
class MniwPosterior:
    """Posterior quadruple plus cached cross-products of the augmented design."""

    Bbar: np.ndarray
    OmegaBar: np.ndarray
    PsiBar: np.ndarray
    nuBar: float
    ZtZ: np.ndarray
    ZtY: np.ndarray
    layout: Layout
    omega_bar_chol: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def sigma_mean(self) -> np.ndarray:
        """Posterior mean of Sigma, PsiBar / (nuBar - m - 1)."""
        return self.PsiBar / (self.nuBar - self.layout.m - 1)


@dataclass(frozen=True)
class ParamDraw:
    """One parameter draw in structural form.

    ``phi[l-1]`` maps ``y_{t-l}`` into ``y_t`` (so ``y_t = mu + sum_l
    phi[l-1] @ y_{t-l} + gamma.T @ x_t + u_t``); ``gamma`` has shape (k, m).
    """

    mu: np.ndarray
    phi: np.ndarray
    gamma: np.ndarray
    sigma: np.ndarray
    stable: bool
    spectral_radius: float

    @classmethod
    def from_b_matrix(cls, B: np.ndarray, Sigma: np.ndarray, layout: Layout,
                      spectral_radius: float | None = None) -> "ParamDraw":
        m, p, k = layout.m, layout.p, layout.k
        mu = B[0].copy()
        phi = np.empty((p, m, m))
        for lag in range(1, p + 1):
            phi[lag - 1] = B[1 + (lag - 1) * m: 1 + lag * m, :].T
        gamma = B[1 + m * p:].copy()
        if spectral_radius is None:
            spectral_radius = companion_spectral_radius(phi)
        return cls(
            mu=mu,
            phi=phi,
            gamma=gamma,
            sigma=Sigma.copy(),
            stable=bool(spectral_radius < 1.0 - STAB_EPS),
            spectral_radius=float(spectral_radius),
        )

    def to_b_matrix(self) -> np.ndarray:
        p, m, _ = self.phi.shape
        k = self.gamma.shape[0]
        B = np.empty((1 + m * p + k, m))
        B[0] = self.mu
        for lag in range(1, p + 1):
            B[1 + (lag - 1) * m: 1 + lag * m, :] = self.phi[lag - 1].T
        B[1 + m * p:] = self.gamma
        return B


# ---------------------------------------------------------------------------
# design construction
# ---------------------------------------------------------------------------


def build_design(panel: Panel, p: int) -> DesignMatrices:
    """Stack the VAR regression for lag order ``p`` over a training panel."""
    if int(p) != p or p < 1:
        raise ConfigError(f"lag order p={p!r} must be an integer >= 1")
    T, m, k = panel.T, panel.m, panel.k
    if T <= p:
        raise DataError(f"need T > p rows; got T={T}, p={p}")
    layout = Layout(m=m, p=p, k=k)
    T_eff = T - p
    Z = np.empty((T_eff, layout.d))
    Z[:, 0] = 1.0
    for lag in range(1, p + 1):
        Z[:, 1 + (lag - 1) * m: 1 + lag * m] = panel.endog[p - lag: T - lag]
    Z[:, 1 + m * p:] = panel.exog[p:]
    return DesignMatrices(Y=panel.endog[p:].copy(), Z=Z, layout=layout)


def ar_residual_scale(x: np.ndarray, p: int) -> float:
    """Residual standard deviation of a univariate AR(p) fit with intercept.

    OLS via least squares; the variance denominator removes the p + 1
    estimated coefficients from the effective sample.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    T = x.size
    dof = (T - p) - (p + 1)
    if dof < 1:
        raise DataError(f"series too short for AR({p}) scale: T={T}")
    X = np.empty((T - p, p + 1))
    X[:, 0] = 1.0
    for lag in range(1, p + 1):
        X[:, lag] = x[p - lag: T - lag]
    beta, *_ = np.linalg.lstsq(X, x[p:], rcond=None)
    resid = x[p:] - X @ beta
    s = float(np.sqrt(resid @ resid / dof))
    return max(s, 1e-12)


# ---------------------------------------------------------------------------
# prior construction
# ---------------------------------------------------------------------------


def build_prior(train: Panel, hyper: SzHyper) -> MniwPrior:
    """Assemble the shrinkage prior from training data and hyper-parameters.

    Prior standard deviations (before the Sigma-Kronecker equation scaling):

    * intercept: ``lambda0 * lambda4``
    * lag-l coefficient of variable j (own and cross): ``lambda0 * lambda1 /
      (s_j * l**lambda3)`` where ``s_j`` is the AR(p) residual scale of
      variable j
    * exogenous regressor q: ``lambda0 * lambda5 / s_q``

    all floored at ``PRIOR_STD_FLOOR``.  ``B0`` centres each variable on a
    random walk.  ``mu5 > 0`` adds one sum-of-coefficients dummy row per
    variable (weight ``mu5 * ybar_j`` on the variable's own lags and
    response); ``mu6 > 0`` adds a single initial-conditions row (weight
    ``mu6`` on the intercept position, ``mu6 * ybar_v`` on every lag position
    and response).  ``ybar`` is the mean of the first p training rows.
    Exogenous positions in dummy rows are zero.
    """
    if hyper.prior_family != "mn_iw":
        raise UnimplementedFamilyError(
            f"prior family {hyper.prior_family!r} is declared but not implemented; "
            "only 'mn_iw' is available"
        )
    p = hyper.p
    m, k = train.m, train.k
    if train.T < p:
        raise DataError(f"need at least p={p} training rows; got T={train.T}")
    layout = Layout(m=m, p=p, k=k)
    d = layout.d

    s_endog = np.array([ar_residual_scale(train.endog[:, j], p) for j in range(m)])
    s_exog = np.array([ar_residual_scale(train.exog[:, q], p) for q in range(k)])

    std = np.empty(d)
    std[0] = hyper.lambda0 * hyper.lambda4
    for lag in range(1, p + 1):
        decay = float(lag) ** hyper.lambda3
        for j in range(m):
            std[layout.lag_col(lag, j)] = hyper.lambda0 * hyper.lambda1 / (s_endog[j] * decay)
    for q in range(k):
        std[layout.exog_col(q)] = hyper.lambda0 * hyper.lambda5 / s_exog[q]
    std = np.maximum(std, PRIOR_STD_FLOOR)

    B0 = np.zeros((d, m))
    for j in range(m):
        B0[layout.lag_col(1, j), j] = 1.0

    nu0 = float(m + 2)
    Psi0 = np.diag(s_endog**2) * (nu0 - m - 1)

    ybar = train.endog[:p].mean(axis=0)
    rows_z, rows_y = [], []
    if hyper.mu5 > 0:
        for j in range(m):
            z = np.zeros(d)
            for lag in range(1, p + 1):
                z[layout.lag_col(lag, j)] = hyper.mu5 * ybar[j]
            y = np.zeros(m)
            y[j] = hyper.mu5 * ybar[j]
            rows_z.append(z)
            rows_y.append(y)
    if hyper.mu6 > 0:
        z = np.zeros(d)
        z[0] = hyper.mu6
        for lag in range(1, p + 1):
            for v in range(m):
                z[layout.lag_col(lag, v)] = hyper.mu6 * ybar[v]
        rows_z.append(z)
        rows_y.append(hyper.mu6 * ybar)

    dummy_Z = np.array(rows_z) if rows_z else np.empty((0, d))
    dummy_Y = np.array(rows_y) if rows_y else np.empty((0, m))

    return MniwPrior(
        B0=B0,
        omega0_diag=std**2,
        Psi0=Psi0,
        nu0=nu0,
        dummy_Y=dummy_Y,
        dummy_Z=dummy_Z,
        layout=layout,
        hyper=hyper,
    )


# ---------------------------------------------------------------------------
# posterior update and samplers
# ---------------------------------------------------------------------------


def posterior_update(prior: MniwPrior, design: DesignMatrices | None = None) -> MniwPosterior:
    """Closed-form conjugate update, dummy observations appended to the data.

    With K0 = Omega0^{-1} (diagonal) and augmented blocks (Z*, Y*):

        OmegaBar^{-1} = K0 + Z*'Z*
        Bbar          = OmegaBar (K0 B0 + Z*'Y*)
        PsiBar        = Psi0 + (Y*-Z*Bbar)'(Y*-Z*Bbar) + (Bbar-B0)'K0(Bbar-B0)
        nuBar         = nu0 + rows(Z*)

    An empty design (and no dummies) returns the prior unchanged.
    """
    layout = prior.layout
    d, m = layout.d, layout.m
    if design is not None and design.layout != layout:
        raise DataError("design layout does not match prior layout")

    blocks_Z = [prior.dummy_Z] if prior.dummy_Z.shape[0] else []
    blocks_Y = [prior.dummy_Y] if prior.dummy_Y.shape[0] else []
    if design is not None and design.T_eff > 0:
        blocks_Z.insert(0, design.Z)
        blocks_Y.insert(0, design.Y)

    k0 = 1.0 / prior.omega0_diag
    if not blocks_Z:
        omega_bar = np.diag(prior.omega0_diag)
        return MniwPosterior(
            Bbar=prior.B0.copy(),
            OmegaBar=omega_bar,
            PsiBar=prior.Psi0.copy(),
            nuBar=float(prior.nu0),
            ZtZ=np.zeros((d, d)),
            ZtY=np.zeros((d, m)),
            layout=layout,
            omega_bar_chol=np.diag(np.sqrt(prior.omega0_diag)),
        )

    Z = np.vstack(blocks_Z)
    Y = np.vstack(blocks_Y)
    ZtZ = Z.T @ Z
    ZtY = Z.T @ Y

    precision = ZtZ + np.diag(k0)
    try:
        cho = cho_factor(precision, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - SPD by construction
        raise NumericalError(f"posterior precision not SPD: {exc}") from exc
    Bbar = cho_solve(cho, k0[:, None] * prior.B0 + ZtY)

    resid = Y - Z @ Bbar
    dB = Bbar - prior.B0
    PsiBar = prior.Psi0 + resid.T @ resid + dB.T @ (k0[:, None] * dB)
    PsiBar = 0.5 * (PsiBar + PsiBar.T)

    omega_bar = cho_solve(cho, np.eye(d))
    omega_bar = 0.5 * (omega_bar + omega_bar.T)
    try:
        omega_chol = np.linalg.cholesky(omega_bar)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"posterior covariance not SPD: {exc}") from exc

    return MniwPosterior(
        Bbar=Bbar,
        OmegaBar=omega_bar,
        PsiBar=PsiBar,
        nuBar=float(prior.nu0 + Z.shape[0]),
        ZtZ=ZtZ,
        ZtY=ZtY,
        layout=layout,
        omega_bar_chol=omega_chol,
    )


def companion_spectral_radius(phi: np.ndarray) -> float:
    """Spectral radius of the companion matrix of lag matrices ``phi`` (p, m, m)."""
    p, m, _ = phi.shape
    C = np.zeros((m * p, m * p))
    for lag in range(p):
        C[:m, lag * m:(lag + 1) * m] = phi[lag]
    if p > 1:
        C[m:, :-m] = np.eye(m * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(C))))


def is_stable(phi: np.ndarray) -> bool:
    """True iff the companion spectral radius is below ``1 - STAB_EPS``."""
    return bool(companion_spectral_radius(phi) < 1.0 - STAB_EPS)


def _draws_from_b(B_draws: np.ndarray, Sigma_draws: np.ndarray, layout: Layout) -> list:
    """Convert stacked (S,d,m) and (S,m,m) arrays into ParamDraw objects."""
    m, p = layout.m, layout.p
    S = B_draws.shape[0]
    # batched companion spectral radii
    C = np.zeros((S, m * p, m * p))
    for lag in range(1, p + 1):
        block = B_draws[:, 1 + (lag - 1) * m: 1 + lag * m, :]
        C[:, :m, (lag - 1) * m: lag * m] = np.transpose(block, (0, 2, 1))
    if p > 1:
        C[:, m:, :-m] = np.eye(m * (p - 1))
    radii = np.max(np.abs(np.linalg.eigvals(C)), axis=1)
    return [
        ParamDraw.from_b_matrix(B_draws[s], Sigma_draws[s], layout,
                                spectral_radius=float(radii[s]))
        for s in range(S)
    ]


def sample_direct(post: MniwPosterior, S: int, rng: np.random.Generator) -> list:
    """Exact i.i.d. posterior draws: Sigma ~ IW(PsiBar, nuBar), then
    B | Sigma ~ MN(Bbar, OmegaBar, Sigma)."""
    if S < 1:
        raise ConfigError("S must be >= 1")
    layout = post.layout
    d, m = layout.d, layout.m
    Sigma = invwishart.rvs(df=post.nuBar, scale=post.PsiBar, size=S, random_state=rng)
    Sigma = np.asarray(Sigma).reshape(S, m, m)
    L_sigma = np.linalg.cholesky(Sigma)
    L_omega = post.omega_bar_chol
    E = rng.standard_normal((S, d, m))
    B = post.Bbar[None, :, :] + L_omega[None, :, :] @ E @ np.transpose(L_sigma, (0, 2, 1))
    return _draws_from_b(B, Sigma, layout)


def gibbs_sample(prior: MniwPrior, design: DesignMatrices, S: int,
                 rng: np.random.Generator, burn: int = 500, thin: int = 1) -> list:
    """Two-block Gibbs sampler over (B, Sigma).

    The B-step draws from MN(Bbar, OmegaBar, Sigma_current); Bbar and OmegaBar
    do not depend on Sigma under this prior, so they are precomputed once.
    The Sigma-step draws from the exact full conditional

        IW(Psi0 + (Y*-Z*B)'(Y*-Z*B) + (B-B0)'K0(B-B0),  nu0 + T* + d)

    over the dummy-augmented sample of T* rows; the extra ``+ d`` degrees of
    freedom come from conditioning on B (d regressor rows per equation).
    Dropping the quadratic form and the ``+ d`` term biases the stationary
    distribution of Sigma upward, so both are kept.
    """
    if S < 1:
        raise ConfigError("S must be >= 1")
    if burn < 0 or thin < 1:
        raise ConfigError("burn must be >= 0 and thin >= 1")
    post = posterior_update(prior, design)
    layout = prior.layout
    d, m = layout.d, layout.m

    blocks_Z = [design.Z] if design.T_eff else []
    blocks_Y = [design.Y] if design.T_eff else []
    if prior.dummy_Z.shape[0]:
        blocks_Z.append(prior.dummy_Z)
        blocks_Y.append(prior.dummy_Y)
    Z = np.vstack(blocks_Z) if blocks_Z else np.empty((0, d))
    Y = np.vstack(blocks_Y) if blocks_Y else np.empty((0, m))
    T_star = Z.shape[0]
    k0 = 1.0 / prior.omega0_diag
    nu_cond = prior.nu0 + T_star + d
    L_omega = post.omega_bar_chol

    sigma = post.sigma_mean
    kept_B = np.empty((S, d, m))
    kept_Sigma = np.empty((S, m, m))
    kept = 0
    for it in range(burn + S * thin):
        L_sigma = np.linalg.cholesky(sigma)
        B = post.Bbar + L_omega @ rng.standard_normal((d, m)) @ L_sigma.T
        resid = Y - Z @ B
        dB = B - prior.B0
        scale = prior.Psi0 + resid.T @ resid + dB.T @ (k0[:, None] * dB)
        scale = 0.5 * (scale + scale.T)
        sigma = invwishart.rvs(df=nu_cond, scale=scale, random_state=rng)
        sigma = np.asarray(sigma).reshape(m, m)
        if it >= burn and (it - burn) % thin == 0:
            kept_B[kept] = B
            kept_Sigma[kept] = sigma
            kept += 1
    return _draws_from_b(kept_B, kept_Sigma, layout)
