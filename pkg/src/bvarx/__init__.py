"""bvarx: Bayesian VAR-with-exogenous-regressors forecasting toolkit.

Conjugate MN-IW estimation with shrinkage priors and dummy observations,
stability-filtered simulation forecasting with support-truncated anchored
credible intervals, expanding-window hyper-parameter tuning, forecast
accuracy metrics and comparison tests, regime-switching local projections,
and Morlet wavelet coherence analysis.
"""

from .comparison import (
    McbResult,
    MurphyCurve,
    WaldTestResult,
    absolute_scaled_error,
    auto_bandwidth,
    default_theta_grid,
    dm_multivariate,
    extremal_score,
    gw_unconditional,
    mcb,
    murphy_diff,
    nemenyi_q,
    newey_west_var,
    parzen_weight,
)
from .errors import (
    BvarxError,
    ConfigError,
    DataError,
    NumericalError,
    UnimplementedFamilyError,
)
from .forecast import (
    ForecastDistribution,
    StabilityWarning,
    SupportBounds,
    credible_intervals,
    forecast_pipeline,
    point_forecast,
    posterior_mean_forecast,
    simulate_paths,
    snap_center,
)
from .local_projections import (
    REGIMES,
    IrfProfile,
    IrfSurface,
    LpConfig,
    LpFit,
    RegimeCollapseWarning,
    extract_irf,
    fit_nl_lp,
    irf_surface,
    logistic_transition,
    select_lags_bic,
    standardize_switch,
)
from .metrics import MetricWarning, mase, mdape, metric_table, rmse, smape, theil_u1
from .model import (
    DesignMatrices,
    Layout,
    MniwPosterior,
    MniwPrior,
    ParamDraw,
    SzHyper,
    ar_residual_scale,
    build_design,
    build_prior,
    companion_spectral_radius,
    gibbs_sample,
    is_stable,
    posterior_update,
    sample_direct,
)
from .panel import (
    ExogPath,
    Panel,
    SplitSpec,
    future_exog,
    load_panel,
    panel_from_csv,
    panel_to_csv,
    split,
    transform,
)
from .tuning import (
    DEFAULT_GRID,
    GridSpec,
    TuneResult,
    evaluate_candidate,
    feasible_origins,
    grid_search,
    mrmse,
)
from .wavelet import (
    CoherenceMap,
    CwtPlan,
    ar1_surrogates,
    by_pooled_qvalues,
    coherence,
    coi,
    dyadic_scales,
    fdr_bh_per_scale,
    fourier_period,
    morlet_cwt,
    scale_for_period,
    significance,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
