"""Forecast-layer tests: recursions, simulation cubes, snap-centering, and
anchored shortest-mass intervals (with truncation)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvarx import (
    ConfigError,
    DataError,
    ExogPath,
    NumericalError,
    Panel,
    ParamDraw,
    StabilityWarning,
    SupportBounds,
    build_design,
    build_prior,
    credible_intervals,
    forecast_pipeline,
    point_forecast,
    posterior_mean_forecast,
    posterior_update,
    sample_direct,
    simulate_paths,
    snap_center,
    SzHyper,
)
from oracles import anchored_interval_bruteforce, month_span


def make_panel(endog, exog=None):
    endog = np.asarray(endog, dtype=np.float64)
    T, m = endog.shape
    if exog is None:
        exog = np.empty((T, 0))
    exog = np.asarray(exog, dtype=np.float64)
    return Panel(
        dates=month_span(T),
        endog=endog,
        exog=exog,
        endog_names=tuple(f"y{j}" for j in range(m)),
        exog_names=tuple(f"x{q}" for q in range(exog.shape[1])),
    )


def scalar_params(mu, phi1, gamma=None, sigma=1.0):
    k = 0 if gamma is None else 1
    g = np.empty((0, 1)) if gamma is None else np.array([[gamma]])
    return ParamDraw(
        mu=np.array([mu]),
        phi=np.array([[[phi1]]]),
        gamma=g,
        sigma=np.array([[sigma]]),
        stable=abs(phi1) < 1.0,
        spectral_radius=abs(phi1),
    )


class TestPointForecast:
    def test_fixed_point_recursion(self):
        # y* = 1 + 0.5 y* has fixed point 2; starting there stays there
        params = scalar_params(1.0, 0.5)
        panel = make_panel([[0.0], [2.0]])
        path = point_forecast(params, panel, None, 6)
        np.testing.assert_allclose(path, np.full((6, 1), 2.0))

    def test_zero_dynamics(self):
        params = scalar_params(0.0, 0.0)
        panel = make_panel([[7.0]])
        np.testing.assert_array_equal(point_forecast(params, panel, None, 3),
                                      np.zeros((3, 1)))

    def test_exog_passthrough(self):
        params = scalar_params(0.0, 0.0, gamma=1.0)
        panel = make_panel([[0.0]], exog=[[0.0]])
        x = np.array([[1.5], [-2.0], [0.25]])
        path = point_forecast(params, panel, ExogPath(values=x), 3)
        np.testing.assert_allclose(path, x)

    def test_two_lag_hand_recursion(self):
        params = ParamDraw(
            mu=np.array([0.1]),
            phi=np.array([[[0.5]], [[0.2]]]),
            gamma=np.empty((0, 1)),
            sigma=np.array([[1.0]]),
            stable=True,
            spectral_radius=0.763,
        )
        panel = make_panel([[1.0], [2.0]])
        path = point_forecast(params, panel, None, 2)
        y1 = 0.1 + 0.5 * 2.0 + 0.2 * 1.0
        y2 = 0.1 + 0.5 * y1 + 0.2 * 2.0
        np.testing.assert_allclose(path[:, 0], [y1, y2])

    def test_unstable_draw_warns(self):
        params = scalar_params(0.0, 1.05)
        panel = make_panel([[1.0]])
        with pytest.warns(StabilityWarning):
            point_forecast(params, panel, None, 2)

    def test_missing_exog_path_raises(self):
        params = scalar_params(0.0, 0.5, gamma=1.0)
        panel = make_panel([[1.0]], exog=[[0.0]])
        with pytest.raises(DataError):
            point_forecast(params, panel, None, 2)


class TestPosteriorMeanForecast:
    def test_all_deterministic_draws_average_exactly(self):
        # zero covariance => each stable draw contributes its deterministic path
        panel = make_panel([[2.0]])
        a = scalar_params(1.0, 0.5, sigma=0.0)
        b = scalar_params(0.0, 0.0, sigma=0.0)
        a = ParamDraw(a.mu, a.phi, a.gamma, np.zeros((1, 1)), True, 0.5)
        b = ParamDraw(b.mu, b.phi, b.gamma, np.zeros((1, 1)), True, 0.0)
        rng = np.random.default_rng(0)
        path = posterior_mean_forecast([a, b], panel, None, 3, rng)
        np.testing.assert_allclose(path[:, 0], np.array([2.0, 2.0, 2.0]) / 2)

    def test_unstable_draws_filtered(self):
        panel = make_panel([[2.0]])
        stable = ParamDraw(np.array([1.0]), np.array([[[0.5]]]),
                           np.empty((0, 1)), np.zeros((1, 1)), True, 0.5)
        wild = ParamDraw(np.array([0.0]), np.array([[[5.0]]]),
                         np.empty((0, 1)), np.zeros((1, 1)), False, 5.0)
        rng = np.random.default_rng(0)
        path = posterior_mean_forecast([stable, stable, wild], panel, None, 2, rng)
        np.testing.assert_allclose(path[:, 0], [2.0, 2.0])

    def test_aborts_when_mostly_explosive(self):
        panel = make_panel([[2.0]])
        wild = ParamDraw(np.array([0.0]), np.array([[[5.0]]]),
                         np.empty((0, 1)), np.zeros((1, 1)), False, 5.0)
        stable = ParamDraw(np.array([1.0]), np.array([[[0.5]]]),
                           np.empty((0, 1)), np.zeros((1, 1)), True, 0.5)
        with pytest.raises(NumericalError):
            posterior_mean_forecast([wild, wild, wild, stable], panel, None, 2,
                                    np.random.default_rng(0))


class TestSimulatePaths:
    def test_zero_sigma_reproduces_deterministic(self):
        params = scalar_params(1.0, 0.5)
        panel = make_panel([[2.0]])
        cube = simulate_paths(params, np.zeros((1, 1)), panel, None, 4, 8,
                              np.random.default_rng(3))
        det = point_forecast(params, panel, None, 4)
        for s in range(8):
            np.testing.assert_allclose(cube[s], det)

    def test_seeded_determinism(self):
        params = scalar_params(0.2, 0.6, sigma=0.5)
        panel = make_panel([[1.0]])
        a = simulate_paths(params, params.sigma, panel, None, 5, 50,
                           np.random.default_rng(42))
        b = simulate_paths(params, params.sigma, panel, None, 5, 50,
                           np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_one_step_moments(self):
        # with phi=0 each horizon is mu + eps, so columns are iid N(mu, sigma)
        params = scalar_params(3.0, 0.0, sigma=4.0)
        panel = make_panel([[0.0]])
        cube = simulate_paths(params, params.sigma, panel, None, 2, 40000,
                              np.random.default_rng(7))
        assert cube[:, 0, 0].mean() == pytest.approx(3.0, abs=0.05)
        assert cube[:, 0, 0].std() == pytest.approx(2.0, rel=0.03)

    def test_shock_propagation_matches_manual(self):
        params = scalar_params(0.0, 0.5, sigma=1.0)
        panel = make_panel([[0.0]])
        rng = np.random.default_rng(11)
        cube = simulate_paths(params, params.sigma, panel, None, 3, 6, rng)
        eps = np.random.default_rng(11).standard_normal((6, 3, 1)) @ np.array([[1.0]]).T
        manual = np.empty_like(cube)
        manual[:, 0, 0] = eps[:, 0, 0]
        manual[:, 1, 0] = 0.5 * manual[:, 0, 0] + eps[:, 1, 0]
        manual[:, 2, 0] = 0.5 * manual[:, 1, 0] + eps[:, 2, 0]
        np.testing.assert_allclose(cube, manual)


class TestSnapCenter:
    def test_pure_translation(self):
        rng = np.random.default_rng(0)
        cube = rng.standard_normal((20, 4, 2))
        det = rng.standard_normal((4, 2))
        tuned = det + 3.0
        snapped = snap_center(cube, tuned, det)
        np.testing.assert_allclose(snapped, cube + 3.0)
        np.testing.assert_allclose(snapped.std(axis=0), cube.std(axis=0))

    def test_shape_guard(self):
        with pytest.raises(DataError):
            snap_center(np.zeros((5, 3, 2)), np.zeros((3, 1)), np.zeros((3, 1)))
        with pytest.raises(DataError):
            snap_center(np.zeros((5, 3, 2)), np.zeros((3, 2)), np.zeros((2, 2)))


def cube_from_column(values):
    v = np.asarray(values, dtype=np.float64)
    return v.reshape(-1, 1, 1)


class TestCredibleIntervals:
    def test_degenerate_all_equal(self):
        cube = cube_from_column([5.0] * 40)
        lo, hi, rho, geff = credible_intervals(
            cube, SupportBounds.unbounded(1), 0.5, np.array([[5.0]]))
        assert lo[0, 0] == hi[0, 0] == 5.0
        assert rho[0, 0] == 1.0
        assert geff[0, 0] == 0.5

    def test_uniform_grid_window(self):
        cube = cube_from_column(np.arange(1.0, 101.0))
        pf = np.array([[50.5]])
        lo, hi, rho, geff = credible_intervals(
            cube, SupportBounds.unbounded(1), 0.5, pf)
        assert hi[0, 0] - lo[0, 0] == pytest.approx(49.0)
        assert lo[0, 0] <= 50.5 <= hi[0, 0]
        assert rho[0, 0] == 1.0 and geff[0, 0] == 0.5

    def test_truncation_example(self):
        cube = cube_from_column([-5.0, 10.0, 20.0, 30.0])
        bounds = SupportBounds(lower=np.array([0.0]), upper=np.array([100.0]))
        lo, hi, rho, geff = credible_intervals(cube, bounds, 0.5,
                                               np.array([[20.0]]))
        assert rho[0, 0] == pytest.approx(0.75)
        assert geff[0, 0] == pytest.approx(0.5 * 0.75)
        assert lo[0, 0] in (10.0, 20.0) and hi[0, 0] in (20.0, 30.0)
        assert lo[0, 0] <= 20.0 <= hi[0, 0]

    def test_no_admissible_draws_raises(self):
        cube = cube_from_column([-5.0, -1.0, -2.0])
        bounds = SupportBounds(lower=np.array([0.0]), upper=np.array([100.0]))
        with pytest.raises(NumericalError):
            credible_intervals(cube, bounds, 0.5, np.array([[0.5]]))

    def test_pf_outside_draw_range_still_anchored(self):
        cube = cube_from_column([1.0, 2.0, 3.0, 4.0])
        lo, hi, _, _ = credible_intervals(
            cube, SupportBounds.unbounded(1), 0.5, np.array([[10.0]]))
        assert lo[0, 0] <= 10.0 <= hi[0, 0]
        assert hi[0, 0] == 10.0  # window stretched up to the point forecast

    def test_gamma_validation(self):
        cube = cube_from_column([1.0, 2.0])
        for g in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ConfigError):
                credible_intervals(cube, SupportBounds.unbounded(1), g,
                                   np.array([[1.0]]))

    def test_gamma_widening(self):
        rng = np.random.default_rng(5)
        cube = rng.standard_normal((400, 1, 1))
        pf = np.array([[0.0]])
        lo1, hi1, _, _ = credible_intervals(cube, SupportBounds.unbounded(1),
                                            0.5, pf)
        lo2, hi2, _, _ = credible_intervals(cube, SupportBounds.unbounded(1),
                                            0.9, pf)
        assert hi2[0, 0] - lo2[0, 0] > hi1[0, 0] - lo1[0, 0]

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(-50, 50), min_size=3, max_size=60),
        st.floats(-60, 60),
        st.floats(0.05, 0.95),
    )
    def test_matches_bruteforce_enumeration(self, values, pf, gamma):
        cube = cube_from_column(values)
        lo, hi, _, _ = credible_intervals(cube, SupportBounds.unbounded(1),
                                          gamma, np.array([[pf]]))
        width, optimal = anchored_interval_bruteforce(
            np.asarray(values), pf, gamma)
        assert hi[0, 0] - lo[0, 0] == pytest.approx(width, abs=1e-12)
        assert (lo[0, 0], hi[0, 0]) in optimal
        assert lo[0, 0] <= pf <= hi[0, 0]

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-20, 20), st.integers(0, 2**31))
    def test_translation_equivariance(self, shift, seed):
        rng = np.random.default_rng(seed)
        base = rng.standard_normal(30)
        pf = float(np.median(base))
        lo, hi, _, _ = credible_intervals(
            cube_from_column(base), SupportBounds.unbounded(1), 0.6,
            np.array([[pf]]))
        lo2, hi2, _, _ = credible_intervals(
            cube_from_column(base + shift), SupportBounds.unbounded(1), 0.6,
            np.array([[pf + shift]]))
        assert lo2[0, 0] == pytest.approx(lo[0, 0] + shift, abs=1e-9)
        assert hi2[0, 0] == pytest.approx(hi[0, 0] + shift, abs=1e-9)


class TestSupportBounds:
    def test_name_heuristics(self):
        b = SupportBounds.from_names(
            ("unemployment_rate", "oil_price", "sentiment"))
        np.testing.assert_array_equal(b.lower, [0.0, 0.0, -np.inf])
        np.testing.assert_array_equal(b.upper, [100.0, np.inf, np.inf])

    def test_mapping_overrides(self):
        b = SupportBounds.from_mapping({"a": [-1, 1], "b": [None, 5]},
                                       ("a", "b"))
        np.testing.assert_array_equal(b.lower, [-1.0, -np.inf])
        np.testing.assert_array_equal(b.upper, [1.0, 5.0])

    def test_unknown_name_rejected(self):
        with pytest.raises(ConfigError):
            SupportBounds.from_mapping({"zzz": [0, 1]}, ("a",))

    def test_invalid_ordering(self):
        with pytest.raises(ConfigError):
            SupportBounds(lower=np.array([1.0]), upper=np.array([1.0]))


@pytest.fixture(scope="module")
def fitted():
    rng = np.random.default_rng(17)
    T, m = 90, 2
    y = np.zeros((T, m))
    A = np.array([[0.5, 0.1], [0.0, 0.4]])
    for t in range(1, T):
        y[t] = 0.3 + A @ y[t - 1] + 0.3 * rng.standard_normal(m)
    panel = make_panel(y)
    hyper = SzHyper(p=1, lambda0=0.4, lambda1=0.1, lambda3=1.0,
                    lambda4=0.5, lambda5=1.0, mu5=0.0, mu6=0.0)
    prior = build_prior(panel, hyper)
    post = posterior_update(prior, build_design(panel, 1))
    return panel, post


class TestPipeline:
    def test_deterministic_point_has_zero_snap_delta(self, fitted):
        panel, post = fitted
        dist = forecast_pipeline(panel, post, None, 6,
                                 np.random.default_rng(1), S=200)
        np.testing.assert_array_equal(dist.snap_delta, np.zeros((6, 2)))
        assert dist.point.shape == (6, 2)
        assert dist.draws.shape == (200, 6, 2)
        assert np.all(dist.lower <= dist.point + 1e-12)
        assert np.all(dist.point <= dist.upper + 1e-12)
        np.testing.assert_array_equal(dist.rho, np.ones((6, 2)))
        np.testing.assert_array_equal(dist.gamma_eff, np.full((6, 2), 0.5))

    def test_draw_mean_point_snaps_cube(self, fitted):
        panel, post = fitted
        dist = forecast_pipeline(panel, post, None, 4,
                                 np.random.default_rng(2), S=100,
                                 point_method="draw_mean", n_param_draws=200)
        assert np.any(dist.snap_delta != 0.0)
        # cube mean tracks the tuned point after snapping
        np.testing.assert_allclose(dist.draws.mean(axis=0) - dist.point,
                                   simulate_residual_bias(dist), atol=1e-8)

    def test_reproducible(self, fitted):
        panel, post = fitted
        a = forecast_pipeline(panel, post, None, 5, np.random.default_rng(9),
                              S=150)
        b = forecast_pipeline(panel, post, None, 5, np.random.default_rng(9),
                              S=150)
        np.testing.assert_array_equal(a.draws, b.draws)
        np.testing.assert_array_equal(a.lower, b.lower)
        np.testing.assert_array_equal(a.upper, b.upper)

    def test_unknown_point_method(self, fitted):
        panel, post = fitted
        with pytest.raises(ConfigError):
            forecast_pipeline(panel, post, None, 3, np.random.default_rng(0),
                              point_method="median")


def simulate_residual_bias(dist):
    """The snap shifts the cube by (tuned - deterministic); afterwards the
    cube mean differs from the tuned point by exactly the original simulation
    mean minus the deterministic path."""
    det = dist.point - dist.snap_delta
    return dist.draws.mean(axis=0) - dist.snap_delta - det
