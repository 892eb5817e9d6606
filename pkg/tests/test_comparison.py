"""Comparison-machinery tests: extremal scores, Murphy differential curves,
HAC variances, multivariate Wald tests, and rank-based multiple comparison."""

import numpy as np
import pytest
from scipy.stats import chi2, t as student_t

from bvarx import (
    ConfigError,
    DataError,
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
from oracles import (
    DEMSAR_Q05,
    chi2_sf_reference,
    extremal_score_reference,
    nw_var_reference,
)


class TestExtremalScore:
    def test_three_cases(self):
        # outcome below threshold, forecast above: (alpha-1)(y-theta)
        assert extremal_score(2.0, 0.0, 1.0, 0.5) == pytest.approx(
            (0.5 - 1.0) * (0.0 - 1.0))
        # forecast below threshold, outcome above: alpha (y-theta)
        assert extremal_score(0.0, 2.0, 1.0, 0.5) == pytest.approx(
            0.5 * (2.0 - 1.0))
        # both on the same side: 0
        assert extremal_score(2.0, 3.0, 1.0, 0.5) == 0.0
        assert extremal_score(-1.0, -2.0, 1.0, 0.5) == 0.0

    def test_boundary_conventions(self):
        # theta equal to the forecast counts (x <= theta), equal to the upper
        # endpoint does not (theta < max side is strict)
        assert extremal_score(1.0, 2.0, 1.0, 0.5) == pytest.approx(0.5)
        assert extremal_score(1.0, 2.0, 2.0, 0.5) == 0.0
        assert extremal_score(2.0, 1.0, 1.5, 0.5) == pytest.approx(0.25)
        assert extremal_score(2.0, 1.0, 2.0, 0.5) == 0.0

    def test_matches_reference_on_grid(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x, y, th = rng.uniform(-3, 3, size=3)
            alpha = rng.uniform(0.05, 0.95)
            assert extremal_score(x, y, th, alpha) == pytest.approx(
                extremal_score_reference(x, y, th, alpha), abs=1e-15)

    def test_alpha_validated(self):
        with pytest.raises(ConfigError):
            extremal_score(1.0, 2.0, 0.5, 1.0)


class TestNeweyWest:
    def test_lag_zero_is_variance_of_mean(self):
        rng = np.random.default_rng(1)
        d = rng.standard_normal(200)
        expected = d.var() / d.size  # ddof=0
        assert newey_west_var(d, 0) == pytest.approx(expected, rel=1e-12)

    def test_constant_series_is_zero(self):
        assert newey_west_var(np.full(50, 3.0), 4) == 0.0

    def test_matches_double_loop_reference(self):
        rng = np.random.default_rng(2)
        d = rng.standard_normal(80).cumsum() * 0.1
        for lag in (0, 1, 3, 7):
            assert newey_west_var(d, lag) == pytest.approx(
                nw_var_reference(d, lag), rel=1e-12)

    def test_lag_bounds(self):
        with pytest.raises(ConfigError):
            newey_west_var(np.arange(5.0), 5)

    def test_auto_bandwidth(self):
        assert auto_bandwidth(100) == 4
        assert auto_bandwidth(50) == 3
        assert auto_bandwidth(400) == 5
        with pytest.raises(DataError):
            auto_bandwidth(1)


class TestParzen:
    def test_known_values(self):
        assert parzen_weight(0.0) == 1.0
        assert parzen_weight(0.25) == pytest.approx(1 - 6 * 0.0625 + 6 * 0.015625)
        assert parzen_weight(0.5) == pytest.approx(0.25)
        assert parzen_weight(0.75) == pytest.approx(2 * 0.25**3)
        assert parzen_weight(1.0) == 0.0
        assert parzen_weight(1.5) == 0.0

    def test_continuity_at_half(self):
        eps = 1e-9
        assert parzen_weight(0.5 - eps) == pytest.approx(
            parzen_weight(0.5 + eps), abs=1e-7)


class TestMurphy:
    def test_identical_forecasts_flat_zero(self):
        rng = np.random.default_rng(3)
        f = rng.standard_normal(100)
        y = rng.standard_normal(100)
        curve = murphy_diff(f, f.copy(), y, default_theta_grid(y))
        np.testing.assert_array_equal(curve.diff, 0.0)
        np.testing.assert_array_equal(curve.band_lo, 0.0)
        np.testing.assert_array_equal(curve.band_hi, 0.0)

    def test_antisymmetry(self):
        rng = np.random.default_rng(4)
        y = rng.standard_normal(120)
        fA, fB = y + 0.2 * rng.standard_normal(120), y - 0.5
        grid = default_theta_grid(y, 31)
        ab = murphy_diff(fA, fB, y, grid)
        ba = murphy_diff(fB, fA, y, grid)
        np.testing.assert_allclose(ab.diff, -ba.diff, atol=1e-15)
        np.testing.assert_allclose(ab.band_lo, -ba.band_hi, atol=1e-15)

    def test_default_lag_at_n100(self):
        rng = np.random.default_rng(5)
        y = rng.standard_normal(100)
        curve = murphy_diff(y + 0.1, y - 0.1, y, [0.0])
        assert curve.lag == 4

    def test_integrated_diff_tracks_mse_ordering(self):
        # integrating the alpha=1/2 extremal score over theta recovers half
        # the squared-error ordering, so the sign of the integrated curve
        # must agree with the sign of MSE(A) - MSE(B)
        rng = np.random.default_rng(6)
        hits = 0
        for _ in range(50):
            y = rng.standard_normal(60)
            fA = y + rng.uniform(0.05, 0.6) * rng.standard_normal(60)
            fB = y + rng.uniform(0.05, 0.6) * rng.standard_normal(60)
            lo = min(y.min(), fA.min(), fB.min()) - 0.5
            hi = max(y.max(), fA.max(), fB.max()) + 0.5
            grid = np.linspace(lo, hi, 801)
            curve = murphy_diff(fA, fB, y, grid)
            integral = np.trapezoid(curve.diff, grid)
            mse_gap = np.mean((fA - y) ** 2) - np.mean((fB - y) ** 2)
            if np.sign(integral) == np.sign(mse_gap):
                hits += 1
        assert hits == 50

    def test_band_confidence_monotone(self):
        rng = np.random.default_rng(7)
        y = rng.standard_normal(80)
        fA, fB = y + 0.3, y - 0.4
        narrow = murphy_diff(fA, fB, y, [0.0], conf=0.50)
        wide = murphy_diff(fA, fB, y, [0.0], conf=0.99)
        assert (wide.band_hi[0] - wide.band_lo[0]) > (
            narrow.band_hi[0] - narrow.band_lo[0])

    def test_band_bracket_validation(self):
        rng = np.random.default_rng(8)
        y = rng.standard_normal(50)
        curve = murphy_diff(y + 0.2, y - 0.2, y, default_theta_grid(y, 21))
        assert np.all(curve.band_lo <= curve.diff + 1e-15)
        assert np.all(curve.diff <= curve.band_hi + 1e-15)


class TestAbsoluteScaledError:
    def test_hand_case(self):
        ins = np.array([0.0, 2.0, 4.0])  # mean |step| = 2
        np.testing.assert_allclose(
            absolute_scaled_error(np.array([1.0, -4.0]), ins), [0.5, 2.0])

    def test_degenerate_scale(self):
        with pytest.raises(DataError):
            absolute_scaled_error(np.array([1.0]), np.array([5.0, 5.0, 5.0]))


class TestDieboldMariano:
    def test_two_models_q1_equals_t_squared(self):
        rng = np.random.default_rng(9)
        L = np.column_stack([rng.chisquare(3, 150), rng.chisquare(3, 150)])
        res = dm_multivariate(L, q=1)
        d = L[:, 0] - L[:, 1]
        T = d.size
        tstat = d.mean() / np.sqrt(d.var() / T)
        c = (T + 1 - 2 + 0) / T
        assert res.statistic == pytest.approx(c * tstat**2, rel=1e-10)
        assert res.dof == 1

    def test_identical_losses_degenerate(self):
        L = np.tile(np.random.default_rng(10).chisquare(2, 60)[:, None], (1, 3))
        res = dm_multivariate(L, q=2)
        assert res.degenerate
        assert res.p_value == 1.0
        assert res.statistic == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        L = rng.chisquare(4, (100, 3))
        a = dm_multivariate(L, q=2)
        b = dm_multivariate(1e-10 * L, q=2)
        assert b.statistic == pytest.approx(a.statistic, rel=1e-6)

    def test_vs_first_pairing(self):
        rng = np.random.default_rng(12)
        L = rng.chisquare(4, (80, 3))
        adj = dm_multivariate(L, pairing="adjacent")
        vs1 = dm_multivariate(L, pairing="vs_first")
        assert adj.dof == vs1.dof == 2
        # the two pairings span the same contrast space -> same statistic
        assert vs1.statistic == pytest.approx(adj.statistic, rel=1e-8)

    def test_collinear_differentials_use_pinv(self):
        rng = np.random.default_rng(13)
        x = rng.standard_normal(90) + 0.1
        # columns x and 2x are exactly collinear (doubling is exact in binary),
        # so the covariance is singular but nonzero -> pseudo-inverse fallback
        res = gw_unconditional(np.column_stack([x, 2.0 * x]))
        assert res.pseudo_inverse
        assert 0.0 <= res.p_value <= 1.0

    def test_constant_differentials_are_degenerate(self):
        base = np.random.default_rng(30).chisquare(3, 60)
        # a deterministic gap has zero long-run variance: flagged, p = 1
        res = dm_multivariate(np.column_stack([base, base + 1.0]), q=1)
        assert res.degenerate and res.p_value == 1.0

    def test_shape_validation(self):
        with pytest.raises(DataError):
            dm_multivariate(np.zeros((5, 1)))
        with pytest.raises(ConfigError):
            dm_multivariate(np.random.default_rng(0).random((20, 2)), q=0)
        with pytest.raises(ConfigError):
            dm_multivariate(np.random.default_rng(0).random((20, 2)),
                            pairing="cyclic")

    def test_obvious_difference_detected(self):
        rng = np.random.default_rng(14)
        good = rng.chisquare(1, 200)
        bad = good + 3.0 + 0.2 * rng.standard_normal(200)
        res = dm_multivariate(np.column_stack([good, bad]))
        assert res.p_value < 1e-6


class TestGiacominiWhite:
    def test_default_bandwidth(self):
        rng = np.random.default_rng(15)
        res = gw_unconditional(rng.standard_normal(125))
        assert res.kernel == "parzen"
        assert res.correction == "bandwidth=5"
        assert res.dof == 1

    def test_zero_differentials_degenerate(self):
        res = gw_unconditional(np.zeros(50))
        assert res.degenerate and res.p_value == 1.0

    def test_obvious_difference_detected(self):
        rng = np.random.default_rng(16)
        d = 2.0 + 0.3 * rng.standard_normal(150)
        assert gw_unconditional(d).p_value < 1e-8

    def test_bandwidth_zero_matches_plain_wald(self):
        rng = np.random.default_rng(17)
        d = rng.standard_normal(100)
        res = gw_unconditional(d, bandwidth=0)
        stat = 100 * d.mean() ** 2 / d.var()
        assert res.statistic == pytest.approx(stat, rel=1e-10)


class TestChiSquareReference:
    def test_scipy_against_hand_reference(self):
        for k in (1, 2, 3, 5, 8, 12):
            for x in (0.5, 2.706, 3.841, 10.0):
                assert chi2.sf(x, k) == pytest.approx(
                    chi2_sf_reference(x, k), rel=1e-10)


class TestMcb:
    def test_two_algorithms_clear_ranks(self):
        scores = np.array([[1.0, 2.0], [1.0, 3.0], [0.5, 0.9]])
        res = mcb(scores)
        np.testing.assert_array_equal(res.mean_ranks, [1.0, 2.0])
        assert res.best == 0

    def test_full_tie_uniform_ranks(self):
        scores = np.ones((6, 4))
        res = mcb(scores)
        np.testing.assert_array_equal(res.mean_ranks, np.full(4, 2.5))
        assert not res.significantly_different(0, 3)

    def test_average_rank_ties(self):
        scores = np.array([[1.0, 1.0, 2.0]])
        scores = np.vstack([scores, scores])
        res = mcb(scores)
        np.testing.assert_allclose(res.mean_ranks, [1.5, 1.5, 3.0])

    def test_critical_distance_hand_arithmetic(self):
        q15 = nemenyi_q(15, 0.05)
        rng = np.random.default_rng(18)
        for D, factor in ((10, 2.0), (14, np.sqrt(240.0 / 84.0)),
                          (70, np.sqrt(240.0 / 420.0))):
            res = mcb(rng.random((D, 15)))
            assert res.cd == pytest.approx(q15 * factor, rel=1e-12)

    def test_q_table_matches_published_constants(self):
        # the published table is truncated to three decimals
        for A, q in DEMSAR_Q05.items():
            assert nemenyi_q(A, 0.05) == pytest.approx(q, abs=1e-3)

    def test_q_table_bounds(self):
        with pytest.raises(ConfigError):
            nemenyi_q(21, 0.05)
        with pytest.raises(ConfigError):
            nemenyi_q(5, 0.025)

    def test_interval_layout(self):
        rng = np.random.default_rng(19)
        res = mcb(rng.random((12, 5)), alpha=0.10, names=("a", "b", "c", "d", "e"))
        np.testing.assert_allclose(res.intervals[:, 1] - res.intervals[:, 0],
                                   res.cd)
        np.testing.assert_allclose(res.intervals.mean(axis=1), res.mean_ranks)
        assert res.names == ("a", "b", "c", "d", "e")

    def test_significantly_different_symmetry(self):
        # columns 2 and 3 alternate ranks (mean 2.5 each); column 1 always wins
        D = 30
        col2 = np.where(np.arange(D) % 2 == 0, 1.0, 2.0)
        col3 = np.where(np.arange(D) % 2 == 0, 2.0, 1.0)
        scores = np.column_stack([np.zeros(D), col2, col3])
        res = mcb(scores)
        assert res.significantly_different(0, 1)
        assert res.significantly_different(1, 0)
        assert not res.significantly_different(1, 2)

    def test_input_validation(self):
        with pytest.raises(DataError):
            mcb(np.ones((1, 3)))
        with pytest.raises(DataError):
            mcb(np.ones(5))


class TestSizeSanity:
    """Cheap null-rejection checks (the full Monte Carlo lives in the
    acceptance suite)."""

    def test_dm_q1_theoretical_size(self):
        # at q=1 the statistic is c * t^2 against chi2(1): compute the exact
        # rejection rate of the t distribution at the implied cutoff
        T = 100
        c = (T + 1 - 2) / T
        cutoff = chi2.ppf(0.90, 1) / c
        size = 2 * student_t.sf(np.sqrt(cutoff), df=T - 1)
        assert 0.08 <= size <= 0.12

    def test_gw_small_null_run(self):
        rng = np.random.default_rng(20)
        rejections = sum(
            gw_unconditional(rng.standard_normal(200)).p_value < 0.10
            for _ in range(400)
        )
        assert 0.06 <= rejections / 400 <= 0.14
