import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spintrack import estimation as est, rng, signals as sig, trajectory as tj
from spintrack.errors import (
    ConfigError,
    DomainError,
    NumericalError,
    UnsupportedModelError,
)

PAPER = dict(kappa_sq=3000.0, gamma_tot=345.0, v0=0.60, eta=1.0)
V_P = 0.21139821494387054
V_R = 0.32639821494387056
V_PR = 0.12830133516208533


class TestSteadyForms:
    def test_paper_values(self):
        assert est.steady_variance_prediction(**PAPER) == pytest.approx(V_P, abs=1e-9)
        assert est.steady_variance_retrodiction(**PAPER) == pytest.approx(V_R, abs=1e-9)
        assert est.combine_pqs(V_P, V_R) == pytest.approx(V_PR, abs=1e-9)

    def test_rate_units_cancel(self):
        ms_units = est.steady_variance_prediction(3.0, 0.345, 0.60, 1.0)
        assert ms_units == pytest.approx(V_P, rel=1e-12)

    def test_difference_identity(self):
        # V_R - V_P = Gamma / (kappa^2 eta) exactly
        v_p = est.steady_variance_prediction(**PAPER)
        v_r = est.steady_variance_retrodiction(**PAPER)
        assert v_r - v_p == pytest.approx(345.0 / 3000.0, rel=1e-12)

    def test_measurement_off_limits(self):
        assert est.steady_variance_prediction(0.0, 345.0, 0.60, 1.0) == 0.60
        assert math.isinf(est.steady_variance_retrodiction(0.0, 345.0, 0.60, 1.0))

    def test_strong_measurement_limit(self):
        assert est.steady_variance_retrodiction(1e12, 345.0, 0.60, 1.0) < 1e-3

    @given(
        ksq=st.floats(1.0, 1e5),
        gamma=st.floats(1.0, 1e4),
        v0=st.floats(0.5, 2.0),
        eta=st.floats(0.05, 1.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_prediction_monotonicity(self, ksq, gamma, v0, eta):
        v = est.steady_variance_prediction(ksq, gamma, v0, eta)
        assert 0.0 < v <= v0 + 1e-12
        stronger = est.steady_variance_prediction(ksq * 2.0, gamma, v0, eta)
        assert stronger <= v + 1e-15
        noisier = est.steady_variance_prediction(ksq, gamma, v0 * 1.5, eta)
        assert noisier >= v - 1e-15


class TestBackactionForm:
    @pytest.mark.parametrize("ksq,gamma", [(3000.0, 345.0), (1000.0, 200.0), (500.0, 800.0)])
    def test_equal_strength_benchmark(self, ksq, gamma):
        v = est.steady_variance_backaction(ksq, ksq, gamma, 0.5, 1.0)
        assert abs(v - 0.5) < 1e-12

    def test_reduces_to_prediction(self):
        v = est.steady_variance_backaction(3000.0, 0.0, 345.0, 0.60, 1.0)
        assert v == pytest.approx(V_P, rel=1e-12)

    def test_measurement_off_gives_heated_variance(self):
        v = est.steady_variance_backaction(0.0, 2000.0, 345.0, 0.60, 1.0)
        assert v == pytest.approx(0.60 + 2000.0 / (4 * 345.0), rel=1e-12)

    def test_monotone_in_backaction(self):
        grid = np.linspace(0.0, 5000.0, 21)
        values = [est.steady_variance_backaction(3000.0, k, 345.0, 0.60, 1.0) for k in grid]
        assert np.all(np.diff(values) > 0)


class TestCombine:
    def test_symmetry_and_floor(self):
        assert est.combine_pqs(0.3, 0.7) == est.combine_pqs(0.7, 0.3)
        assert est.combine_pqs(0.3, math.inf) == 0.3
        assert est.combine_pqs(0.3, 0.7) <= min(0.3, 0.7)

    @given(a=st.floats(1e-6, 1e3), b=st.floats(1e-6, 1e3))
    @settings(max_examples=60, deadline=None)
    def test_always_below_both(self, a, b):
        c = est.combine_pqs(a, b)
        assert c <= min(a, b) + 1e-12
        assert c > 0

    def test_domain(self):
        with pytest.raises(DomainError):
            est.combine_pqs(-0.1, 0.3)


class TestVarianceOde:
    def test_fixed_point_without_measurement(self):
        cfg = tj.TrajectoryConfig(tau=0.01, kappa_z_sq=0.0)
        curve = est.variance_ode_forward(cfg, v_init=cfg.v0, horizon=20.0)
        assert np.allclose(curve.v, cfg.v0, rtol=1e-10)

    def test_converges_to_prediction(self):
        cfg = tj.TrajectoryConfig(tau=0.01)
        curve = est.variance_ode_forward(cfg, v_init=cfg.v0, horizon=40.0)
        assert curve.final == pytest.approx(V_P, abs=1e-4)

    def test_richardson_halving(self):
        cfg = tj.TrajectoryConfig(tau=0.01)
        full = est.variance_ode_forward(cfg, 0.6, 10.0, step=0.01)
        half = est.variance_ode_forward(cfg, 0.6, 10.0, step=0.005)
        assert abs(full.final - half.final) < 1e-8

    def test_retrodiction_converges(self):
        cfg = tj.TrajectoryConfig(tau=0.01)
        curve = est.variance_ode_retrodiction(cfg, v_init=0.6, horizon=40.0)
        assert curve.final == pytest.approx(V_R, abs=1e-4)

    def test_retrodiction_needs_measurement(self):
        cfg = tj.TrajectoryConfig(tau=0.01, kappa_z_sq=0.0)
        with pytest.raises(DomainError):
            est.variance_ode_retrodiction(cfg, 0.6, 10.0)

    def test_invalid_init(self):
        cfg = tj.TrajectoryConfig(tau=0.01)
        with pytest.raises(DomainError):
            est.variance_ode_forward(cfg, 0.0, 1.0)


class TestKalmanFilter:
    def test_measurement_off(self):
        cfg = tj.TrajectoryConfig(tau=0.02, kappa_z_sq=0.0)
        y = np.random.default_rng(1).normal(0, math.sqrt(0.5), 500)
        record = tj.MeasurementRecord(tau=cfg.tau, values=y)
        res = est.kalman_filter(record, cfg)
        assert np.allclose(res.var_prior, cfg.stationary_variance, rtol=1e-9)
        assert np.array_equal(res.innovations, y)

    def test_steady_variance_matches_closed_form(self):
        cfg = tj.TrajectoryConfig(tau=0.001)
        res = est.kalman_filter_batch(np.zeros((1, 30_000)), cfg)
        assert res.var_prior[-1] == pytest.approx(0.2113982, abs=1e-3)

    def test_variance_trace_record_independent(self):
        cfg = tj.TrajectoryConfig(tau=0.02)
        g = np.random.default_rng(2)
        r1 = est.kalman_filter_batch(g.normal(size=(1, 100)), cfg)
        r2 = est.kalman_filter_batch(g.normal(size=(1, 100)) * 5.0, cfg)
        assert np.array_equal(r1.var_prior, r2.var_prior)
        assert np.array_equal(r1.gains, r2.gains)

    def test_innovation_variance_on_simulated_data(self):
        cfg = tj.TrajectoryConfig(tau=0.05)
        y, _ = tj.simulate_batch(np.zeros((200, 5000)), cfg, base_seed=51)
        res = est.kalman_filter_batch(y, cfg)
        v_steady = res.var_prior[-1]
        expected = 0.5 + cfg.eta * cfg.kappa_z_sq * cfg.tau * v_steady
        measured = res.innovations[:, 200:].var(ddof=1)
        assert measured == pytest.approx(expected, rel=0.02)

    def test_known_signal_improves_tracking(self):
        cfg = tj.TrajectoryConfig(tau=0.05, g_b=1.0)
        trace = sig.gen_ou(sig.PAPER_OU, 2000, cfg.tau, seed=61)
        y, b, p = tj.simulate_batch([trace] * 50, cfg, base_seed=62, return_latent=True)
        blind = est.kalman_filter_batch(y, cfg)
        informed = est.kalman_filter_batch(y, cfg, b=b)
        err_blind = np.mean((blind.mean_post[:, 200:] - p[:, 200:]) ** 2)
        err_informed = np.mean((informed.mean_post[:, 200:] - p[:, 200:]) ** 2)
        assert err_informed < err_blind
        assert err_informed == pytest.approx(blind.var_post[-1], rel=0.05)


class TestAugmentedSmoother:
    def test_decoupled_spin_split(self):
        cfg = tj.TrajectoryConfig(tau=0.005, g_b=0.0)
        y, _ = tj.simulate_batch(np.zeros((1, 3000)), cfg, base_seed=71)
        res = est.augmented_smoother(
            tj.MeasurementRecord(tau=cfg.tau, values=y[0]), cfg, sig.PAPER_OU
        )
        assert res.v_p == pytest.approx(V_P, rel=0.01)
        assert res.v_r == pytest.approx(V_R, rel=0.01)
        assert res.v_pr == pytest.approx(V_PR, rel=0.01)
        assert abs(1.0 / res.v_pr - (1.0 / res.v_p + 1.0 / res.v_r)) < 1e-12

    def test_zero_signal_estimates(self):
        cfg = tj.TrajectoryConfig(tau=0.05, g_b=1.0)
        ou = sig.OUParams.from_stationary(0.268, 6.12)
        y, _ = tj.simulate_batch(np.zeros((100, 400)), cfg, base_seed=72)
        b_est, b_var, _ = est.augmented_smoother_batch(y, cfg, ou)
        assert np.all(b_var <= 6.12 + 1e-9)
        assert abs(b_est.mean()) < 0.05
        # posterior variance is reduced by the measurement in the interior
        assert b_var[200] < 6.12

    def test_posterior_variance_grows_with_relaxation(self):
        # shorter signal correlation leaves less to condition on
        cfg = tj.TrajectoryConfig(tau=0.05, g_b=1.0)
        y = np.zeros((1, 300))
        values = []
        for beta in [0.1, 0.268, 0.8, 2.0]:
            ou = sig.OUParams.from_stationary(beta, 6.12)
            _, b_var, _ = est.augmented_smoother_batch(y, cfg, ou)
            values.append(b_var[150])
        assert np.all(np.diff(values) > 0)

    def test_mse_matches_posterior_variance(self):
        cfg = tj.TrajectoryConfig(tau=0.05, g_b=2.0)
        ou = sig.OUParams.from_stationary(0.268, 6.12)
        b = sig.gen_ou_batch(ou, 400, 400, cfg.tau, base_seed=73)
        y, b = tj.simulate_batch(b, cfg, base_seed=74)
        b_est, b_var, _ = est.augmented_smoother_batch(y, cfg, ou)
        inner = slice(50, 350)
        mse = np.mean((b_est[:, inner] - b[:, inner]) ** 2)
        assert mse == pytest.approx(np.mean(b_var[inner]), rel=0.05)

    def test_white_model(self):
        cfg = tj.TrajectoryConfig(tau=0.05, g_b=2.0)
        white = sig.WhiteParams(hold=0.75, level_std=2.0)
        rows = np.stack(
            [sig.gen_white(white, 400, cfg.tau, seed=100 + k).values for k in range(200)]
        )
        y, b = tj.simulate_batch(rows, cfg, base_seed=75)
        b_est, b_var, _ = est.augmented_smoother_batch(y, cfg, white)
        inner = slice(50, 350)
        mse = np.mean((b_est[:, inner] - b[:, inner]) ** 2)
        assert mse == pytest.approx(np.mean(b_var[inner]), rel=0.08)
        assert mse < 2.0**2

    def test_unsupported_model(self):
        cfg = tj.TrajectoryConfig(tau=0.05)
        with pytest.raises(UnsupportedModelError):
            est.augmented_smoother_batch(np.zeros((1, 10)), cfg, sig.PAPER_DOU)


class TestTimeMode:
    def test_zero_rate_plain_sum(self):
        values = np.array([1.0, 2.0, 3.0])
        assert est.time_mode_weight(values, 0.1, 0.0, 0.0) == 6.0

    def test_single_sample(self):
        assert est.time_mode_weight([2.0], 0.1, 0.5, 1.0) == pytest.approx(
            2.0 * math.exp(-0.5)
        )

    def test_halving_distance(self):
        gamma = 0.345
        half_life = math.log(2) / gamma
        w0 = est.time_mode_weight([1.0], 0.1, 0.0, gamma)
        w1 = est.time_mode_weight([1.0], 0.1, half_life, gamma)
        assert w1 == pytest.approx(0.5 * w0, rel=1e-12)

    def test_empty(self):
        with pytest.raises(DomainError):
            est.time_mode_weight([], 0.1, 0.0, 1.0)


class TestConditionalVariance:
    def test_independent_regressor(self):
        g = np.random.default_rng(3)
        m1, m2 = g.normal(size=10_000), g.normal(size=10_000)
        var_cond, alpha = est.conditional_variance_1(m2, m1)
        assert abs(alpha) < 0.05
        assert var_cond == pytest.approx(np.var(m2, ddof=1), rel=0.01)

    def test_perfect_regressor(self):
        g = np.random.default_rng(4)
        m1 = g.normal(size=500)
        var_cond, alpha = est.conditional_variance_1(m1, m1)
        assert alpha == pytest.approx(1.0, rel=1e-12)
        assert abs(var_cond) < 1e-12

    def test_bivariate_gaussian_analytic(self):
        cov = np.array([[2.0, 1.2], [1.2, 1.5]])
        g = np.random.default_rng(5)
        x = g.multivariate_normal([0, 0], cov, size=10_000)
        var_cond, alpha = est.conditional_variance_1(x[:, 0], x[:, 1])
        expected = cov[0, 0] - cov[0, 1] ** 2 / cov[1, 1]
        tol = 3.0 * math.sqrt(2.0 / 10_000) * cov[0, 0]
        assert abs(var_cond - expected) < tol
        assert alpha == pytest.approx(cov[0, 1] / cov[1, 1], rel=0.1)

    def test_two_regressor_average(self):
        g = np.random.default_rng(6)
        m1, m3 = g.normal(size=800), g.normal(size=800)
        m2 = 0.5 * (m1 + m3)
        var_cond, alpha, beta = est.conditional_variance_2(m2, m1, m3)
        assert alpha == pytest.approx(0.5, abs=1e-10)
        assert beta == pytest.approx(0.5, abs=1e-10)
        assert abs(var_cond) < 1e-12

    def test_second_regressor_independent(self):
        g = np.random.default_rng(7)
        m1 = g.normal(size=20_000)
        m2 = 0.7 * m1 + g.normal(size=20_000)
        m3 = g.normal(size=20_000)
        v2, alpha, beta = est.conditional_variance_2(m2, m1, m3)
        v1, alpha1 = est.conditional_variance_1(m2, m1)
        assert abs(beta) < 0.03
        assert v2 == pytest.approx(v1, rel=0.01)
        assert alpha == pytest.approx(alpha1, rel=0.02)

    def test_trivariate_gaussian_analytic(self):
        cov = np.array([[1.0, 0.5, 0.2], [0.5, 2.0, 0.6], [0.2, 0.6, 1.5]])
        g = np.random.default_rng(8)
        x = g.multivariate_normal([0, 0, 0], cov, size=10_000)
        var_cond, _, _ = est.conditional_variance_2(x[:, 1], x[:, 0], x[:, 2])
        s = cov[np.ix_([0, 2], [0, 2])]
        c = cov[np.ix_([1], [0, 2])]
        expected = cov[1, 1] - (c @ np.linalg.solve(s, c.T))[0, 0]
        tol = 3.0 * math.sqrt(2.0 / 10_000) * cov[1, 1]
        assert abs(var_cond - expected) < tol

    def test_singular_regressors(self):
        g = np.random.default_rng(9)
        m1 = g.normal(size=100)
        m2 = g.normal(size=100)
        with pytest.raises(NumericalError, match="singular"):
            est.conditional_variance_2(m2, m1, m1)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_conditioning_never_hurts(self, seed):
        g = np.random.default_rng(seed)
        n = 64
        basis = g.normal(size=(3, n))
        mix = g.normal(size=(3, 3))
        m1, m2, m3 = mix @ basis
        v2, _, _ = est.conditional_variance_2(m2, m1, m3)
        v1, _ = est.conditional_variance_1(m2, m1)
        assert v2 <= v1 + 1e-12
        assert v1 <= np.var(m2, ddof=1) + 1e-12


class TestProtocolAnalytics:
    def test_matches_brute_force_covariance(self):
        # independent construction: full sample-level covariance, then Schur
        cfg = tj.TrajectoryConfig(tau=0.05)
        seg, gap, ver = 1.0, 0.2, 0.25
        n_seg, n_gap, n_ver = 20, 4, 5
        a = 1.0 - cfg.gamma_tot * cfg.tau
        v_stat = cfg.stationary_variance
        n = 2 * n_seg + 2 * n_gap + n_ver
        idx = np.arange(n)
        sigma = cfg.record_gain**2 * v_stat * a ** np.abs(idx[:, None] - idx[None, :])
        sigma += 0.5 * np.eye(n)
        w = np.zeros((3, n))
        t_seg = np.arange(n_seg) * cfg.tau
        w[0, :n_seg] = np.exp(-cfg.gamma_tot * (t_seg[-1] - t_seg))
        w[1, n_seg + n_gap : n_seg + n_gap + n_ver] = 1.0 / n_ver
        w[2, n_seg + 2 * n_gap + n_ver :] = np.exp(-cfg.gamma_tot * t_seg)
        cov_m = w @ sigma @ w.T
        pv = est.protocol_variances(cfg, seg, gap, ver)
        assert np.allclose(pv.cov, cov_m, rtol=1e-10)
        expected_cond1 = cov_m[1, 1] - cov_m[1, 0] ** 2 / cov_m[0, 0]
        assert pv.var_cond1 == pytest.approx(expected_cond1, rel=1e-10)

    def test_continuum_limit(self):
        # small-step analytics approach the continuum kernel calculation
        cfg = tj.TrajectoryConfig(tau=0.002)
        lam = est.optimal_kernel_rate(cfg)
        pv = est.protocol_variances(cfg, 8.0, 0.0, 0.002, kernel_rate=lam)
        assert pv.v_eff_pred == pytest.approx(V_P, rel=0.02)
        assert pv.v_eff_pqs == pytest.approx(V_PR, rel=0.02)

    def test_pqs_bound_approached_from_above(self):
        cfg = tj.TrajectoryConfig(tau=0.0125)
        lam = est.optimal_kernel_rate(cfg)
        values = [
            est.protocol_variances(cfg, seg, 0.0, 0.375, kernel_rate=lam).v_eff_pqs
            for seg in [0.5, 1.0, 2.0, 4.0]
        ]
        assert np.all(np.diff(values) < 0)
        assert values[-1] > V_PR

    def test_gamma_kernel_is_suboptimal(self):
        cfg = tj.TrajectoryConfig(tau=0.0125)
        lam = est.optimal_kernel_rate(cfg)
        slow = est.protocol_variances(cfg, 6.0, 0.0, 0.025)
        fast = est.protocol_variances(cfg, 6.0, 0.0, 0.025, kernel_rate=lam)
        assert fast.v_eff_pred < slow.v_eff_pred


class TestSqueezingPipeline:
    def test_measurement_off_raw_ratio(self):
        cfg = tj.TrajectoryConfig(tau=0.025, kappa_z_sq=0.0)
        geo = 2 * 60 + 2 * 12 + 15
        y, _ = tj.simulate_batch(np.zeros((4000, geo)), cfg, base_seed=81)
        y_ref, _ = tj.simulate_batch(np.zeros((4000, geo)), cfg, base_seed=82)
        res = est.squeezing_pipeline(y, cfg, 1.5, 0.3, y_reference=y_ref)
        assert abs(res.raw_pred_db) < 0.25
        assert abs(res.raw_pqs_db) < 0.25
        assert math.isnan(res.pred_db)

    def test_matches_protocol_analytics(self):
        cfg = tj.TrajectoryConfig(tau=0.025)
        geo = 2 * 60 + 2 * 12 + 15
        y, _ = tj.simulate_batch(np.zeros((10_000, geo)), cfg, base_seed=83)
        res = est.squeezing_pipeline(y, cfg, 1.5, 0.3)
        an = est.protocol_variances(cfg, 1.5, 0.3)
        assert res.pred_db == pytest.approx(an.pred_db, abs=0.5)
        assert res.pqs_db == pytest.approx(an.pqs_db, abs=0.5)
        assert res.var_unc == pytest.approx(an.var_unc, rel=0.05)

    def test_retrodiction_improves_on_prediction(self):
        cfg = tj.TrajectoryConfig(tau=0.025)
        geo = 2 * 60 + 2 * 12 + 15
        y, _ = tj.simulate_batch(np.zeros((6000, geo)), cfg, base_seed=84)
        res = est.squeezing_pipeline(y, cfg, 1.5, 0.3)
        assert res.var_cond2 < res.var_cond1 <= res.var_unc + 1e-12

    def test_segment_stats_invariant(self):
        cfg = tj.TrajectoryConfig(tau=0.025)
        geo = 2 * 60 + 2 * 12 + 15
        y, _ = tj.simulate_batch(np.zeros((500, geo)), cfg, base_seed=85)
        stats = est.segment_statistics(y, cfg.tau, 1.5, 0.3, 0.375, cfg.gamma_tot)
        assert stats.var_cond <= np.var(stats.m2, ddof=1) + 1e-12

    def test_too_short_record(self):
        cfg = tj.TrajectoryConfig(tau=0.025)
        with pytest.raises(ConfigError):
            est.segment_statistics(np.zeros((10, 50)), cfg.tau, 1.5, 0.3, 0.375, 0.345)

    def test_anchor_choice_does_not_change_conditioning(self):
        # midpoint anchoring rescales the outer weights; the conditional
        # variance is scale invariant in the regressors
        cfg = tj.TrajectoryConfig(tau=0.025)
        geo = 2 * 60 + 2 * 12 + 15
        y, _ = tj.simulate_batch(np.zeros((500, geo)), cfg, base_seed=86)
        edge = est.squeezing_pipeline(y, cfg, 1.5, 0.3, anchor="edge")
        mid = est.squeezing_pipeline(y, cfg, 1.5, 0.3, anchor="midpoint")
        assert edge.var_cond1 == pytest.approx(mid.var_cond1, rel=1e-9)
        assert edge.var_cond2 == pytest.approx(mid.var_cond2, rel=1e-9)
