import numpy as np
import pytest

from statelp import exceptions as exc
from statelp.dgp import (
    DsgeConfig,
    GovSpendConfig,
    default_stvar_config,
    simulate_dsge,
    simulate_late,
    simulate_stvar,
    solve_dsge_savings,
)
from statelp.estimators import irf_fixed
from statelp.truth import (
    arma_true_irf,
    dsge_true_irf,
    dsge_true_irf_recursion,
    effects_to_csv,
    govspend_closed_form,
    late_oracle,
    projection_gap_covariance,
    stvar_finite_difference_effect,
    stvar_marginal_effects,
)


class TestArmaIrf:
    def test_unit_impact(self):
        assert arma_true_irf(0.5, 0.2, 0) == 1.0

    def test_first_horizon(self):
        assert abs(arma_true_irf(0.5, 0.2, 1) - 0.7) < 1e-15

    def test_second_horizon(self):
        assert abs(arma_true_irf(0.5, 0.2, 2) - 0.35) < 1e-15

    def test_recursion_property(self):
        for rho in (-0.6, 0.3, 0.9):
            for gamma in (-0.4, 0.0, 0.5):
                for h in range(2, 12):
                    assert arma_true_irf(rho, gamma, h) == pytest.approx(
                        rho * arma_true_irf(rho, gamma, h - 1), abs=0.0
                    )

    def test_negative_horizon(self):
        with pytest.raises(exc.NegativeHorizon):
            arma_true_irf(0.5, 0.2, -1)


class TestDsgeIrf:
    CFG = DsgeConfig()

    def phi(self):
        return solve_dsge_savings(self.CFG)[:2]

    def test_one_step_mixture(self):
        phi = self.phi()
        assert dsge_true_irf(self.CFG, phi, 1, 0) == pytest.approx(
            0.2 * 0.06 + 0.8 * 0.2, abs=1e-15
        )
        assert dsge_true_irf(self.CFG, phi, 0, 0) == pytest.approx(
            0.85 * 0.06 + 0.15 * 0.2, abs=1e-15
        )

    def test_enumeration_matches_recursion(self):
        phi = self.phi()
        for s in (0, 1):
            for h in range(13):
                a = dsge_true_irf(self.CFG, phi, s, h)
                b = dsge_true_irf_recursion(self.CFG, phi, s, h)
                assert abs(a - b) < 1e-12

    def test_matches_path_derivative_average(self):
        # Y is linear in the shock given the state path, so the derivative
        # along each simulated path is exact; its conditional average is a
        # common-random-numbers finite difference of the simulator.
        cfg, h = self.CFG, 3
        phi = np.array(self.phi())
        A, B = cfg.productivity(), cfg.windfall_impact()
        panel = simulate_dsge(cfg, 50_000, seed=31)
        s = panel.state.astype(int)
        for s0 in (0, 1):
            derivs = []
            for t in range(1, panel.n_obs - h):
                if s[t - 1] != s0:
                    continue
                val = B[s[t]]
                for j in range(1, h + 1):
                    val *= A[s[t + j]] * phi[s[t + j - 1]]
                derivs.append(val)
            derivs = np.array(derivs[:10_000])
            se = derivs.std(ddof=1) / np.sqrt(len(derivs))
            assert abs(derivs.mean() - dsge_true_irf(cfg, phi, s0, h)) < 3 * se

    def test_horizon_guard(self):
        with pytest.raises(exc.HorizonTooLarge):
            dsge_true_irf(self.CFG, self.phi(), 0, 21)


class TestStvarEffects:
    CFG = default_stvar_config()

    def test_impact_is_first_cholesky_column(self):
        panel = simulate_stvar(self.CFG, 1500, seed=32)
        records = stvar_marginal_effects(panel, self.CFG, 0)
        F = panel.latents["F"]
        d_cov = self.CFG.cov_recession - self.CFG.cov_expansion
        for rec in records[:200]:
            cov = self.CFG.cov_expansion + F[rec.t] * d_cov
            expected = np.linalg.cholesky(cov)[self.CFG.outcome_index, 0]
            assert abs(rec.value - expected) < 1e-12

    def test_linear_case_constant_and_matches_companion_power(self):
        cfg = self.CFG
        linear = type(cfg)(
            cfg.lags_expansion,
            cfg.lags_expansion,
            cfg.cov_expansion,
            cfg.cov_expansion,
            steepness=cfg.steepness,
            state_window=cfg.state_window,
        )
        panel = simulate_stvar(linear, 3000, seed=33)
        from statelp.estimators import VarModel

        n, p = linear.n, linear.p
        lags = list(linear.lags_expansion)
        A = np.linalg.cholesky(linear.cov_expansion)
        model = VarModel(n, p, 1, {0: lags, 1: lags}, {0: A, 1: A}, {0: None, 1: None})
        for h in (0, 1, 3):
            expected = irf_fixed(model, 0, h)[h]
            records = stvar_marginal_effects(panel, linear, h)
            values = np.array([r.value for r in records])
            assert np.max(np.abs(values - expected)) < 1e-10

    def test_matches_finite_difference(self):
        panel = simulate_stvar(self.CFG, 4000, seed=34)
        rng = np.random.default_rng(0)
        for h in (0, 1, 2, 4):
            records = stvar_marginal_effects(panel, self.CFG, h)
            by_t = {r.t: r.value for r in records}
            ts = rng.choice(
                np.arange(max(self.CFG.p, self.CFG.state_window), 3900), 15, replace=False
            )
            for t in ts:
                fd = stvar_finite_difference_effect(panel, self.CFG, int(t), h)
                denom = max(abs(fd), 1e-8)
                assert abs(by_t[int(t)] - fd) / denom < 1e-4

    def test_missing_latents(self):
        panel = simulate_stvar(self.CFG, 1200, seed=35)
        panel.latents.pop("F")
        with pytest.raises(exc.MissingLatents):
            stvar_marginal_effects(panel, self.CFG, 1)

    def test_horizon_exceeds_sample(self):
        panel = simulate_stvar(self.CFG, 1200, seed=36)
        with pytest.raises(exc.HorizonExceedsSample):
            stvar_marginal_effects(panel, self.CFG, 1300)

    def test_records_csv(self, tmp_path):
        panel = simulate_stvar(self.CFG, 1200, seed=37)
        records = stvar_marginal_effects(panel, self.CFG, 2)
        path = tmp_path / "effects.csv"
        effects_to_csv(records, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,h,effect,state_lag1"
        assert len(lines) == len(records) + 1


class TestGovspendClosedForm:
    def test_no_inefficiency_kills_interaction(self):
        res = govspend_closed_form(GovSpendConfig(delta=0.0, c=0.5))
        assert res.xi == 0.0 and res.beta1 == 0.0

    def test_reference_values_at_zero_kink(self):
        res = govspend_closed_form(GovSpendConfig(kink=0.0, delta=0.5, c=0.5, m=1.0))
        assert res.beta0 == pytest.approx(0.75, abs=1e-12)
        assert res.theta_x_recession == pytest.approx(0.75, abs=1e-12)
        assert res.theta_iv_recession == pytest.approx(0.625 / 0.75, abs=1e-12)
        assert res.beta1 == pytest.approx(1 / 12, abs=1e-12)

    def test_distortion_increasing_in_consolidation(self):
        xis = [
            govspend_closed_form(GovSpendConfig(delta=0.3, c=c)).xi
            for c in np.arange(0.1, 0.95, 0.1)
        ]
        assert np.all(np.diff(xis) > 0)

    def test_invariants_random_configs(self):
        rng = np.random.default_rng(38)
        for _ in range(1000):
            cfg = GovSpendConfig(
                kink=float(rng.uniform(-1.5, 1.5)),
                delta=float(rng.uniform(0, 0.95)),
                c=float(rng.uniform(0, 0.95)),
                m=float(rng.uniform(0.1, 3.0)),
                p_recession=0.3,
            )
            res = govspend_closed_form(cfg)
            assert abs(res.beta1 - res.xi * cfg.m) < 1e-12
            if cfg.delta == 0.0 or cfg.c == 0.0:
                assert res.xi == 0.0


class TestLateOracle:
    def test_constant_effect(self):
        panel = simulate_late(
            1.0, 0.0, 0.0, dict(complier=2.0, always=0.0, never=0.0),
            5000, seed=39, effect_sd=0.0,
        )
        assert late_oracle(panel) == pytest.approx(2.0, abs=1e-12)

    def test_no_compliers(self):
        panel = simulate_late(
            0.0, 0.5, 0.5, dict(complier=0.0, always=1.0, never=1.0), 5000, seed=40
        )
        with pytest.raises(exc.NoCompliers):
            late_oracle(panel)

    def test_matches_direct_filter(self):
        panel = simulate_late(
            0.5, 0.3, 0.2, dict(complier=1.5, always=-1.0, never=0.5), 20_000, seed=41
        )
        mask = panel.latents["group"] == 2
        direct = np.mean(panel.latents["y1"][mask] - panel.latents["y0"][mask])
        assert late_oracle(panel) == pytest.approx(direct, abs=1e-12)


class TestProjectionGapCovariance:
    def test_zero_when_phi_constant(self):
        assert projection_gap_covariance(DsgeConfig(), 0.8, 0.8, 0) == 0.0

    def test_zero_when_impact_constant(self):
        cfg = DsgeConfig(b0nu=0.1, b1nu=0.1)
        assert projection_gap_covariance(cfg, 0.86, 0.77, 1) == 0.0

    def test_reference_value(self):
        val = projection_gap_covariance(DsgeConfig(), 0.86, 0.77, 0)
        assert val == pytest.approx(-0.0016065, abs=1e-10)
