import numpy as np
import pytest

from statelp import exceptions as exc
from statelp.dgp import (
    DsgeConfig,
    GovSpendConfig,
    MarkovChain,
    SeriesPanel,
    default_stvar_config,
    simulate_arma,
    simulate_dsge,
    simulate_govspend,
    simulate_late,
    simulate_markov,
    simulate_simplified_income,
    simulate_stvar,
    solve_dsge_savings,
)

TABLE_CHAIN = MarkovChain([[0.85, 0.15], [0.2, 0.8]])


class TestSeriesPanel:
    def test_length_validation(self):
        with pytest.raises(ValueError):
            SeriesPanel(y=np.zeros(5), x=np.zeros(4), state=np.zeros(5))

    def test_binary_state_check(self):
        panel = SeriesPanel(y=np.zeros(3), x=np.zeros(3), state=np.array([0.0, 0.5, 1.0]))
        with pytest.raises(ValueError):
            panel.binary_state()

    def test_csv_roundtrip_bit_exact(self, tmp_path):
        panel = simulate_stvar(default_stvar_config(), 300, seed=7)
        path = tmp_path / "panel.csv"
        panel.to_csv(path)
        header = path.read_text().splitlines()[0]
        assert header.startswith("t,Y,X,S")
        back = SeriesPanel.from_csv(path)
        assert np.array_equal(back.y, panel.y)
        assert np.array_equal(back.x, panel.x)
        assert np.array_equal(back.state, panel.state)
        for key, vec in panel.latents.items():
            assert np.array_equal(back.latents[key], vec)

    def test_csv_instrument_column(self, tmp_path):
        panel = simulate_govspend(GovSpendConfig(), 100, seed=1)
        path = tmp_path / "p.csv"
        panel.to_csv(path)
        assert path.read_text().splitlines()[0] == "t,Y,X,S,Z"
        back = SeriesPanel.from_csv(path)
        assert np.array_equal(back.instrument, panel.instrument)


class TestMarkov:
    def test_invalid_transitions(self):
        with pytest.raises(exc.InvalidTransition):
            MarkovChain([[0.5, 0.4], [0.2, 0.8]])
        with pytest.raises(exc.InvalidTransition):
            MarkovChain([[1.2, -0.2], [0.2, 0.8]])

    def test_absorbing_chain_constant_path(self):
        path = simulate_markov(MarkovChain(np.eye(2)), 500, seed=3)
        assert np.all(path == path[0])

    def test_empirical_transitions(self):
        path = simulate_markov(TABLE_CHAIN, 1_000_000, seed=5)
        for s, stay in ((0, 0.85), (1, 0.8)):
            rows = path[:-1] == s
            freq = np.mean(path[1:][rows] == s)
            se = np.sqrt(stay * (1 - stay) / rows.sum())
            assert abs(freq - stay) < 3 * se

    def test_stationary_frequency(self):
        # persistence inflates the variance of the occupancy frequency over
        # the binomial baseline by (1+lam)/(1-lam) with lam = p00 + p11 - 1
        path = simulate_markov(TABLE_CHAIN, 1_000_000, seed=5)
        target = 0.15 / (0.15 + 0.2)
        se = np.sqrt(target * (1 - target) / len(path) * (1.65 / 0.35))
        assert abs(np.mean(path == 1) - target) < 3 * se

    def test_stationary_solution(self):
        mu = TABLE_CHAIN.stationary()
        assert np.allclose(mu, [4 / 7, 3 / 7])

    def test_determinism(self):
        a = simulate_markov(TABLE_CHAIN, 1000, seed=11)
        b = simulate_markov(TABLE_CHAIN, 1000, seed=11)
        assert np.array_equal(a, b)


class TestArma:
    def test_degenerate_case_y_equals_x(self):
        panel = simulate_arma(0.0, 0.0, 500, seed=2)
        assert np.array_equal(panel.y, panel.x)

    def test_explosive(self):
        with pytest.raises(exc.ExplosiveRho):
            simulate_arma(1.0, 0.2, 100, seed=0)

    def test_autocovariance_matches_closed_form(self):
        rho, gamma = 0.5, 0.2
        g0 = (1 + gamma ** 2 + 2 * rho * gamma) / (1 - rho ** 2)
        g1 = rho * g0 + gamma
        seeds = range(6)
        est = []
        for seed in seeds:
            y = simulate_arma(rho, gamma, 200_000, seed=seed).y
            yc = y - y.mean()
            est.append(np.mean(yc[1:] * yc[:-1]))
        est = np.array(est)
        mc_se = est.std(ddof=1) / np.sqrt(len(est))
        assert abs(est.mean() - g1) < 3 * mc_se

    def test_lp_slope_at_h1(self):
        panel = simulate_arma(0.5, 0.2, 1_000_000, seed=9)
        y, x = panel.y[1:], panel.x[:-1]
        slope = np.dot(y - y.mean(), x - x.mean()) / np.dot(x - x.mean(), x - x.mean())
        resid_sd = np.std(y - slope * x)
        se = resid_sd / (x.std() * np.sqrt(len(x)))
        assert abs(slope - 0.7) < 3 * se


class TestDsgeSolver:
    def test_table_calibration(self):
        phi0, phi1, resid = solve_dsge_savings(DsgeConfig())
        assert resid < 1e-10
        assert sorted([round(phi0, 2), round(phi1, 2)]) == [0.77, 0.86]
        assert abs(phi0 - 0.86) < 0.01 and abs(phi1 - 0.77) < 0.01
        # higher savings in the productive state
        assert phi0 > phi1

    def test_symmetric_states(self):
        cfg = DsgeConfig(a0=1.0, a1=1.0, pi00=0.7, pi11=0.7)
        phi0, phi1, _ = solve_dsge_savings(cfg)
        assert abs(phi0 - phi1) < 1e-10

    def test_runtime_under_a_second(self):
        import time

        start = time.time()
        solve_dsge_savings(DsgeConfig())
        assert time.time() - start < 1.0


class TestDsgeSimulator:
    def test_no_shock_is_deterministic_given_states(self):
        cfg = DsgeConfig(b0nu=0.0, b1nu=0.0)
        panel = simulate_dsge(cfg, 2000, seed=4)
        phi = np.array(solve_dsge_savings(cfg)[:2])
        A = cfg.productivity()
        s = panel.state.astype(int)
        # reconstruct forward from the first emitted observation
        rebuilt = panel.y.copy()
        for t in range(1, len(rebuilt)):
            rebuilt[t] = A[s[t]] * phi[s[t - 1]] * rebuilt[t - 1] + cfg.nu
        assert np.max(np.abs(rebuilt - panel.y)) < 1e-8

    def test_finite_and_stable_across_seeds(self):
        means = []
        for seed in range(5):
            panel = simulate_dsge(DsgeConfig(), 200_000, seed=seed)
            assert np.all(np.isfinite(panel.y))
            means.append(panel.y.mean())
        means = np.array(means)
        assert means.std(ddof=1) < 0.1 * abs(means.mean())

    def test_impact_matches_markov_mixture(self):
        est = []
        for seed in range(5):
            panel = simulate_dsge(DsgeConfig(), 100_000, seed=seed)
            s = panel.state.astype(int)
            mask = s[:-1] == 1
            y, x = panel.y[1:][mask], panel.x[1:][mask]
            yc, xc = y - y.mean(), x - x.mean()
            est.append(np.dot(yc, xc) / np.dot(xc, xc))
        est = np.array(est)
        mc_se = est.std(ddof=1) / np.sqrt(len(est))
        assert abs(est.mean() - 0.172) < 3 * mc_se

    def test_exogeneity(self):
        panel = simulate_dsge(DsgeConfig(), 100_000, seed=8)
        corr = np.corrcoef(panel.x[1:], panel.state[:-1])[0, 1]
        assert abs(corr) < 3 / np.sqrt(panel.n_obs)

    def test_determinism(self):
        a = simulate_dsge(DsgeConfig(), 5000, seed=13)
        b = simulate_dsge(DsgeConfig(), 5000, seed=13)
        assert np.array_equal(a.y, b.y) and np.array_equal(a.x, b.x)
        assert np.array_equal(a.state, b.state)


class TestSimplifiedIncome:
    def test_no_state_dependence_split_slopes_equal(self):
        cfg = DsgeConfig(b0nu=0.1, b1nu=0.1)
        diffs = []
        for seed in range(5):
            panel = simulate_simplified_income(cfg, 0.8, 0.8, 100_000, seed=seed)
            s = panel.state.astype(int)
            slopes = []
            for state in (0, 1):
                mask = s[:-1] == state
                y, x = panel.y[1:][mask], panel.x[1:][mask]
                yc, xc = y - y.mean(), x - x.mean()
                slopes.append(np.dot(yc, xc) / np.dot(xc, xc))
            diffs.append(slopes[1] - slopes[0])
        diffs = np.array(diffs)
        mc_se = diffs.std(ddof=1) / np.sqrt(len(diffs))
        assert abs(diffs.mean()) < 3 * mc_se

    def test_delayed_product_mode_identity(self):
        panel = simulate_simplified_income(
            DsgeConfig(), 0.86, 0.77, 5000, seed=21, mode="delayed_product"
        )
        s, x, y = panel.state, panel.x, panel.y
        assert np.max(np.abs(y[2:] - s[:-2] * x[1:-1])) == 0.0

    def test_delayed_product_conditional_moment_nonzero(self):
        # E[Y_{t+1} X_t | S_{t-1} = 1] = P(S_t stays 1) * E[X^2] > 0
        panel = simulate_simplified_income(
            DsgeConfig(), 0.86, 0.77, 300_000, seed=22, mode="delayed_product"
        )
        s = panel.state.astype(int)
        mask = s[: -2] == 1
        vals = (panel.y[2:] * panel.x[1:-1])[mask]
        se = vals.std(ddof=1) / np.sqrt(mask.sum())
        assert vals.mean() > 3 * se

    def test_stationary_at_table_parameters(self):
        panel = simulate_simplified_income(DsgeConfig(), 0.86, 0.77, 1_000_000, seed=23)
        assert np.all(np.isfinite(panel.y))
        assert np.max(np.abs(panel.y)) < 1e6

    def test_explosive_phi(self):
        with pytest.raises(exc.ExplosivePhi):
            simulate_simplified_income(DsgeConfig(), 1.0, 0.5, 1000, seed=0)


class TestStvar:
    def test_reduces_to_linear_var(self):
        cfg = default_stvar_config()
        linear = type(cfg)(
            cfg.lags_expansion,
            cfg.lags_expansion,
            cfg.cov_expansion,
            cfg.cov_expansion,
            steepness=cfg.steepness,
            state_window=cfg.state_window,
        )
        diffs = []
        for seed in range(5):
            panel = simulate_stvar(linear, 40_000, seed=seed)
            thr = np.median(panel.state)
            slopes = []
            for hi in (False, True):
                mask = (panel.state[:-1] >= thr) == hi
                y, x = panel.y[1:][mask], panel.x[1:][mask]
                yc, xc = y - y.mean(), x - x.mean()
                slopes.append(np.dot(yc, xc) / np.dot(xc, xc))
            diffs.append(slopes[1] - slopes[0])
        diffs = np.array(diffs)
        mc_se = diffs.std(ddof=1) / np.sqrt(len(diffs))
        assert abs(diffs.mean()) < 3 * mc_se

    def test_state_standardization_and_weight_range(self):
        panel = simulate_stvar(default_stvar_config(), 20_000, seed=14)
        F = panel.latents["F"]
        assert np.all((F > 0) & (F < 1))
        assert abs(panel.state.mean()) < 0.05
        assert abs(panel.state.std() - 1.0) < 0.05

    def test_reconstruction_identity(self):
        cfg = default_stvar_config()
        panel = simulate_stvar(cfg, 2000, seed=15)
        path = np.column_stack([panel.latents[f"y{i}"] for i in range(cfg.n)])
        eps = np.column_stack([panel.latents[f"e{i}"] for i in range(cfg.n)])
        F = panel.latents["F"]
        big_e, big_r = cfg.lag_blocks()
        d_cov = cfg.cov_recession - cfg.cov_expansion
        worst = 0.0
        for t in range(cfg.p, panel.n_obs):
            f = F[t]
            lagvec = path[np.arange(t - 1, t - cfg.p - 1, -1)].ravel()
            pred = (big_e + f * (big_r - big_e)) @ lagvec
            pred = pred + np.linalg.cholesky(cfg.cov_expansion + f * d_cov) @ eps[t]
            worst = max(worst, float(np.max(np.abs(path[t] - pred))))
        assert worst < 1e-10

    def test_exogeneity(self):
        panel = simulate_stvar(default_stvar_config(), 20_000, seed=16)
        corr = np.corrcoef(panel.x[1:], panel.state[:-1])[0, 1]
        assert abs(corr) < 3 / np.sqrt(panel.n_obs)

    def test_determinism(self):
        a = simulate_stvar(default_stvar_config(), 1500, seed=17)
        b = simulate_stvar(default_stvar_config(), 1500, seed=17)
        for key in a.latents:
            assert np.array_equal(a.latents[key], b.latents[key])
        assert np.array_equal(a.state, b.state)


class TestGovSpend:
    def test_no_consolidation(self):
        panel = simulate_govspend(GovSpendConfig(c=0.0), 50_000, seed=18)
        assert np.array_equal(panel.x, panel.instrument)

    def test_no_inefficiency(self):
        cfg = GovSpendConfig(delta=0.0, m=1.3)
        panel = simulate_govspend(cfg, 50_000, seed=19)
        assert np.max(np.abs(panel.y - cfg.m * panel.x)) < 1e-12

    def test_exogeneity(self):
        panel = simulate_govspend(GovSpendConfig(), 100_000, seed=20)
        corr = np.corrcoef(panel.instrument[1:], panel.state[:-1])[0, 1]
        assert abs(corr) < 3 / np.sqrt(panel.n_obs)

    def test_passthrough_kink_only_in_recession(self):
        cfg = GovSpendConfig(kink=0.5, c=0.4)
        panel = simulate_govspend(cfg, 50_000, seed=24)
        z = panel.instrument
        s_used = np.concatenate([[np.nan], panel.state[:-1]])
        exp = s_used == 0
        rec = s_used == 1
        assert np.array_equal(panel.x[1:][exp[1:]], z[1:][exp[1:]])
        kinked = rec & (z >= cfg.kink)
        assert np.allclose(
            panel.x[kinked], z[kinked] - (z[kinked] - cfg.kink) * cfg.c
        )


class TestLate:
    def test_invalid_probabilities(self):
        with pytest.raises(exc.InvalidProbabilities):
            simulate_late(0.5, 0.5, 0.5, dict(complier=1, always=1, never=1), 100, 0)

    def test_treatment_rules(self):
        panel = simulate_late(
            0.4, 0.3, 0.3, dict(complier=2.0, always=0.0, never=0.0), 20_000, seed=25
        )
        g = panel.latents["group"]
        z = panel.instrument
        assert np.all(panel.x[g == 0] == 0.0)
        assert np.all(panel.x[g == 1] == 1.0)
        assert np.array_equal(panel.x[g == 2], z[g == 2])
        chosen = np.where(panel.x == 1.0, panel.latents["y1"], panel.latents["y0"])
        assert np.array_equal(panel.y, chosen)

    def test_group_shares(self):
        panel = simulate_late(
            0.5, 0.2, 0.3, dict(complier=1.0, always=0.5, never=0.1), 200_000, seed=26
        )
        g = panel.latents["group"]
        for code, share in ((0, 0.3), (1, 0.2), (2, 0.5)):
            se = np.sqrt(share * (1 - share) / len(g))
            assert abs(np.mean(g == code) - share) < 3 * se
