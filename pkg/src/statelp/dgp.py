"""Seeded simulators for every data-generating process in the lab.

Each simulator is a pure function of (config, T, seed): two calls with the
same arguments produce bit-identical panels.  Recursive processes discard a
burn-in of ``BURN_IN`` periods so initialization transients never reach the
emitted sample.  Panels carry whatever latent quantities the ground-truth
effect computations need (structural shocks, regime weights, state paths).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import root
from scipy.signal import lfilter
from scipy.special import expit

from .exceptions import (
    ExplosivePhi,
    ExplosiveRho,
    ExplosiveSimulation,
    InvalidProbabilities,
    InvalidTransition,
    NoConvergence,
)
from .linalg import cholesky_lower

#: Periods discarded at the start of every recursive simulation.
BURN_IN = 1000

#: Absolute path values beyond this raise ExplosiveSimulation.
OVERFLOW_GUARD = 1e12


# ---------------------------------------------------------------------------
# Panel container
# ---------------------------------------------------------------------------

@dataclass
class SeriesPanel:
    """Aligned time series of outcome, shock/regressor, state and extras.

    Attributes
    ----------
    y, x, state : ndarray, shape (T,)
        Outcome, shock (or endogenous regressor) and state columns.  The
        state column stores the *contemporaneous* state S_t; estimators lag
        it internally, so off-by-one conventions live in exactly one place.
    instrument : ndarray or None
        Optional instrument column Z_t.
    latents : dict[str, ndarray]
        Named latent columns (structural shocks, regime weights, potential
        outcomes, ...), all of length T.
    meta : dict
        Scalar side information (e.g. state standardization constants).
        Not serialized to CSV.
    """

    y: np.ndarray
    x: np.ndarray
    state: np.ndarray
    instrument: np.ndarray | None = None
    latents: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.state = np.asarray(self.state, dtype=float)
        T = len(self.y)
        if self.instrument is not None:
            self.instrument = np.asarray(self.instrument, dtype=float)
        columns = [self.x, self.state] + (
            [self.instrument] if self.instrument is not None else []
        )
        self.latents = {k: np.asarray(v, dtype=float) for k, v in self.latents.items()}
        columns += list(self.latents.values())
        if any(len(c) != T for c in columns):
            raise ValueError("all panel columns must have identical length")

    @property
    def n_obs(self) -> int:
        return len(self.y)

    def binary_state(self) -> np.ndarray:
        """State column as 0/1 integers; raises if not binary coded."""
        vals = np.unique(self.state)
        if not np.all(np.isin(vals, (0.0, 1.0))):
            raise ValueError("state column is not binary coded")
        return self.state.astype(int)

    def to_csv(self, path) -> None:
        """Write the panel with 17 significant digits for bit-exact round trips."""
        names = ["t", "Y", "X", "S"]
        cols = [self.y, self.x, self.state]
        if self.instrument is not None:
            names.append("Z")
            cols.append(self.instrument)
        for key, vec in self.latents.items():
            names.append(key)
            cols.append(vec)
        with open(path, "w") as fh:
            fh.write(",".join(names) + "\n")
            for t in range(self.n_obs):
                row = [str(t)] + [f"{c[t]:.17g}" for c in cols]
                fh.write(",".join(row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SeriesPanel":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        cols = {name: data[:, i] for i, name in enumerate(header)}
        latents = {
            k: v for k, v in cols.items() if k not in ("t", "Y", "X", "S", "Z")
        }
        return cls(
            y=cols["Y"],
            x=cols["X"],
            state=cols["S"],
            instrument=cols.get("Z"),
            latents=latents,
        )


# ---------------------------------------------------------------------------
# Markov chains
# ---------------------------------------------------------------------------

@dataclass
class MarkovChain:
    """Finite-state Markov chain with a row-stochastic transition matrix."""

    transition: np.ndarray

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=float)
        P = self.transition
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InvalidTransition("transition matrix must be square")
        if np.any(P < 0) or np.any(P > 1):
            raise InvalidTransition("transition entries must lie in [0, 1]")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-12:
            raise InvalidTransition("transition rows must sum to one")

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    def stationary(self) -> np.ndarray:
        """Stationary distribution, solved from the balance equations."""
        K = self.n_states
        A = np.vstack([self.transition.T - np.eye(K), np.ones((1, K))])
        b = np.concatenate([np.zeros(K), [1.0]])
        mu, *_ = np.linalg.lstsq(A, b, rcond=None)
        return np.clip(mu, 0.0, None) / np.sum(np.clip(mu, 0.0, None))

    def lagged_state_mean(self) -> np.ndarray:
        """E[S_{t-1} | S_t = i] for a two-state chain, by Bayes' rule."""
        mu = self.stationary()
        return np.array(
            [self.transition[1, i] * mu[1] / mu[i] for i in range(self.n_states)]
        )


def simulate_markov(chain: MarkovChain, T: int, seed=None, rng=None) -> np.ndarray:
    """Draw a path of length T starting from the stationary distribution."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    cum = np.cumsum(chain.transition, axis=1)
    u = rng.random(T)
    path = np.empty(T, dtype=np.int64)
    s = int(np.searchsorted(np.cumsum(chain.stationary()), u[0], side="right"))
    s = min(s, chain.n_states - 1)
    path[0] = s
    rows = [cum[i] for i in range(chain.n_states)]
    for t in range(1, T):
        s = int(np.searchsorted(rows[s], u[t], side="right"))
        if s >= chain.n_states:  # guard against u == 1.0 edge
            s = chain.n_states - 1
        path[t] = s
    return path


# ---------------------------------------------------------------------------
# ARMA example process
# ---------------------------------------------------------------------------

def simulate_arma(rho: float, gamma: float, T: int, seed=None) -> SeriesPanel:
    """Y_t = rho Y_{t-1} + X_t + gamma X_{t-1} with standard normal shocks."""
    if abs(rho) >= 1:
        raise ExplosiveRho(f"|rho| = {abs(rho)} >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(T + BURN_IN)
    y = lfilter([1.0, gamma], [1.0, -rho], x)
    return SeriesPanel(y=y[BURN_IN:], x=x[BURN_IN:], state=np.zeros(T))


# ---------------------------------------------------------------------------
# Regime-switching growth model
# ---------------------------------------------------------------------------

@dataclass
class DsgeConfig:
    """Two-state growth model with windfall income shocks.

    ``b0nu``/``b1nu`` are the windfall impact scales (the standard deviation
    of windfall income) in states 0 and 1; ``nu`` is the mean transfer.
    State 0 is the high-productivity state (a1 < a0 required).
    """

    beta: float = 0.9
    sigma: float = 2.0
    a0: float = 1.2
    a1: float = 0.75
    b0nu: float = 0.06
    b1nu: float = 0.2
    nu: float = 0.3
    pi00: float = 0.85
    pi11: float = 0.8

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.a1 > self.a0:
            raise ValueError("state 1 must not out-produce state 0 (need a1 <= a0)")
        if not (0 < self.pi00 < 1 and 0 < self.pi11 < 1):
            raise ValueError("staying probabilities must lie in (0, 1)")

    def chain(self) -> MarkovChain:
        return MarkovChain(
            [[self.pi00, 1 - self.pi00], [1 - self.pi11, self.pi11]]
        )

    def productivity(self) -> np.ndarray:
        return np.array([self.a0, self.a1])

    def windfall_impact(self) -> np.ndarray:
        return np.array([self.b0nu, self.b1nu])


def solve_dsge_savings(config: DsgeConfig, tol: float = 1e-10):
    """Solve the two intertemporal optimality conditions for the savings rates.

    The consumption shares ct(s) satisfy

        ct(s)^(-1/sigma)
            = beta * sum_s' pi(s,s') * (ct(s') A(s') (1 - ct(s)))^(-1/sigma) A(s')

    Returns (phi0, phi1, residual) where phi(s) = 1 - ct(s) is the savings
    rate and residual is the max absolute equation error at the solution.
    """
    P = config.chain().transition
    A = config.productivity()
    inv = -1.0 / config.sigma

    def resid_shares(shares):
        lhs = shares ** inv
        rhs = np.array(
            [
                config.beta
                * np.sum(P[s] * (shares * A * (1.0 - shares[s])) ** inv * A)
                for s in range(2)
            ]
        )
        return lhs - rhs

    def resid_unconstrained(u):
        return resid_shares(expit(u))

    sol = root(resid_unconstrained, np.zeros(2), method="hybr", tol=1e-14)
    shares = expit(sol.x)
    residual = float(np.max(np.abs(resid_shares(shares))))
    if not np.all(np.isfinite(shares)) or residual > tol:
        raise NoConvergence(f"Euler residual {residual:.3e} exceeds {tol:.1e}")
    return 1.0 - shares[0], 1.0 - shares[1], residual


def _recursive_income(phi_lagged, impact_now, nu, x, y0):
    """y[t] = phi_lagged[t] * y[t-1] + nu + impact_now[t] * x[t], looped fast."""
    a = phi_lagged.tolist()
    c = (nu + impact_now * x).tolist()
    y = [0.0] * len(a)
    prev = y0
    for t in range(len(a)):
        prev = a[t] * prev + c[t]
        y[t] = prev
    y = np.asarray(y)
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > OVERFLOW_GUARD:
        raise ExplosiveSimulation("income path exceeded the overflow guard")
    return y


def simulate_dsge(config: DsgeConfig, T: int, seed=None) -> SeriesPanel:
    """Simulate the growth model with solved savings rates.

    Income follows Y_t = A(S_t) phi(S_{t-1}) Y_{t-1} + nu + nu B(S_t) X_t
    with X_t iid standard normal and an exogenous two-state Markov state.
    """
    phi0, phi1, _ = solve_dsge_savings(config)
    return _simulate_income(config, np.array([phi0, phi1]), config.productivity(),
                            T, seed)


def simulate_simplified_income(
    config: DsgeConfig,
    phi0: float,
    phi1: float,
    T: int,
    seed=None,
    mode: str = "ar",
) -> SeriesPanel:
    """Income process with unit productivity and user-supplied persistence.

    ``mode="ar"`` gives Y_t = phi(S_{t-1}) Y_{t-1} + nu + nu B(S_t) X_t.
    ``mode="delayed_product"`` gives Y_t = S_{t-2} X_{t-1}, a process whose
    one-step projection error stays correlated with the lagged shock
    conditional on S_{t-1}.
    """
    if mode not in ("ar", "delayed_product"):
        raise ValueError(f"unknown mode {mode!r}")
    phi = np.array([phi0, phi1], dtype=float)
    if np.any(np.abs(phi) >= 1) and mode == "ar":
        raise ExplosivePhi("persistence must satisfy |phi| < 1 in both states")
    return _simulate_income(config, phi, np.ones(2), T, seed, mode=mode)


def _simulate_income(config, phi, productivity, T, seed, mode="ar"):
    rng = np.random.default_rng(seed)
    total = T + BURN_IN
    # two extra leading states so S_{t-1} and S_{t-2} exist at t = 0
    states = simulate_markov(config.chain(), total + 2, rng=rng)
    x_all = rng.standard_normal(total + 1)  # one extra lag of the shock
    s_now = states[2:]
    s_lag1 = states[1:-1]
    s_lag2 = states[:-2]
    x_now = x_all[1:]
    impact = config.windfall_impact()
    if mode == "ar":
        a = productivity[s_now] * phi[s_lag1]
        y = _recursive_income(a, impact[s_now], config.nu, x_now, config.nu)
    else:
        y = s_lag2.astype(float) * x_all[:-1]
    return SeriesPanel(
        y=y[BURN_IN:],
        x=x_now[BURN_IN:],
        state=s_now[BURN_IN:].astype(float),
    )


# ---------------------------------------------------------------------------
# Smooth transition VAR
# ---------------------------------------------------------------------------

@dataclass
class StvarConfig:
    """Two-regime smooth transition VAR.

    Coefficients are logistic mixtures of the expansion and recession
    parameter sets, weighted by F(s) = 1 / (1 + exp(steepness * s)) where s
    is the lagged, standardized trailing average of the state variable.  Low
    states push the mixture toward the recession regime.
    """

    lags_expansion: tuple
    lags_recession: tuple
    cov_expansion: np.ndarray
    cov_recession: np.ndarray
    steepness: float = 1.5
    state_window: int = 7
    state_var_index: int | None = None
    outcome_index: int | None = None

    def __post_init__(self):
        self.lags_expansion = tuple(
            np.asarray(m, dtype=float) for m in self.lags_expansion
        )
        self.lags_recession = tuple(
            np.asarray(m, dtype=float) for m in self.lags_recession
        )
        self.cov_expansion = np.asarray(self.cov_expansion, dtype=float)
        self.cov_recession = np.asarray(self.cov_recession, dtype=float)
        if len(self.lags_expansion) != len(self.lags_recession):
            raise ValueError("both regimes need the same lag order")
        cholesky_lower(self.cov_expansion)  # raises NotPositiveDefinite
        cholesky_lower(self.cov_recession)
        if self.steepness <= 0:
            raise ValueError("steepness must be positive")
        if self.state_window < 1:
            raise ValueError("state_window must be >= 1")
        n = self.cov_expansion.shape[0]
        if self.outcome_index is None:
            self.outcome_index = n - 1
        if self.state_var_index is None:
            self.state_var_index = self.outcome_index

    @property
    def n(self) -> int:
        return self.cov_expansion.shape[0]

    @property
    def p(self) -> int:
        return len(self.lags_expansion)

    def mixture_weight(self, state) -> np.ndarray:
        """Recession weight F at a (lagged, standardized) state value."""
        return expit(-self.steepness * np.asarray(state, dtype=float))

    def lag_blocks(self):
        """Stacked (n, n*p) lag coefficient blocks for both regimes."""
        big_e = np.hstack(self.lags_expansion)
        big_r = np.hstack(self.lags_recession)
        return big_e, big_r

    def _key(self):
        parts = [m.tobytes() for m in self.lags_expansion]
        parts += [m.tobytes() for m in self.lags_recession]
        parts += [self.cov_expansion.tobytes(), self.cov_recession.tobytes()]
        return (
            b"".join(parts),
            self.steepness,
            self.state_window,
            self.state_var_index,
            self.outcome_index,
        )


def default_stvar_config() -> StvarConfig:
    """Bundled synthetic two-variable, three-lag parameter set.

    Stable in both regimes and in every mixture, with regime-dependent
    dynamics and shock covariance so that causal effects genuinely vary
    with the state.
    """
    lags_e = (
        np.array([[0.10, 0.00], [0.25, 0.50]]),
        np.array([[0.00, 0.00], [0.10, 0.15]]),
        np.array([[0.00, 0.00], [0.05, 0.05]]),
    )
    lags_r = (
        np.array([[0.10, 0.00], [0.60, 0.30]]),
        np.array([[0.00, 0.00], [0.20, 0.10]]),
        np.array([[0.00, 0.00], [0.10, 0.05]]),
    )
    cov_e = np.array([[1.0, 0.2], [0.2, 0.8]])
    cov_r = np.array([[1.5, 0.4], [0.4, 1.5]])
    return StvarConfig(lags_e, lags_r, cov_e, cov_r, steepness=1.5, state_window=7)


_STANDARDIZATION_CACHE: dict = {}

#: Fixed seed of the standardization pre-passes; part of the DGP definition.
_PREPASS_SEED = 1_000_003
_PREPASS_LENGTH = 100_000


def state_standardization(config: StvarConfig) -> tuple[float, float]:
    """Mean and sd used to standardize the trailing-average state.

    Computed once per configuration from 100,000-period pre-passes with a
    fixed internal seed: starting from the raw trailing average, the
    constants are updated until the standardized state of a fresh pass has
    mean ~0 and sd ~1 (the standardization feeds back into the dynamics, so
    a single pass is not enough).  The result is part of the process
    definition and identical across seeds and replications.
    """
    key = config._key()
    if key in _STANDARDIZATION_CACHE:
        return _STANDARDIZATION_CACHE[key]
    mean, sd = 0.0, 1.0
    for _ in range(6):
        rng = np.random.default_rng(_PREPASS_SEED)
        eps = rng.standard_normal((_PREPASS_LENGTH, config.n))
        path, _, _ = _stvar_path(config, eps, mean, sd)
        r, w = config.state_var_index, config.state_window
        trail = np.convolve(path[:, r], np.ones(w) / w, mode="valid")[BURN_IN:]
        m_new, s_new = float(np.mean(trail)), float(np.std(trail))
        done = abs((m_new - mean) / sd) < 5e-3 and abs(s_new / sd - 1.0) < 5e-3
        mean, sd = m_new, s_new
        if done:
            break
    _STANDARDIZATION_CACHE[key] = (mean, sd)
    return mean, sd


def _stvar_path(config: StvarConfig, eps: np.ndarray, mean: float, sd: float):
    """Core recursion; returns (path, state, weight) arrays of len(eps).

    state[t] is the standardized trailing average ending at t (zero while
    the window is incomplete); weight[t] is the regime weight F used for
    period t, i.e. evaluated at state[t-1].
    """
    n, p, w = config.n, config.p, config.state_window
    r = config.state_var_index
    big_e, big_r = config.lag_blocks()
    big_d = big_r - big_e
    cov_e, cov_d = config.cov_expansion, config.cov_recession - config.cov_expansion
    total = eps.shape[0]
    path = np.zeros((total, n))
    state = np.zeros(total)
    weight = np.zeros(total)
    lagvec = np.zeros(n * p)
    trail = 0.0  # running sum of the last w state-variable values
    inv_w_sd = 1.0 / (w * sd)
    for t in range(total):
        # before appending y_t, trail covers t-w .. t-1: the window of S_{t-1}
        s_lag = (trail - mean * w) * inv_w_sd if t >= w else 0.0
        f = 1.0 / (1.0 + math.exp(min(60.0, max(-60.0, config.steepness * s_lag))))
        weight[t] = f
        impact = np.linalg.cholesky(cov_e + f * cov_d)
        y_t = (big_e + f * big_d) @ lagvec + impact @ eps[t]
        path[t] = y_t
        trail += y_t[r]
        if t >= w:
            trail -= path[t - w, r]
        if t >= w - 1:
            state[t] = (trail - mean * w) * inv_w_sd
        if p > 0:
            lagvec = np.concatenate([y_t, lagvec[: n * (p - 1)]])
    return path, state, weight


def simulate_stvar(config: StvarConfig, T: int, seed=None) -> SeriesPanel:
    """Simulate the smooth transition VAR and emit a fully instrumented panel.

    The panel outcome is the configured outcome variable, the shock column
    is the first structural innovation, and the state column is the lagged,
    standardized trailing average actually used by the recursion.  Latents
    hold the full vector path (``y0``..), all structural shocks (``e0``..)
    and the regime weight ``F``; ``meta`` records the standardization
    constants.
    """
    mean, sd = state_standardization(config)
    rng = np.random.default_rng(seed)
    total = T + BURN_IN
    eps = rng.standard_normal((total, config.n))
    path, state, weight = _stvar_path(config, eps, mean, sd)
    if not np.all(np.isfinite(path)) or np.max(np.abs(path)) > OVERFLOW_GUARD:
        raise ExplosiveSimulation("path exceeded the overflow guard")
    sl = slice(BURN_IN, total)
    latents = {f"y{i}": path[sl, i] for i in range(config.n)}
    latents.update({f"e{i}": eps[sl, i] for i in range(config.n)})
    latents["F"] = weight[sl]
    return SeriesPanel(
        y=path[sl, config.outcome_index],
        x=eps[sl, 0],
        state=state[sl],
        latents=latents,
        meta={"state_mean": mean, "state_sd": sd},
    )


# ---------------------------------------------------------------------------
# Kinked pass-through process for IV weighting
# ---------------------------------------------------------------------------

@dataclass
class GovSpendConfig:
    """Spending process with a kinked outcome map and state-dependent pass-through.

    The raw shock Z passes one-for-one into the regressor X, except that in
    state 1 the portion of Z above the kink is scaled down by the
    consolidation factor c.  The outcome is piecewise linear in X with
    multiplier m below the kink and m(1 - delta) above it, so the causal
    effect of X never depends on the state.
    """

    kink: float = 0.8
    delta: float = 0.3
    c: float = 0.5
    m: float = 1.0
    p_recession: float = 0.25

    def __post_init__(self):
        if not (0 <= self.delta < 1 and 0 <= self.c < 1):
            raise ValueError("delta and c must lie in [0, 1)")
        if self.m <= 0:
            raise ValueError("multiplier m must be positive")
        if not 0 < self.p_recession < 1:
            raise ValueError("p_recession must lie in (0, 1)")

    def outcome(self, x) -> np.ndarray:
        """Piecewise-linear outcome map."""
        x = np.asarray(x, dtype=float)
        return self.m * x - self.delta * self.m * np.maximum(x - self.kink, 0.0)

    def passthrough(self, z, s) -> np.ndarray:
        """Regressor as a function of the shock and the lagged state."""
        z = np.asarray(z, dtype=float)
        crowd = (np.asarray(s) == 1) & (z >= self.kink)
        return np.where(crowd, z - (z - self.kink) * self.c, z)


def simulate_govspend(config: GovSpendConfig, T: int, seed=None) -> SeriesPanel:
    """IID draws from the kinked pass-through process.

    The state relevant for period t's pass-through is drawn independently
    and stored so that it appears as S_{t-1} to estimators that lag the
    state column by one.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(T)
    s_all = (rng.random(T + 1) < config.p_recession).astype(float)
    s_used = s_all[:-1]  # state at t-1, drives period-t pass-through
    x = config.passthrough(z, s_used)
    y = config.outcome(x)
    return SeriesPanel(y=y, x=x, state=s_all[1:], instrument=z)


# ---------------------------------------------------------------------------
# Binary-instrument compliance groups
# ---------------------------------------------------------------------------

#: Latent group codes used by the compliance simulator.
GROUP_NEVER, GROUP_ALWAYS, GROUP_COMPLIER = 0, 1, 2


def simulate_late(
    p_complier: float,
    p_always: float,
    p_never: float,
    effect_means: dict,
    n: int,
    seed=None,
    effect_sd: float = 1.0,
) -> SeriesPanel:
    """Cross-section with a binary instrument and limited compliance.

    ``effect_means`` maps group names ("complier", "always", "never") to the
    mean treatment effect in that group.  Potential outcomes are stored as
    latents (``y0``, ``y1``) along with the group code (0 never, 1 always,
    2 complier).  The state column is an independent placebo coin flip so
    state-dependent estimators can be run as falsification checks.
    """
    probs = np.array([p_never, p_always, p_complier], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise InvalidProbabilities("group probabilities must be >= 0 and sum to 1")
    means = np.array(
        [effect_means["never"], effect_means["always"], effect_means["complier"]],
        dtype=float,
    )
    rng = np.random.default_rng(seed)
    group = rng.choice(3, size=n, p=probs)
    z = rng.integers(0, 2, size=n).astype(float)
    y0 = rng.standard_normal(n)
    y1 = y0 + means[group] + effect_sd * rng.standard_normal(n)
    x = np.where(group == GROUP_ALWAYS, 1.0, np.where(group == GROUP_NEVER, 0.0, z))
    y = np.where(x == 1.0, y1, y0)
    placebo = rng.integers(0, 2, size=n).astype(float)
    return SeriesPanel(
        y=y,
        x=x,
        state=placebo,
        instrument=z,
        latents={"group": group.astype(float), "y0": y0, "y1": y1},
    )
