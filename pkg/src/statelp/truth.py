"""Analytic and brute-force ground truth for every causal effect in the lab.

These computations never reuse the estimation code paths they are meant to
check: impulse responses come from exact path enumeration or closed forms,
and the smooth-transition effects are validated against common-random-number
finite differences of the simulator itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .dgp import DsgeConfig, GovSpendConfig, SeriesPanel, StvarConfig
from .exceptions import (
    HorizonExceedsSample,
    HorizonTooLarge,
    MissingLatents,
    NegativeHorizon,
    NoCompliers,
)
from .linalg import chol_sensitivity_operator, matrix_calculus_operators, vech

#: Path enumeration refuses horizons beyond this (2^(h+1) paths).
MAX_ENUMERATION_HORIZON = 20


# ---------------------------------------------------------------------------
# ARMA
# ---------------------------------------------------------------------------

def arma_true_irf(rho: float, gamma: float, h: int) -> float:
    """Response of Y_{t+h} to a unit impulse in X_t for the ARMA(1,1) process.

    Iterated multiplication keeps the exact recursion value(h) = rho *
    value(h-1) for h >= 2.
    """
    if h < 0:
        raise NegativeHorizon("horizon must be >= 0")
    if h == 0:
        return 1.0
    value = rho + gamma
    for _ in range(h - 1):
        value *= rho
    return value


# ---------------------------------------------------------------------------
# Regime-switching growth model
# ---------------------------------------------------------------------------

def dsge_true_irf(config: DsgeConfig, phi, s: int, h: int) -> float:
    """Exact conditional effect of X_t on Y_{t+h} given S_{t-1} = s.

    The derivative of income with respect to the shock is

        nu B(S_t) * prod_{j=1..h} A(S_{t+j}) phi(S_{t+j-1}),

    which depends on the state path only, so the conditional effect is its
    expectation over all 2^(h+1) state paths starting from S_{t-1} = s,
    weighted by the transition probabilities.
    """
    if h < 0:
        raise NegativeHorizon("horizon must be >= 0")
    if h > MAX_ENUMERATION_HORIZON:
        raise HorizonTooLarge(
            f"h = {h} exceeds the enumeration guard {MAX_ENUMERATION_HORIZON}"
        )
    P = config.chain().transition
    A = config.productivity()
    impact = config.windfall_impact()
    phi = np.asarray(phi, dtype=float)
    # paths grow one step at a time; prob/value/prev track every branch
    prob = P[s].copy()
    value = impact.copy()
    prev = np.array([0, 1])
    for _ in range(h):
        trans = P[prev]                       # (paths, 2)
        growth = A[None, :] * phi[prev][:, None]
        prob = (prob[:, None] * trans).ravel()
        value = (value[:, None] * growth).ravel()
        prev = np.tile([0, 1], len(prev))
    return float(np.sum(prob * value))


def dsge_true_irf_recursion(config: DsgeConfig, phi, s: int, h: int) -> float:
    """Same conditional effect via the backward Markov recursion.

    M_0 = 1 and M_k(s') = phi(s') * sum_{s''} pi(s', s'') A(s'') M_{k-1}(s'')
    gives the conditional effect sum_{s'} pi(s, s') nu B(s') M_h(s').
    """
    if h < 0:
        raise NegativeHorizon("horizon must be >= 0")
    P = config.chain().transition
    A = config.productivity()
    impact = config.windfall_impact()
    phi = np.asarray(phi, dtype=float)
    M = np.ones(2)
    for _ in range(h):
        M = phi * (P @ (A * M))
    return float(P[s] @ (impact * M))


# ---------------------------------------------------------------------------
# Smooth transition VAR
# ---------------------------------------------------------------------------

@dataclass
class EffectRecord:
    """Marginal effect of the first structural shock at one observation."""

    t: int
    horizon: int
    value: float
    state_lag1: float


def effects_to_csv(records, path) -> None:
    with open(path, "w") as fh:
        fh.write("t,h,effect,state_lag1\n")
        for r in records:
            fh.write(f"{r.t},{r.horizon},{r.value:.17g},{r.state_lag1:.17g}\n")


def _require_stvar_latents(panel: SeriesPanel, config: StvarConfig):
    needed = [f"y{i}" for i in range(config.n)] + [f"e{i}" for i in range(config.n)]
    needed.append("F")
    missing = [k for k in needed if k not in panel.latents]
    if missing:
        raise MissingLatents(f"panel lacks latent columns {missing}")
    if "state_sd" not in panel.meta or "state_mean" not in panel.meta:
        raise MissingLatents("panel lacks state standardization constants")
    path = np.column_stack([panel.latents[f"y{i}"] for i in range(config.n)])
    eps = np.column_stack([panel.latents[f"e{i}"] for i in range(config.n)])
    return path, eps, panel.latents["F"], float(panel.meta["state_sd"])


def _batched_chol_and_sensitivity(covs: np.ndarray, d_cov: np.ndarray):
    """Cholesky factors and directional derivatives for a stack of matrices.

    Solves the linearized factorization identity for every matrix in the
    stack at once, using the same elimination/commutation operators as the
    scalar routine.
    """
    n = covs.shape[-1]
    ops = matrix_calculus_operators(n)
    eye = np.eye(n)
    front = ops.elimination @ (np.eye(n * n) + ops.commutation)
    chols = np.linalg.cholesky(covs)
    # batched M_t = front @ kron(P_t, I) @ elimination'
    kron = np.einsum("tij,kl->tikjl", chols, eye).reshape(
        covs.shape[0], n * n, n * n
    )
    M = front[None] @ kron @ ops.elimination.T[None]
    vh = np.linalg.solve(M, np.broadcast_to(vech(d_cov), (covs.shape[0], len(vech(d_cov))))[..., None])[..., 0]
    # embed each half-vector back as a lower-triangular matrix
    out = np.zeros_like(covs)
    pos = 0
    for j in range(n):
        rows = np.arange(j, n)
        out[:, rows, j] = vh[:, pos:pos + len(rows)]
        pos += len(rows)
    return chols, out


def stvar_marginal_effects(panel: SeriesPanel, config: StvarConfig, h: int):
    """Per-observation derivative of Y_{t+h} with respect to the first shock.

    Implements the three-term recursion for the path derivative: lag
    propagation through the mixed coefficients, the coefficient shift caused
    by the shock moving the future state, and the impact-matrix shift from
    the regime-weighted covariance, linearized through the Cholesky factor.
    Returns one EffectRecord per admissible observation (needs p lags before
    t and h periods after).
    """
    if h < 0:
        raise NegativeHorizon("horizon must be >= 0")
    path, eps, F, state_sd = _require_stvar_latents(panel, config)
    T, n = path.shape
    p, w = config.p, config.state_window
    t0 = max(config.p, 1)
    if T - 1 - h < t0:
        raise HorizonExceedsSample(f"no admissible observations for h = {h}")
    r = config.state_var_index
    d_lags = [lr - le for le, lr in zip(config.lags_expansion, config.lags_recession)]
    d_cov = config.cov_recession - config.cov_expansion
    covs = config.cov_expansion[None] + F[:, None, None] * d_cov[None]
    chols, d_chols = _batched_chol_and_sensitivity(covs, d_cov)
    # per-period precomputations, indexed by response time tau
    shock_shift = np.einsum("tij,tj->ti", d_chols, eps)      # dchol(tau) @ eps_tau
    lag_shift = np.zeros((T, n))                              # sum_k dPi_k @ Y_{tau-k}
    for k in range(1, p + 1):
        lag_shift[k:] += path[:-k] @ d_lags[k - 1].T
    dF_scale = F * (1.0 - F) * (-config.steepness / (w * state_sd))
    psi = [np.zeros((T, n)) for _ in range(h + 1)]            # psi[j][t] aligned at shock time t
    psi[0] = chols[:, :, 0].copy()
    for j in range(1, h + 1):
        m = T - j                                             # valid shock times 0..m-1
        acc = np.zeros((m, n))
        f_tau = F[j:]
        for k in range(1, min(j, p) + 1):
            prev = psi[j - k][:m]
            acc += prev @ config.lags_expansion[k - 1].T
            acc += f_tau[:, None] * (prev @ d_lags[k - 1].T)
        dF = np.zeros(m)
        for k in range(1, w + 1):
            if j - k >= 0:
                dF += psi[j - k][:m, r]
        dF *= dF_scale[j:]
        acc += dF[:, None] * (lag_shift[j:] + shock_shift[j:])
        psi[j][:m] = acc
    ts = np.arange(t0, T - h)
    values = psi[h][ts, config.outcome_index]
    states = panel.state[ts - 1]
    return [
        EffectRecord(int(t), h, float(v), float(s))
        for t, v, s in zip(ts, values, states)
    ]


def stvar_finite_difference_effect(
    panel: SeriesPanel, config: StvarConfig, t: int, h: int, step: float = 1e-4
) -> float:
    """Common-random-number central finite difference of the simulator.

    Re-propagates the path over [t, t+h] with the first structural shock at
    t perturbed by +-step, holding every other shock fixed, and differences
    the outcome at t+h.  Independent of the recursion above: it only uses
    the process definition.
    """
    path, eps, _, state_sd = _require_stvar_latents(panel, config)
    state_mean = float(panel.meta["state_mean"])
    T, n = path.shape
    p, w = config.p, config.state_window
    if t < max(p, w) or t + h > T - 1:
        raise HorizonExceedsSample("observation window not available")
    big_e, big_r = config.lag_blocks()
    big_d = big_r - big_e
    cov_e = config.cov_expansion
    cov_d = config.cov_recession - config.cov_expansion
    r = config.state_var_index
    outs = []
    for sign in (1.0, -1.0):
        work = path[t - max(p, w): t + h + 1].copy()
        off = t - max(p, w)
        for tau in range(t, t + h + 1):
            i = tau - off
            trail = work[i - w: i, r].mean()
            s_lag = (trail - state_mean) / state_sd
            f = 1.0 / (1.0 + math.exp(min(60.0, max(-60.0, config.steepness * s_lag))))
            shock = eps[tau].copy()
            if tau == t:
                shock[0] += sign * step
            lagvec = work[np.arange(i - 1, i - p - 1, -1)].ravel()
            work[i] = (big_e + f * big_d) @ lagvec + np.linalg.cholesky(
                cov_e + f * cov_d
            ) @ shock
        outs.append(work[t + h - off, config.outcome_index])
    return float((outs[0] - outs[1]) / (2 * step))


# ---------------------------------------------------------------------------
# Kinked pass-through closed forms
# ---------------------------------------------------------------------------

@dataclass
class ClosedFormLpIv:
    """Population IV projection coefficients for the kinked pass-through process.

    ``beta0`` is the expansion-state coefficient (equal to the population
    effect), ``beta1`` the interaction coefficient, and ``xi`` the
    state-weighting distortion satisfying beta1 = xi * m.
    """

    beta0: float
    beta1: float
    theta_x_recession: float
    theta_iv_recession: float
    xi: float


def govspend_closed_form(config: GovSpendConfig) -> ClosedFormLpIv:
    """Closed-form IV estimands implied by the kinked pass-through process.

    With cdf mass Phi below the kink: the expansion coefficient is
    m (Phi + (1-Phi)(1-delta)); the recession first stage is
    Phi + (1-Phi)(1-c); and the recession IV coefficient re-weights the
    two effect levels by the pass-through slope.
    """
    mass = norm.cdf(config.kink)
    m, delta, c = config.m, config.delta, config.c
    beta0 = m * (mass + (1 - mass) * (1 - delta))
    theta_x = mass + (1 - mass) * (1 - c)
    theta_iv = m * (mass + (1 - mass) * (1 - delta) * (1 - c)) / theta_x
    xi = theta_iv / m - beta0 / m
    return ClosedFormLpIv(beta0, xi * m, theta_x, theta_iv, xi)


def govspend_decomposition(config: GovSpendConfig, z_grid) -> dict:
    """The three building blocks of the IV estimand on an instrument grid.

    Returns the per-state effect at the realized regressor level, the
    instrument weight curve (a standard normal density), and the per-state
    compliance weights whose state dependence creates the spurious
    interaction term.
    """
    z = np.asarray(z_grid, dtype=float)
    effect = config.m * (1.0 - config.delta * (z >= config.kink))
    theta_x = {0: 1.0, 1: govspend_closed_form(config).theta_x_recession}
    slope1 = 1.0 - config.c * (z >= config.kink)
    return {
        "z": z,
        "effect_expansion": effect,
        "effect_recession": effect.copy(),
        "omega": norm.pdf(z),
        "compliance_expansion": np.ones_like(z) / theta_x[0],
        "compliance_recession": slope1 / theta_x[1],
    }


# ---------------------------------------------------------------------------
# Compliance-group oracle
# ---------------------------------------------------------------------------

def late_oracle(panel: SeriesPanel) -> float:
    """Mean treatment effect over complier units, from stored potential outcomes."""
    for key in ("group", "y0", "y1"):
        if key not in panel.latents:
            raise MissingLatents(f"panel lacks latent column {key!r}")
    compliers = panel.latents["group"] == 2
    if not np.any(compliers):
        raise NoCompliers("sample contains no compliers")
    gain = panel.latents["y1"][compliers] - panel.latents["y0"][compliers]
    return float(np.mean(gain))


# ---------------------------------------------------------------------------
# One-step projection-gap closed form
# ---------------------------------------------------------------------------

def projection_gap_covariance(
    config: DsgeConfig, phi0: float, phi1: float, s: int
) -> float:
    """Conditional covariance driving the one-step VAR/LP projection gap.

    Over the two-point conditional distribution of S_t given S_{t-1} = s,
    Cov[phi(S_t), nu B(S_t)] = pi(s,0) pi(s,1) (phi0 - phi1)(b0 - b1);
    multiplied by Var[X_t] = 1.
    """
    P = config.chain().transition
    impact = config.windfall_impact()
    return float(P[s, 0] * P[s, 1] * (phi0 - phi1) * (impact[0] - impact[1]))
