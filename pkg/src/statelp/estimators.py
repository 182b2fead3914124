"""Local projections, LP-IV and state-dependent VAR impulse responses.

Conventions shared by every estimator here:

* the state column of a panel holds S_t; estimators lag it internally by
  ``state_lag`` (default one), so timing lives in exactly one place;
* with ``demean=True`` (default) regressions absorb level terms: plain
  projections demean outcome and shock, state-interacted projections also
  include the f(S) main-effect block (per-state intercepts in the binary
  case), and VAR fits carry per-state intercepts.  Shocks are mean zero and
  independent of the lagged state, so this leaves every estimand unchanged
  while removing the state-dependent outcome level from the noise.  Use
  ``demean=False`` for exact no-intercept algebra;
* ties at a binary threshold go to the high state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .dgp import MarkovChain, SeriesPanel
from .exceptions import (
    AllZeroWeights,
    DegenerateInteraction,
    InsufficientStateObservations,
    ModelSequenceMismatch,
    SampleTooShort,
    StateSpaceMismatch,
    WeakFirstStage,
)
from .linalg import RANK_TOL, cholesky_lower, ols, solve_lstsq, tsls, wls

# estimator labels used in IrfSet and CSV output
TRUE = "TRUE"
LP = "LP"
VAR_FIXED = "VAR_FIXED"
VAR_MOVING = "VAR_MOVING"
VAR_BACKSHIFT = "VAR_BACKSHIFT"

# rows of the stacked vector (shock first, outcome second)
_SHOCK, _OUTCOME = 0, 1

_FIXED_KINDS = ("linear", "binary", "logistic", "polynomial", "custom")


@dataclass
class InteractionSpec:
    """State-to-regressor mapping f(S) interacted with the shock.

    ``kind`` selects the functional form:

    * ``"linear"``      f(s) = (1, s)
    * ``"binary"``      f(s) = (1, 1[s >= threshold])
    * ``"logistic"``    f(s) = (1, logistic(steepness * (s - center)))
    * ``"polynomial"``  f(s) = (1, s, ..., s^(degree-1))
    * ``"custom"``      f(s) = (1, interpolated table value)
    * ``"kernel"``      no fixed f; observations are re-weighted by a kernel
      in the distance to ``target_state`` (order 0 locally constant, order 1
      locally linear).
    """

    kind: str
    state_lag: int = 1
    threshold: float = 0.5
    steepness: float = 1.0
    center: float = 0.0
    degree: int = 2
    target_state: float = 0.0
    bandwidth: float | None = None
    kernel: str = "gaussian"
    order: int = 0
    table_states: np.ndarray | None = None
    table_values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _FIXED_KINDS + ("kernel",):
            raise ValueError(f"unknown interaction kind {self.kind!r}")
        if self.state_lag < 1:
            raise ValueError("state_lag must be >= 1")
        if self.kind == "polynomial" and self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")
        if self.kind == "kernel":
            if self.kernel not in ("gaussian", "epanechnikov"):
                raise ValueError(f"unknown kernel {self.kernel!r}")
            if self.order not in (0, 1):
                raise ValueError("kernel order must be 0 or 1")
            if self.bandwidth is not None and self.bandwidth <= 0:
                raise ValueError("bandwidth must be positive")
        if self.kind == "custom":
            if self.table_states is None or self.table_values is None:
                raise ValueError("custom spec needs table_states and table_values")
            self.table_states = np.asarray(self.table_states, dtype=float)
            self.table_values = np.asarray(self.table_values, dtype=float)

    # -- constructors ------------------------------------------------------

    @classmethod
    def linear(cls, state_lag: int = 1) -> "InteractionSpec":
        return cls("linear", state_lag=state_lag)

    @classmethod
    def binary(cls, threshold: float = 0.5, state_lag: int = 1) -> "InteractionSpec":
        return cls("binary", state_lag=state_lag, threshold=threshold)

    @classmethod
    def logistic(
        cls, steepness: float = 1.0, center: float = 0.0, state_lag: int = 1
    ) -> "InteractionSpec":
        return cls("logistic", state_lag=state_lag, steepness=steepness, center=center)

    @classmethod
    def polynomial(cls, degree: int, state_lag: int = 1) -> "InteractionSpec":
        return cls("polynomial", state_lag=state_lag, degree=degree)

    @classmethod
    def kernel_weight(
        cls,
        target_state: float,
        bandwidth: float | None = None,
        kernel: str = "gaussian",
        order: int = 0,
        state_lag: int = 1,
    ) -> "InteractionSpec":
        return cls(
            "kernel",
            state_lag=state_lag,
            target_state=target_state,
            bandwidth=bandwidth,
            kernel=kernel,
            order=order,
        )

    @classmethod
    def custom_grid(cls, states, values, state_lag: int = 1) -> "InteractionSpec":
        return cls("custom", state_lag=state_lag, table_states=states, table_values=values)

    # -- evaluation --------------------------------------------------------

    @property
    def n_features(self) -> int:
        if self.kind == "polynomial":
            return self.degree
        if self.kind == "kernel":
            return 1 + self.order
        return 2

    def features(self, states) -> np.ndarray:
        """Evaluate f at an array of states; not defined for kernel specs."""
        s = np.asarray(states, dtype=float)
        one = np.ones_like(s)
        if self.kind == "linear":
            return np.column_stack([one, s])
        if self.kind == "binary":
            return np.column_stack([one, (s >= self.threshold).astype(float)])
        if self.kind == "logistic":
            return np.column_stack([one, expit(self.steepness * (s - self.center))])
        if self.kind == "polynomial":
            return np.column_stack([s ** p for p in range(self.degree)])
        if self.kind == "custom":
            return np.column_stack(
                [one, np.interp(s, self.table_states, self.table_values)]
            )
        raise ValueError("kernel specs have no fixed feature map")

    def kernel_values(self, states) -> np.ndarray:
        """Kernel weights in the distance to the target state."""
        s = np.asarray(states, dtype=float)
        bw = self.bandwidth
        if bw is None:
            bw = 0.5 * float(np.std(s))
            if bw == 0.0:
                raise DegenerateInteraction("state has zero variance")
        u = (s - self.target_state) / bw
        if self.kernel == "gaussian":
            return np.exp(-0.5 * u ** 2)
        return np.maximum(0.0, 1.0 - u ** 2)


@dataclass
class LpResult:
    """Coefficients of one projection horizon."""

    horizon: int
    coefficients: np.ndarray
    spec: InteractionSpec | None
    n_obs_used: int

    def effect_at(self, state) -> float:
        """Implied effect of the shock at a given state value."""
        beta = self.coefficients
        if self.spec is None:
            return float(beta[0])
        if self.spec.kind == "kernel":
            local = beta[0]
            if self.spec.order == 1:
                local = local + (state - self.spec.target_state) * beta[1]
            return float(local)
        return float((self.spec.features(np.atleast_1d(state)) @ beta)[0])


def lp_results_to_csv(results, path, states=(0.0, 1.0), estimator: str = LP) -> None:
    """Serialize projection results as ``h,state,estimator,value`` rows."""
    with open(path, "w") as fh:
        fh.write("h,state,estimator,value\n")
        for res in results:
            for s in states:
                fh.write(f"{res.horizon},{s:g},{estimator},{res.effect_at(s):.17g}\n")


# ---------------------------------------------------------------------------
# Local projections
# ---------------------------------------------------------------------------

def _check_feature_variation(F: np.ndarray) -> None:
    sv = np.linalg.svd(F / np.sqrt(len(F)), compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0] or sv[0] == 0.0:
        raise DegenerateInteraction("interaction features have no variation")


def lp_linear(panel: SeriesPanel, H: int, demean: bool = True):
    """Projection of Y_{t+h} on X_t for each horizon h = 0..H."""
    T = panel.n_obs
    if T - H < 2:
        raise SampleTooShort(f"T = {T} leaves no sample at horizon {H}")
    out = []
    for h in range(H + 1):
        y = panel.y[h:]
        x = panel.x[: T - h]
        if demean:
            y = y - y.mean()
            x = x - x.mean()
        fit = ols(x[:, None], y)
        out.append(LpResult(h, fit.coefficients, None, fit.n_obs))
    return out


def lp_state(panel: SeriesPanel, spec: InteractionSpec, H: int, demean: bool = True):
    """Projection of Y_{t+h} on f(S_{t-lag}) * X_t for each horizon.

    Kernel specs instead run the re-weighted regression: observations are
    weighted by the kernel distance of the lagged state to the target, which
    estimates the effect locally at the target state (order 0) or through a
    local line in the state (order 1).
    """
    T = panel.n_obs
    lag = spec.state_lag
    if T - H - lag < spec.n_features + 1:
        raise SampleTooShort(f"T = {T} too short for H = {H} and lag {lag}")
    out = []
    for h in range(H + 1):
        y = panel.y[lag + h:]
        x = panel.x[lag: T - h]
        s = panel.state[: T - h - lag]
        k = spec.n_features
        if spec.kind == "kernel":
            w = spec.kernel_values(s)
            cols = [x]
            if spec.order == 1:
                cols.append((s - spec.target_state) * x)
            if demean:
                cols.append(np.ones_like(x))
            try:
                fit = wls(np.column_stack(cols), y, w)
            except AllZeroWeights:
                raise DegenerateInteraction(
                    "kernel weights vanish on the whole sample"
                ) from None
        else:
            F = spec.features(s)
            _check_feature_variation(F)
            design = F * x[:, None]
            if demean:
                design = np.hstack([design, F])
            fit = ols(design, y)
        out.append(LpResult(h, fit.coefficients[:k], spec, fit.n_obs))
    return out


def lp_iv_state(
    panel: SeriesPanel,
    spec: InteractionSpec,
    H: int,
    demean: bool = True,
    min_first_stage_ratio: float = 10.0,
):
    """Just-identified 2SLS with instruments f(S_{t-lag}) * Z_t.

    Raises WeakFirstStage when any conditional first-stage coefficient is
    below ``min_first_stage_ratio`` times its naive standard error; a typed
    failure beats an exploding ratio.
    """
    if panel.instrument is None:
        raise ValueError("panel has no instrument column")
    if spec.kind == "kernel":
        raise ValueError("kernel-weighted specs are not supported with instruments")
    T = panel.n_obs
    lag = spec.state_lag
    if T - H - lag < spec.n_features + 1:
        raise SampleTooShort(f"T = {T} too short for H = {H} and lag {lag}")
    out = []
    for h in range(H + 1):
        y = panel.y[lag + h:]
        x = panel.x[lag: T - h]
        z = panel.instrument[lag: T - h]
        s = panel.state[: T - h - lag]
        k = spec.n_features
        if demean:
            y = y - y.mean()
            x = x - x.mean()
            z = z - z.mean()
        F = spec.features(s)
        _check_feature_variation(F)
        Zd = F * z[:, None]
        Xd = F * x[:, None]
        for i in range(Zd.shape[1]):
            zi, xi = Zd[:, i], Xd[:, i]
            denom = float(zi @ zi)
            if denom == 0.0:
                raise DegenerateInteraction("instrument column identically zero")
            slope = float(zi @ xi) / denom
            resid = xi - slope * zi
            se = np.sqrt(float(resid @ resid) / len(zi) / denom)
            if se > 0 and abs(slope) < min_first_stage_ratio * se:
                raise WeakFirstStage(
                    f"first-stage ratio {abs(slope) / se:.2f} below "
                    f"{min_first_stage_ratio} in direction {i}"
                )
        if demean:
            # the main-effect block instruments itself (exogenous regressors)
            Zd = np.hstack([Zd, F])
            Xd = np.hstack([Xd, F])
        fit = tsls(Zd, Xd, y)
        out.append(LpResult(h, fit.coefficients[:k], spec, fit.n_obs))
    return out


def project_effects_on_states(records, spec: InteractionSpec) -> np.ndarray:
    """Regress ground-truth effect values on the interaction features.

    This is the population quantity a state-dependent projection estimates,
    computed directly from per-observation effects; comparing it with
    projection coefficients is the core estimand check.
    """
    states = np.array([r.state_lag1 for r in records], dtype=float)
    values = np.array([r.value for r in records], dtype=float)
    F = spec.features(states)
    _check_feature_variation(F)
    return ols(F, values).coefficients


# ---------------------------------------------------------------------------
# State-dependent VAR fitting
# ---------------------------------------------------------------------------

@dataclass
class VarModel:
    """Per-state lag matrices and impact matrix of a stacked (shock, outcome) VAR.

    ``impact[s]`` is lower triangular with a unit (0, 0) entry: the shock is
    its own structural innovation, and the (1, 0) entry is the conditional
    projection of the outcome on the shock in state s.
    """

    n: int
    p: int
    state_lag: int
    lag_matrices: dict
    impact: dict
    resid_cov: dict
    n_obs: dict = field(default_factory=dict)

    def companion(self, s: int) -> np.ndarray:
        n, p = self.n, self.p
        C = np.zeros((n * p, n * p))
        for k, M in enumerate(self.lag_matrices[s]):
            C[:n, k * n:(k + 1) * n] = M
        if p > 1:
            C[n:, : n * (p - 1)] = np.eye(n * (p - 1))
        return C


def _stacked_arrays(panel: SeriesPanel, p: int, state_lag: int):
    W = np.column_stack([panel.x, panel.y])
    T = panel.n_obs
    t0 = max(p, state_lag)
    if T - t0 < 2:
        raise SampleTooShort(f"T = {T} too short for p = {p}")
    response = W[t0:]
    design = np.hstack([W[t0 - k: T - k] for k in range(1, p + 1)])
    cond_state = panel.binary_state()[t0 - state_lag: T - state_lag]
    return response, design, cond_state


def _fit_var_block(response, design, demean):
    """Lag matrices, impact matrix and residual covariance for one subsample."""
    n = response.shape[1]
    p = design.shape[1] // n
    if demean:
        design = np.hstack([design, np.ones((len(design), 1))])
    B = solve_lstsq(design, response)
    lags = [B[(k - 1) * n: k * n, :].T for k in range(1, p + 1)]
    resid = response - design @ B
    cov = resid.T @ resid / len(response)
    centered = response - response.mean(axis=0) if demean else response
    x = centered[:, _SHOCK]
    col0 = centered.T @ x / float(x @ x)
    A = np.zeros((n, n))
    A[:, 0] = col0
    orth = centered - np.outer(x, col0)
    if n > 1:
        A[1:, 1:] = cholesky_lower(orth[:, 1:].T @ orth[:, 1:] / len(response))
    return lags, A, cov


def fit_state_var(
    panel: SeriesPanel, p: int, state_lag: int = 1, demean=True
) -> VarModel:
    """Fit per-state lag and impact matrices, conditioning on S_{t-state_lag}.

    Lag matrices come from equation-by-equation least squares on the state
    subsamples.  The impact matrix is built column-wise from conditional
    projections: its first column regresses each variable on the shock
    within the subsample (unit loading on the shock itself), the remaining
    block is the Cholesky factor of the orthogonalized residual covariance.

    ``demean`` controls how levels are handled: ``True`` gives each state
    subsample its own intercept (the projection-faithful choice, aligned
    with the state-interacted projections); ``"pooled"`` removes the pooled
    sample mean only, mirroring the common practice of estimating
    state-dependent models on globally demeaned data, where state-dependent
    levels leak into the lag coefficients; ``False`` fits raw levels.
    """
    response, design, cond_state = _stacked_arrays(panel, p, state_lag)
    n = response.shape[1]
    if demean == "pooled":
        mean = response.mean(axis=0)
        response = response - mean
        design = design - np.tile(mean, design.shape[1] // n)
        demean = False
    lag_matrices, impact, resid_cov, n_obs = {}, {}, {}, {}
    for s in (0, 1):
        mask = cond_state == s
        count = int(mask.sum())
        if count < 10 * (n * p + 1):
            raise InsufficientStateObservations(
                f"state {s} has {count} rows, need {10 * (n * p + 1)}"
            )
        lags, A, cov = _fit_var_block(response[mask], design[mask], demean)
        lag_matrices[s], impact[s], resid_cov[s], n_obs[s] = lags, A, cov, count
    return VarModel(n, p, state_lag, lag_matrices, impact, resid_cov, n_obs)


def fit_linear_var(panel: SeriesPanel, p: int, demean: bool = True) -> VarModel:
    """Pooled (state-independent) fit, stored under both state keys."""
    response, design, _ = _stacked_arrays(panel, p, 1)
    n = response.shape[1]
    lags, A, cov = _fit_var_block(response, design, demean)
    return VarModel(
        n,
        p,
        1,
        {0: lags, 1: [M.copy() for M in lags]},
        {0: A, 1: A.copy()},
        {0: cov, 1: cov.copy()},
        {0: len(response), 1: len(response)},
    )


# ---------------------------------------------------------------------------
# VAR-implied impulse responses
# ---------------------------------------------------------------------------

def irf_fixed(model: VarModel, s: int, H: int) -> np.ndarray:
    """Impulse response holding the state fixed at s for all horizons."""
    if model.state_lag != 1:
        raise ModelSequenceMismatch("fixed-state response needs a state_lag-1 model")
    C = model.companion(s)
    A = model.impact[s]
    n = model.n
    power = np.eye(C.shape[0])
    out = np.empty(H + 1)
    for h in range(H + 1):
        out[h] = (power[:n, :n] @ A)[_OUTCOME, _SHOCK]
        power = C @ power
    return out


def irf_moving(model: VarModel, chain: MarkovChain, s: int, H: int) -> np.ndarray:
    """Impulse response averaging the lag matrices over future state paths.

    Uses the exact backward recursion H_k(s) = sum_s' pi(s,s') H_{k-1}(s')
    C(s') on companion matrices, then applies the state-s impact matrix.
    """
    if model.state_lag != 1:
        raise ModelSequenceMismatch("moving-state response needs a state_lag-1 model")
    if chain.n_states != 2:
        raise StateSpaceMismatch("model is binary-state; chain is not")
    n = model.n
    comps = {j: model.companion(j) for j in (0, 1)}
    P = chain.transition
    A = model.impact[s]
    cur = {j: np.eye(comps[0].shape[0]) for j in (0, 1)}
    out = np.empty(H + 1)
    out[0] = A[_OUTCOME, _SHOCK]
    for h in range(1, H + 1):
        cur = {
            j: sum(P[j, sp] * cur[sp] @ comps[sp] for sp in (0, 1)) for j in (0, 1)
        }
        out[h] = (cur[s][:n, :n] @ A)[_OUTCOME, _SHOCK]
    return out


def irf_backshift(models, s: int, H: int) -> np.ndarray:
    """Impulse response combining models whose conditioning state shifts back.

    ``models[k]`` must condition on S_{t-1-k}.  Each prediction step then
    projects on the same lagged-state information set, which makes the
    composite response equal the state-dependent projection estimand instead
    of a model-implied path average.
    """
    if len(models) < H + 1:
        raise ModelSequenceMismatch(f"need {H + 1} models, got {len(models)}")
    base = models[0]
    for k, model in enumerate(models[: H + 1]):
        if model.state_lag != k + 1:
            raise ModelSequenceMismatch(
                f"models[{k}] conditions on lag {model.state_lag}, expected {k + 1}"
            )
        if model.n != base.n or model.p != base.p:
            raise ModelSequenceMismatch("models differ in dimension or lag order")
    tilde = [models[0].impact[s]]
    for h in range(1, H + 1):
        acc = np.zeros((base.n, base.n))
        for l in range(1, min(h, base.p) + 1):
            acc += models[h].lag_matrices[s][l - 1] @ tilde[h - l]
        tilde.append(acc)
    return np.array([tilde[h][_OUTCOME, _SHOCK] for h in range(H + 1)])


# ---------------------------------------------------------------------------
# Projection-gap diagnostics
# ---------------------------------------------------------------------------

def projection_gap_moment(panel: SeriesPanel, config, phi0: float, phi1: float, s: int) -> float:
    """Monte Carlo moment of the parameter-forecast-error term, given S_{t-1} = s.

    Estimates E[(phi(S_t) - E[phi(S_t) | S_{t-1}]) nu B(S_t) X_t^2 | S_{t-1} = s]
    from the simulated state path and shocks; nonzero values are exactly what
    makes single-model VAR responses diverge from projections at h = 1.
    """
    states = panel.binary_state()
    P = config.chain().transition
    phi = np.array([phi0, phi1])
    impact = config.windfall_impact()
    mask = states[:-1] == s
    cond_mean = P[s, 0] * phi0 + P[s, 1] * phi1
    s_now = states[1:][mask]
    x_now = panel.x[1:][mask]
    return float(np.mean((phi[s_now] - cond_mean) * impact[s_now] * x_now ** 2))


def one_step_error_moment(panel: SeriesPanel, chain: MarkovChain, s: int) -> float:
    """Conditional moment E[e_{t+1} X_t | S_{t-1} = s] for the delayed-product process.

    The one-step projection error of the outcome given S_t is
    e_{t+1} = Y_{t+1} - E[S_{t-1} | S_t] X_t; its conditional correlation
    with X_t does not vanish, which breaks one-step orthogonality under the
    earlier conditioning set.
    """
    states = panel.binary_state()
    bayes = chain.lagged_state_mean()
    T = panel.n_obs
    mask = states[: T - 2] == s
    x_mid = panel.x[1: T - 1]
    e_next = panel.y[2:] - bayes[states[1: T - 1]] * x_mid
    return float(np.mean((e_next * x_mid)[mask]))


# ---------------------------------------------------------------------------
# Impulse response container
# ---------------------------------------------------------------------------

UNCONDITIONAL = "unconditional"


@dataclass
class IrfSet:
    """Per-horizon values for (state, estimator) pairs, with optional MC errors."""

    horizons: np.ndarray
    values: dict = field(default_factory=dict)
    mc_se: dict = field(default_factory=dict)

    def set(self, state, estimator, values, mc_se=None) -> None:
        values = np.asarray(values, dtype=float)
        if values.shape != self.horizons.shape:
            raise ValueError("values must align with horizons")
        self.values[(str(state), estimator)] = values
        if mc_se is not None:
            self.mc_se[(str(state), estimator)] = np.asarray(mc_se, dtype=float)

    def get(self, state, estimator) -> np.ndarray:
        return self.values[(str(state), estimator)]

    def get_se(self, state, estimator) -> np.ndarray:
        return self.mc_se[(str(state), estimator)]

    def to_csv(self, path, include_se: bool = False) -> None:
        header = "h,state,estimator,value" + (",mc_se" if include_se else "")
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for (state, estimator) in sorted(self.values):
                vals = self.values[(state, estimator)]
                ses = self.mc_se.get((state, estimator))
                for i, h in enumerate(self.horizons):
                    row = f"{int(h)},{state},{estimator},{vals[i]:.17g}"
                    if include_se:
                        se = ses[i] if ses is not None else float("nan")
                        row += f",{se:.17g}"
                    fh.write(row + "\n")
