"""Typed errors raised across the package.

Every failure mode that callers may want to branch on gets its own class;
plain ``ValueError`` is reserved for violated argument contracts that no
caller should handle programmatically.
"""


class StateLpError(Exception):
    """Base class for all package-specific errors."""


# --- linear algebra / regression kernels ---

class DimensionMismatch(StateLpError, ValueError):
    """Input array shapes are incompatible."""


class RankDeficient(StateLpError, ValueError):
    """Design matrix has numerical rank below its column count."""


class AllZeroWeights(StateLpError, ValueError):
    """Weighted regression received a weight vector that is identically zero."""


class SingularCrossMoment(StateLpError, ValueError):
    """Instrument-regressor cross-moment matrix is not invertible."""


class NotPositiveDefinite(StateLpError, ValueError):
    """Matrix is not symmetric positive definite."""


class SingularOperator(StateLpError, ValueError):
    """Linearized Cholesky operator cannot be inverted."""


# --- weight curves ---

class DegenerateSample(StateLpError, ValueError):
    """Sample has zero variance, so weights are undefined."""


class NonPositiveSd(StateLpError, ValueError):
    """Standard deviation must be strictly positive."""


class GridMismatch(StateLpError, ValueError):
    """Two curves are defined on different grids."""


# --- simulators ---

class InvalidTransition(StateLpError, ValueError):
    """Transition matrix rows are not probability distributions."""


class ExplosiveRho(StateLpError, ValueError):
    """Autoregressive coefficient lies outside the stationary region."""


class ExplosivePhi(StateLpError, ValueError):
    """State-dependent persistence lies outside the stationary region."""


class ExplosiveSimulation(StateLpError, RuntimeError):
    """Simulated path exceeded the overflow guard."""


class NoConvergence(StateLpError, RuntimeError):
    """Nonlinear solver failed to reach the requested residual."""


class InvalidProbabilities(StateLpError, ValueError):
    """Group probabilities are negative or do not sum to one."""


# --- ground-truth effect computations ---

class NegativeHorizon(StateLpError, ValueError):
    """Impulse response horizon must be non-negative."""


class HorizonTooLarge(StateLpError, ValueError):
    """Exact path enumeration refuses horizons beyond its guard."""


class HorizonExceedsSample(StateLpError, ValueError):
    """Requested horizon leaves no usable observations."""


class MissingLatents(StateLpError, ValueError):
    """Panel does not carry the latent columns this computation needs."""


class NoCompliers(StateLpError, ValueError):
    """Sample contains no complier units."""


# --- estimators ---

class SampleTooShort(StateLpError, ValueError):
    """Not enough observations for the requested horizon and lag structure."""


class DegenerateInteraction(StateLpError, ValueError):
    """Interaction features have no variation in a required direction."""


class WeakFirstStage(StateLpError, RuntimeError):
    """Conditional first stage is statistically indistinguishable from zero."""


class InsufficientStateObservations(StateLpError, ValueError):
    """A state subsample is too small to fit the requested model."""


class ModelSequenceMismatch(StateLpError, ValueError):
    """Backshifted model sequence has inconsistent lags or dimensions."""


class StateSpaceMismatch(StateLpError, ValueError):
    """Markov chain and model are defined on different state spaces."""
