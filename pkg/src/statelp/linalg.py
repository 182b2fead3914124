"""Dense regression and matrix-calculus kernels used by every other module.

All least-squares problems are solved through a rank-revealing SVD
(``numpy.linalg.lstsq``) rather than explicit normal equations; with 30-lag
designs the normal equations square the condition number, which is exactly
where they break.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import (
    AllZeroWeights,
    DimensionMismatch,
    NotPositiveDefinite,
    RankDeficient,
    SingularCrossMoment,
    SingularOperator,
)

#: Singular values below RANK_TOL times the largest are treated as zero.
RANK_TOL = 1e-10


@dataclass
class RegressionFit:
    """Result of a linear regression.

    Attributes
    ----------
    coefficients : ndarray, shape (k,)
        Estimated slope vector.
    residuals : ndarray, shape (n_obs,)
        ``response - design @ coefficients``.
    n_obs : int
        Number of observations used.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    n_obs: int


def _as_matrix(design) -> np.ndarray:
    design = np.asarray(design, dtype=float)
    if design.ndim == 1:
        design = design[:, None]
    if design.ndim != 2:
        raise DimensionMismatch(f"design must be 2-D, got ndim={design.ndim}")
    return design


def solve_lstsq(design: np.ndarray, response: np.ndarray) -> np.ndarray:
    """Rank-checked least squares; ``response`` may be 1-D or 2-D (multi-RHS).

    Raises
    ------
    RankDeficient
        If the numerical rank of ``design`` is below its column count.
    """
    design = _as_matrix(design)
    response = np.asarray(response, dtype=float)
    if response.shape[0] != design.shape[0]:
        raise DimensionMismatch(
            f"{design.shape[0]} rows in design vs {response.shape[0]} responses"
        )
    coef, _, rank, _ = np.linalg.lstsq(design, response, rcond=RANK_TOL)
    if rank < design.shape[1]:
        raise RankDeficient(f"numerical rank {rank} < {design.shape[1]} columns")
    return coef


def ols(design, response) -> RegressionFit:
    """Ordinary least squares of ``response`` on the columns of ``design``."""
    design = _as_matrix(design)
    response = np.asarray(response, dtype=float).ravel()
    coef = solve_lstsq(design, response)
    return RegressionFit(coef, response - design @ coef, design.shape[0])


def wls(design, response, weights) -> RegressionFit:
    """Weighted least squares; equals OLS on rows scaled by sqrt(weight).

    Residuals are reported on the original (unscaled) rows.
    """
    design = _as_matrix(design)
    response = np.asarray(response, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if len(weights) != design.shape[0] or len(response) != design.shape[0]:
        raise DimensionMismatch("weights/response length must match design rows")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    if not np.any(weights > 0):
        raise AllZeroWeights("all regression weights are zero")
    root = np.sqrt(weights)
    coef = solve_lstsq(design * root[:, None], response * root)
    return RegressionFit(coef, response - design @ coef, design.shape[0])


def tsls(instruments, regressors, response) -> RegressionFit:
    """Just-identified two-stage least squares.

    With a square instrument block the estimator reduces to
    ``(Z'X)^{-1} Z'y``; residuals are orthogonal to the instruments by
    construction.
    """
    Z = _as_matrix(instruments)
    X = _as_matrix(regressors)
    y = np.asarray(response, dtype=float).ravel()
    if Z.shape != X.shape:
        raise DimensionMismatch(f"instrument block {Z.shape} vs regressors {X.shape}")
    if len(y) != X.shape[0]:
        raise DimensionMismatch("response length must match regressor rows")
    G = Z.T @ X
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0] or s[0] == 0.0:
        raise SingularCrossMoment("instrument-regressor cross moment is singular")
    coef = np.linalg.solve(G, Z.T @ y)
    return RegressionFit(coef, y - X @ coef, X.shape[0])


def cholesky_lower(sigma) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive-definite matrix."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise DimensionMismatch("sigma must be square")
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if np.max(np.abs(sigma - sigma.T)) > 1e-10 * scale:
        raise NotPositiveDefinite("matrix is not symmetric within tolerance")
    try:
        return np.linalg.cholesky((sigma + sigma.T) / 2.0)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(str(err)) from None


@dataclass
class MatrixCalculusOperators:
    """Duplication, elimination and commutation matrices of order ``n``.

    Using column-major (Fortran) vec ordering:

    * ``duplication @ vech(A) == vec(A)`` for symmetric ``A``,
    * ``elimination @ vec(A) == vech(A)`` for any ``A``,
    * ``commutation @ vec(A) == vec(A.T)`` for any ``A``.
    """

    duplication: np.ndarray
    elimination: np.ndarray
    commutation: np.ndarray


@lru_cache(maxsize=None)
def _operators(n: int):
    m = n * (n + 1) // 2
    dup = np.zeros((n * n, m))
    elim = np.zeros((m, n * n))
    comm = np.zeros((n * n, n * n))
    pos = 0
    for j in range(n):
        for i in range(j, n):
            dup[j * n + i, pos] = 1.0
            dup[i * n + j, pos] = 1.0
            elim[pos, j * n + i] = 1.0
            pos += 1
    for i in range(n):
        for j in range(n):
            comm[i * n + j, j * n + i] = 1.0
    dup.setflags(write=False)
    elim.setflags(write=False)
    comm.setflags(write=False)
    return dup, elim, comm


def matrix_calculus_operators(n: int) -> MatrixCalculusOperators:
    """Build the duplication/elimination/commutation operators of order ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dup, elim, comm = _operators(int(n))
    return MatrixCalculusOperators(dup, elim, comm)


def vech(matrix: np.ndarray) -> np.ndarray:
    """Column-major half-vectorization (lower triangle including diagonal)."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    return np.concatenate([matrix[j:, j] for j in range(n)])


def unvech_lower(v: np.ndarray, n: int) -> np.ndarray:
    """Embed a half-vector back as a lower-triangular matrix."""
    out = np.zeros((n, n))
    pos = 0
    for j in range(n):
        out[j:, j] = v[pos:pos + (n - j)]
        pos += n - j
    return out


def chol_sensitivity_operator(chol_factor: np.ndarray) -> np.ndarray:
    """Square operator M with vech(d sigma) = M @ vech(d chol).

    ``M = L (I + K) (P kron I) L'`` where ``P`` is the lower Cholesky factor;
    this is the linearization of ``sigma = P P'`` restricted to
    lower-triangular perturbations.
    """
    n = chol_factor.shape[0]
    dup, elim, comm = _operators(n)
    eye = np.eye(n * n)
    return elim @ (eye + comm) @ np.kron(chol_factor, np.eye(n)) @ elim.T


def cholesky_derivative(sigma, d_sigma) -> np.ndarray:
    """Directional derivative of the lower Cholesky factor.

    Returns ``d chol(sigma + eps * d_sigma)/d eps`` at ``eps = 0``.  The
    half-vectorized derivative solves the linearized factorization identity;
    the result is embedded back as a lower-triangular matrix (the Cholesky
    factor stays lower triangular along the perturbation path).
    """
    sigma = np.asarray(sigma, dtype=float)
    d_sigma = np.asarray(d_sigma, dtype=float)
    if sigma.shape != d_sigma.shape:
        raise DimensionMismatch("sigma and d_sigma must have identical shapes")
    chol = cholesky_lower(sigma)
    op = chol_sensitivity_operator(chol)
    try:
        vh = np.linalg.solve(op, vech(d_sigma))
    except np.linalg.LinAlgError as err:
        raise SingularOperator(str(err)) from None
    return unvech_lower(vh, sigma.shape[0])
