"""Local Mahalanobis metrics built from the reward Hessian's eigenstructure.

For a Hessian with eigenpairs ``(lambda_i, u_i)`` the rescaled spectrum is
``x_i = d_+ * lambda_i`` on positive directions, ``-d_- * lambda_i`` on negative
ones and ``0`` on the null space. The optimal metric normalizes ``x`` to unit
determinant on the nonzero eigenspace; the regularized metric adds a ridge
``eps = epsilon_scale * max|lambda|`` first so the result is positive definite
on the whole action space.

All constructions are batched over a stack of Hessians; the single-matrix
operations are the batch-of-one case.

Dependencies: errors, numerics.linalg
Wired in: estimators/kmis.py, harness/runner.py (metric export), cli.py
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt

from kmis.errors import DegenerateHessianError, InternalConsistencyError, InvalidInputError
from kmis.numerics.linalg import (
    DEFAULT_ZERO_TOL_REL,
    EigenDecomposition,
    SpectralBatch,
    SymMatrix,
    batch_sym_eig,
    sym_eig,
)
from kmis.numerics.types import BoolArray, FloatArray, IntArray

DEFAULT_EPSILON_SCALE: Final[float] = 0.01
DEGENERATE_ABS_TOL: Final[float] = 1e-12
"""Hessians whose largest eigenvalue magnitude is at or below this fall back to the identity."""


def _rescaled_spectrum(eigenvalues: FloatArray, signs: IntArray) -> FloatArray:
    d_pos = np.count_nonzero(signs > 0, axis=-1)[..., None]
    d_neg = np.count_nonzero(signs < 0, axis=-1)[..., None]
    negative = np.where(signs < 0, -d_neg * eigenvalues, 0.0)
    return np.where(signs > 0, d_pos * eigenvalues, negative)


def _difference(a: npt.ArrayLike, b: npt.ArrayLike, dim: int) -> FloatArray:
    diff = np.asarray(a, dtype=np.float64).reshape(-1) - np.asarray(b, dtype=np.float64).reshape(-1)
    if diff.shape[0] != dim:
        raise InvalidInputError(f"Action dimension {diff.shape[0]} != metric dimension {dim}")
    return diff


def mahalanobis_distance(a: npt.ArrayLike, b: npt.ArrayLike, metric: SymMatrix) -> float:
    """``sqrt((a - b)^T A (a - b))`` for a positive-definite ``A``."""
    diff = _difference(a, b, metric.dim)
    eig = sym_eig(metric)
    if eig.zero_count or eig.negative_count:
        raise InvalidInputError("Mahalanobis metric must be positive definite")
    return float(np.sqrt(max(float(diff @ metric.entries @ diff), 0.0)))


# ---------------------------------------------------------------------------
# Optimal metric
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _OptimalParts:
    eig: EigenDecomposition
    nonzero: BoolArray
    rescaled: FloatArray
    alpha: float


def _optimal_parts(hessian: SymMatrix) -> _OptimalParts:
    eig = sym_eig(hessian)
    nonzero = eig.signs != 0
    if not np.any(nonzero):
        raise DegenerateHessianError("Hessian has no nonzero eigenvalue")
    rescaled = _rescaled_spectrum(eig.eigenvalues, eig.signs)
    alpha = float(np.exp(-np.mean(np.log(rescaled[nonzero]))))
    return _OptimalParts(eig=eig, nonzero=nonzero, rescaled=rescaled, alpha=alpha)


def optimal_metric(hessian: SymMatrix) -> SymMatrix:
    """Unit-determinant metric minimizing the leading bias on the nonzero eigenspace.

    Raises:
        DegenerateHessianError: Every eigenvalue is classified as zero.
    """
    parts = _optimal_parts(hessian)
    basis = parts.eig.eigenvectors[:, parts.nonzero]
    scaled = parts.alpha * parts.rescaled[parts.nonzero]
    return SymMatrix((basis * scaled) @ basis.T)


@dataclass(frozen=True)
class DistanceContribution:
    """Share of the squared optimal-metric distance along one eigendirection."""

    eigenvalue: float
    projection: float
    contribution: float


def metric_distance_decomposition(
    a: npt.ArrayLike, target: npt.ArrayLike, hessian: SymMatrix
) -> list[DistanceContribution]:
    """Split ``||a - target||^2`` under the optimal metric by nonzero eigendirection."""
    parts = _optimal_parts(hessian)
    diff = _difference(a, target, hessian.dim)
    result: list[DistanceContribution] = []
    for k in np.flatnonzero(parts.nonzero):
        projection = float(parts.eig.eigenvectors[:, k] @ diff)
        result.append(
            DistanceContribution(
                eigenvalue=float(parts.eig.eigenvalues[k]),
                projection=projection,
                contribution=parts.alpha * float(parts.rescaled[k]) * projection * projection,
            )
        )
    return result


# ---------------------------------------------------------------------------
# Regularized metric
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateMetric:
    """Regularized metric at one state and its factor ``a_hat = l_hat @ l_hat.T``."""

    a_hat: SymMatrix
    l_hat: FloatArray
    beta: float
    gamma: float
    epsilon: float
    basis: FloatArray
    scaled_spectrum: FloatArray
    degenerate: bool

    @property
    def eigenvalues(self) -> FloatArray:
        """Eigenvalues of ``a_hat`` aligned with the columns of ``basis``."""
        if self.degenerate:
            return np.ones(self.a_hat.dim)
        return self.beta * (self.scaled_spectrum + self.epsilon)


@dataclass(frozen=True, eq=False)
class MetricBatch:
    """Regularized metrics for a stack of Hessians; arrays are indexed by sample first."""

    a_hat: FloatArray
    l_hat: FloatArray
    beta: FloatArray
    gamma: FloatArray
    epsilon: FloatArray
    basis: FloatArray
    scaled_spectrum: FloatArray
    degenerate: BoolArray

    def __len__(self) -> int:
        return int(self.a_hat.shape[0])

    def eigenvalues(self) -> FloatArray:
        values = self.beta[:, None] * (self.scaled_spectrum + self.epsilon[:, None])
        return np.where(self.degenerate[:, None], 1.0, values)

    def item(self, index: int) -> StateMetric:
        return StateMetric(
            a_hat=SymMatrix(self.a_hat[index]),
            l_hat=self.l_hat[index],
            beta=float(self.beta[index]),
            gamma=float(self.gamma[index]),
            epsilon=float(self.epsilon[index]),
            basis=self.basis[index],
            scaled_spectrum=self.scaled_spectrum[index],
            degenerate=bool(self.degenerate[index]),
        )


def _factor_diagonal(
    scaled_spectrum: FloatArray, beta: FloatArray, gamma: FloatArray
) -> FloatArray:
    diagonal = beta[..., None] * scaled_spectrum + gamma[..., None]
    if np.any(diagonal < 0.0):
        raise InternalConsistencyError("Negative diagonal entry before the square root")
    return np.sqrt(diagonal)


def regularized_metric_batch(
    hessians: npt.ArrayLike,
    epsilon_scale: float = DEFAULT_EPSILON_SCALE,
    zero_tol_rel: float = DEFAULT_ZERO_TOL_REL,
) -> MetricBatch:
    """Regularized unit-determinant metrics and their factors for a (n, d, d) stack."""
    if not epsilon_scale > 0.0:
        raise InvalidInputError(f"epsilon_scale must be > 0, got {epsilon_scale}")
    spectra: SpectralBatch = batch_sym_eig(hessians, zero_tol_rel)
    values, vectors, signs = spectra.eigenvalues, spectra.eigenvectors, spectra.signs
    n, d = values.shape

    max_abs = np.max(np.abs(values), axis=1)
    degenerate = (max_abs <= DEGENERATE_ABS_TOL) | np.all(signs == 0, axis=1)
    keep = ~degenerate

    rescaled = np.where(keep[:, None], _rescaled_spectrum(values, signs), 0.0)
    epsilon = np.where(keep, epsilon_scale * max_abs, 0.0)
    ridge = np.where(keep[:, None], rescaled + epsilon[:, None], 1.0)
    beta = np.exp(-np.mean(np.log(ridge), axis=1))
    gamma = beta * epsilon

    eye = np.broadcast_to(np.eye(d), (n, d, d))
    basis = np.where(keep[:, None, None], vectors, eye)
    a_hat = np.einsum("nij,nj,nkj->nik", basis, beta[:, None] * ridge, basis)
    a_hat = 0.5 * (a_hat + np.swapaxes(a_hat, 1, 2))
    l_hat = basis * _factor_diagonal(rescaled, beta, gamma)[:, None, :]

    a_hat = np.where(keep[:, None, None], a_hat, eye)
    l_hat = np.where(keep[:, None, None], l_hat, eye)
    beta = np.where(keep, beta, 1.0)
    return MetricBatch(
        a_hat=a_hat,
        l_hat=l_hat,
        beta=beta,
        gamma=np.where(keep, gamma, 0.0),
        epsilon=epsilon,
        basis=basis,
        scaled_spectrum=rescaled,
        degenerate=degenerate,
    )


def regularized_metric(
    hessian: SymMatrix, epsilon_scale: float = DEFAULT_EPSILON_SCALE
) -> StateMetric:
    """Positive-definite unit-determinant metric; identity when the Hessian vanishes."""
    return regularized_metric_batch(hessian.entries[None, :, :], epsilon_scale).item(0)


def transform_matrix(metric: StateMetric) -> FloatArray:
    """Kernel-input transform ``L = U diag(sqrt(beta * x + gamma))``.

    Raises:
        InternalConsistencyError: A diagonal entry is negative before the square root.
    """
    if metric.degenerate:
        return np.eye(metric.a_hat.dim)
    diagonal = _factor_diagonal(
        metric.scaled_spectrum, np.asarray(metric.beta), np.asarray(metric.gamma)
    )
    return metric.basis * diagonal[None, :]


def transform_stack(
    hessians: npt.ArrayLike, epsilon_scale: float = DEFAULT_EPSILON_SCALE
) -> FloatArray:
    """Per-sample transforms ``L_hat`` for a (n, d, d) Hessian stack."""
    return regularized_metric_batch(hessians, epsilon_scale).l_hat
