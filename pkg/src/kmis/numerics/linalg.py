"""Symmetric matrices and their eigendecomposition by cyclic Jacobi rotations.

Action spaces are tiny (a handful of dimensions), so a batched Jacobi solver is
both accurate and fast: one rotation per index pair is applied to every matrix
of a stack at once. ``sym_eig`` is the single-matrix case.

Dependencies: errors, numerics.types
Wired in: metric/mahalanobis.py, reward/hessian.py
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt

from kmis.errors import InvalidInputError
from kmis.numerics.types import FloatArray, IntArray

MAX_DIM: Final[int] = 64
DEFAULT_ZERO_TOL_REL: Final[float] = 1e-8
_SWEEP_TOL: Final[float] = 1e-13
_MAX_SWEEPS: Final[int] = 100


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Immutable real symmetric matrix; construction symmetrizes the input."""

    entries: FloatArray

    def __post_init__(self) -> None:
        raw = np.asarray(self.entries, dtype=np.float64)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:  # noqa: PLR2004
            raise InvalidInputError(f"SymMatrix needs a square 2-D array, got shape {raw.shape}")
        if not 1 <= raw.shape[0] <= MAX_DIM:
            raise InvalidInputError(f"SymMatrix dimension must be in [1, {MAX_DIM}]")
        if not np.all(np.isfinite(raw)):
            raise InvalidInputError("SymMatrix entries must be finite")
        sym = (raw + raw.T) / 2.0
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, dim: int) -> SymMatrix:
        return cls(np.eye(dim))

    @classmethod
    def diag(cls, values: npt.ArrayLike) -> SymMatrix:
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    def to_array(self) -> FloatArray:
        """Return a writable copy of the entries."""
        return np.array(self.entries, copy=True)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in descending order with orthonormal eigenvector columns.

    ``signs`` holds +1, -1 or 0 per eigenvalue after zero classification.
    """

    eigenvalues: FloatArray
    eigenvectors: FloatArray
    signs: IntArray

    @property
    def positive_count(self) -> int:
        return int(np.count_nonzero(self.signs > 0))

    @property
    def negative_count(self) -> int:
        return int(np.count_nonzero(self.signs < 0))

    @property
    def zero_count(self) -> int:
        return int(np.count_nonzero(self.signs == 0))

    def reconstruct(self) -> FloatArray:
        """Return ``V diag(lambda) V^T``."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


@dataclass(frozen=True, eq=False)
class SpectralBatch:
    """Eigendecompositions of a stack of matrices, shapes (n, d) and (n, d, d)."""

    eigenvalues: FloatArray
    eigenvectors: FloatArray
    signs: IntArray

    def __len__(self) -> int:
        return int(self.eigenvalues.shape[0])

    def item(self, index: int) -> EigenDecomposition:
        return EigenDecomposition(
            eigenvalues=self.eigenvalues[index],
            eigenvectors=self.eigenvectors[index],
            signs=self.signs[index],
        )


def _rotate(a: FloatArray, v: FloatArray, p: int, q: int, tol: FloatArray) -> None:
    """Apply one Jacobi rotation annihilating entry (p, q) of every matrix in ``a``."""
    apq = a[:, p, q]
    active = np.abs(apq) > tol
    if not np.any(active):
        return
    safe_apq = np.where(active, apq, 1.0)
    theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe_apq)
    sign = np.where(theta >= 0.0, 1.0, -1.0)
    t = sign / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    cc = c[:, None]
    ss = s[:, None]

    col_p = a[:, :, p].copy()
    col_q = a[:, :, q].copy()
    a[:, :, p] = cc * col_p - ss * col_q
    a[:, :, q] = ss * col_p + cc * col_q
    row_p = a[:, p, :].copy()
    row_q = a[:, q, :].copy()
    a[:, p, :] = cc * row_p - ss * row_q
    a[:, q, :] = ss * row_p + cc * row_q
    a[active, p, q] = 0.0
    a[active, q, p] = 0.0

    vec_p = v[:, :, p].copy()
    vec_q = v[:, :, q].copy()
    v[:, :, p] = cc * vec_p - ss * vec_q
    v[:, :, q] = ss * vec_p + cc * vec_q


def jacobi_eigh(stack: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Diagonalize a stack of symmetric matrices with cyclic Jacobi sweeps.

    Args:
        stack: Array of shape (n, d, d); each matrix must be symmetric and finite.

    Returns:
        ``(eigenvalues, eigenvectors)`` with eigenvalues sorted descending per
        matrix and eigenvectors as columns.

    Raises:
        InvalidInputError: On non-finite entries or a malformed shape.
    """
    a = np.array(stack, dtype=np.float64, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:  # noqa: PLR2004
        raise InvalidInputError(f"Expected a stack of square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("Matrix entries must be finite")
    n, d, _ = a.shape
    v = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    if n == 0:
        return np.zeros((0, d)), v

    tol = _SWEEP_TOL * np.max(np.sum(np.abs(a), axis=2), axis=1)
    pairs = [(p, q) for p in range(d - 1) for q in range(p + 1, d)]
    for _ in range(_MAX_SWEEPS):
        if not pairs:
            break
        off = np.max(np.abs(np.stack([a[:, p, q] for p, q in pairs], axis=1)), axis=1)
        if np.all(off <= tol):
            break
        for p, q in pairs:
            _rotate(a, v, p, q, tol)

    values = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(-values, axis=1, kind="stable")
    values = np.take_along_axis(values, order, axis=1)
    vectors = np.take_along_axis(v, order[:, None, :], axis=2)
    return values, vectors


def classify_signs(eigenvalues: FloatArray, zero_tol_rel: float) -> IntArray:
    """Return +1/-1/0 per eigenvalue; |lambda| below ``zero_tol_rel * max|lambda|`` is zero."""
    magnitude = np.abs(eigenvalues)
    scale = np.max(magnitude, axis=-1, keepdims=True)
    is_zero = (magnitude < zero_tol_rel * scale) | (scale == 0.0)
    signs = np.where(eigenvalues > 0.0, 1, -1)
    return np.where(is_zero, 0, signs).astype(np.int64)


def batch_sym_eig(
    stack: npt.ArrayLike, zero_tol_rel: float = DEFAULT_ZERO_TOL_REL
) -> SpectralBatch:
    """Eigendecompose and sign-classify every matrix of ``stack``."""
    if not zero_tol_rel > 0.0:
        raise InvalidInputError("zero_tol_rel must be positive")
    values, vectors = jacobi_eigh(stack)
    return SpectralBatch(
        eigenvalues=values,
        eigenvectors=vectors,
        signs=classify_signs(values, zero_tol_rel),
    )


def sym_eig(m: SymMatrix, zero_tol_rel: float = DEFAULT_ZERO_TOL_REL) -> EigenDecomposition:
    """Eigendecompose one symmetric matrix.

    Eigenvalues with ``|lambda| < zero_tol_rel * max|lambda|`` are classified as
    zero; an all-zero matrix has every eigenvalue classified as zero.
    """
    return batch_sym_eig(m.entries[None, :, :], zero_tol_rel).item(0)
