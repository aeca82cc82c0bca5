"""Standard multivariate Gaussian kernel and its roughness constant."""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

from kmis.errors import InvalidInputError
from kmis.numerics.types import FloatArray


def gaussian_kernel_rows(u: FloatArray) -> FloatArray:
    """Evaluate ``(2 pi)^(-d/2) exp(-|u|^2 / 2)`` on each row of an (n, d) array."""
    dim = u.shape[-1]
    squared = np.einsum("...i,...i->...", u, u)
    return np.exp(-0.5 * squared) * (2.0 * math.pi) ** (-0.5 * dim)


def gaussian_kernel(u: npt.ArrayLike) -> float:
    """Evaluate the standard Gaussian density at a single vector ``u``."""
    vector = np.atleast_1d(np.asarray(u, dtype=np.float64))
    return float(gaussian_kernel_rows(vector[None, :])[0])


def kernel_roughness(dim: int) -> float:
    """Return ``R(K) = integral of K(u)^2 du = (4 pi)^(-dim/2)``."""
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}")
    return (4.0 * math.pi) ** (-0.5 * dim)
