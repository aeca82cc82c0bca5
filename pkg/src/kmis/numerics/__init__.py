"""Dense linear algebra and probability primitives for small action spaces."""

from kmis.numerics.distributions import TruncatedNormal, normal_cdf, normal_pdf, truncated_normal
from kmis.numerics.kernels import gaussian_kernel, gaussian_kernel_rows, kernel_roughness
from kmis.numerics.linalg import (
    DEFAULT_ZERO_TOL_REL,
    EigenDecomposition,
    SpectralBatch,
    SymMatrix,
    batch_sym_eig,
    jacobi_eigh,
    sym_eig,
)

__all__ = [
    "DEFAULT_ZERO_TOL_REL",
    "EigenDecomposition",
    "SpectralBatch",
    "SymMatrix",
    "TruncatedNormal",
    "batch_sym_eig",
    "gaussian_kernel",
    "gaussian_kernel_rows",
    "jacobi_eigh",
    "kernel_roughness",
    "normal_cdf",
    "normal_pdf",
    "sym_eig",
    "truncated_normal",
]
