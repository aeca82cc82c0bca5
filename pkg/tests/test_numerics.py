"""Tests for numerics: kernels, truncated normal, symmetric eigendecomposition."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from kmis.errors import DegenerateTruncationError, InvalidInputError
from kmis.numerics.distributions import TruncatedNormal, normal_interval_mass, truncated_normal
from kmis.numerics.kernels import gaussian_kernel, gaussian_kernel_rows, kernel_roughness
from kmis.numerics.linalg import SymMatrix, batch_sym_eig, jacobi_eigh, sym_eig

# ============================================================================
# Gaussian kernel
# ============================================================================


def test_kernel_peak_one_dimension() -> None:
    assert gaussian_kernel([0.0]) == pytest.approx(0.398942, abs=1e-6)


def test_kernel_peak_two_dimensions() -> None:
    assert gaussian_kernel([0.0, 0.0]) == pytest.approx(0.159155, abs=1e-6)


def test_kernel_rows_match_single_evaluations() -> None:
    u = np.array([[0.0, 0.0], [1.0, -1.0], [3.0, 0.5]])
    rows = gaussian_kernel_rows(u)
    assert rows == pytest.approx([gaussian_kernel(row) for row in u])
    assert rows[1] == pytest.approx(math.exp(-1.0) / (2.0 * math.pi))


@pytest.mark.parametrize(("dim", "tol"), [(1, 0.015), (2, 0.03)])
def test_kernel_integrates_to_one(rng: np.random.Generator, dim: int, tol: float) -> None:
    half_width = 6.0
    u = rng.uniform(-half_width, half_width, size=(200_000, dim))
    volume = (2.0 * half_width) ** dim
    assert float(np.mean(gaussian_kernel_rows(u))) * volume == pytest.approx(1.0, abs=tol)


@pytest.mark.parametrize(
    ("dim", "expected"),
    [(1, 0.282095), (2, 0.0795775), (4, 0.00633257)],
)
def test_kernel_roughness(dim: int, expected: float) -> None:
    assert kernel_roughness(dim) == pytest.approx(expected, rel=1e-5)


def test_kernel_roughness_rejects_zero_dim() -> None:
    with pytest.raises(InvalidInputError, match="dim must be >= 1"):
        kernel_roughness(0)


# ============================================================================
# Truncated normal
# ============================================================================


class TestTruncatedNormal:
    """Density, mass and sampling of the truncated normal."""

    def test_half_normal_density_at_zero(self) -> None:
        tn = truncated_normal(0.0, 1.0, 0.0, math.inf)
        assert float(tn.density(0.0)) == pytest.approx(0.797885, abs=1e-6)

    def test_density_is_zero_outside_support(self) -> None:
        tn = truncated_normal(0.0, 1.0, -1.0, 1.0)
        assert float(tn.density(1.5)) == 0.0
        assert float(tn.density(-1.01)) == 0.0

    def test_interval_mass_of_full_support_is_one(self) -> None:
        tn = truncated_normal(0.3, 0.7, -1.0, 1.0)
        assert float(tn.interval_mass(-1.0, 1.0)) == pytest.approx(1.0)
        assert float(tn.interval_mass(-5.0, 5.0)) == pytest.approx(1.0)

    def test_samples_stay_inside_support(self, rng: np.random.Generator) -> None:
        tn = truncated_normal(2.0, 1.0, 0.0, 1.0)
        draws = tn.sample(rng, size=2000)
        assert draws.shape == (2000,)
        assert np.all((draws >= 0.0) & (draws <= 1.0))

    def test_half_normal_sample_mean(self, rng: np.random.Generator) -> None:
        draws = truncated_normal(0.0, 1.0, 0.0, math.inf).sample(rng, size=20_000)
        assert float(np.mean(draws)) == pytest.approx(math.sqrt(2.0 / math.pi), abs=0.02)

    def test_row_wise_means_draw_one_per_row(self, rng: np.random.Generator) -> None:
        rows = TruncatedNormal(mean=np.array([-1.0, 0.0, 1.0]), sd=1.0, lo=-2.0, hi=2.0)
        assert rows.sample(rng).shape == (3,)

    @pytest.mark.parametrize(
        ("mean", "sd", "lo", "hi"),
        [(0.0, 1.0, -1.0, 2.0), (1.5, 0.3, 0.0, 1.0), (0.0, 2.0, -0.5, 0.5)],
    )
    def test_density_integrates_to_one(self, mean: float, sd: float, lo: float, hi: float) -> None:
        grid = np.linspace(lo, hi, 20_001)
        density = truncated_normal(mean, sd, lo, hi).density(grid)
        assert float(trapezoid(density, grid)) == pytest.approx(1.0, abs=1e-4)

    def test_non_positive_sd_rejected(self) -> None:
        with pytest.raises(InvalidInputError, match="sd > 0"):
            truncated_normal(0.0, 0.0, -1.0, 1.0)

    def test_empty_interval_rejected(self) -> None:
        with pytest.raises(InvalidInputError, match="lo < hi"):
            truncated_normal(0.0, 1.0, 1.0, 1.0)

    def test_far_tail_interval_is_degenerate(self) -> None:
        with pytest.raises(DegenerateTruncationError):
            truncated_normal(0.0, 1.0, 50.0, 51.0)


def test_interval_mass_right_tail_is_accurate() -> None:
    mass = normal_interval_mass(np.array([8.0]), np.array([9.0]))
    assert float(mass[0]) == pytest.approx(6.2198e-16, rel=1e-4)


# ============================================================================
# Symmetric matrices and the Jacobi eigensolver
# ============================================================================


class TestSymMatrix:
    """Construction rules for SymMatrix."""

    def test_symmetrizes_input(self) -> None:
        m = SymMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
        assert m.entries[0, 1] == pytest.approx(1.0)
        assert m.entries[1, 0] == pytest.approx(1.0)

    def test_rejects_non_square(self) -> None:
        with pytest.raises(InvalidInputError, match="square"):
            SymMatrix(np.zeros((2, 3)))

    def test_rejects_non_finite(self) -> None:
        with pytest.raises(InvalidInputError, match="finite"):
            SymMatrix(np.array([[1.0, np.nan], [np.nan, 1.0]]))

    def test_rejects_oversized(self) -> None:
        with pytest.raises(InvalidInputError, match="dimension"):
            SymMatrix.identity(65)

    def test_entries_are_read_only(self) -> None:
        m = SymMatrix.identity(2)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0
        copy = m.to_array()
        copy[0, 0] = 5.0
        assert m.entries[0, 0] == 1.0


def test_jacobi_matches_lapack(rng: np.random.Generator) -> None:
    raw = rng.standard_normal((8, 5, 5))
    stack = raw + np.swapaxes(raw, 1, 2)
    values, vectors = jacobi_eigh(stack)
    expected = np.sort(np.linalg.eigvalsh(stack), axis=1)[:, ::-1]
    np.testing.assert_allclose(values, expected, atol=1e-10)
    for i in range(stack.shape[0]):
        v = vectors[i]
        np.testing.assert_allclose(v.T @ v, np.eye(5), atol=1e-10)
        np.testing.assert_allclose((v * values[i]) @ v.T, stack[i], atol=1e-10)


def test_jacobi_reconstructs_random_matrices(rng: np.random.Generator) -> None:
    for d in range(2, 7):
        raw = rng.standard_normal((200, d, d))
        stack = raw + np.swapaxes(raw, 1, 2)
        values, vectors = jacobi_eigh(stack)
        assert np.all(np.diff(values, axis=1) <= 0.0)
        gram = np.einsum("nki,nkj->nij", vectors, vectors)
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(d), gram.shape), atol=1e-10)
        rebuilt = np.einsum("nik,nk,njk->nij", vectors, values, vectors)
        np.testing.assert_allclose(rebuilt, stack, atol=1e-10)


def test_sym_eig_of_swap_matrix() -> None:
    eig = sym_eig(SymMatrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
    assert eig.eigenvalues.tolist() == pytest.approx([1.0, -1.0])
    root = 1.0 / math.sqrt(2.0)
    first, second = eig.eigenvectors[:, 0], eig.eigenvectors[:, 1]
    np.testing.assert_allclose(np.abs(first), [root, root], atol=1e-12)
    np.testing.assert_allclose(first[0] * first[1], 0.5, atol=1e-12)
    np.testing.assert_allclose(np.abs(second), [root, root], atol=1e-12)
    np.testing.assert_allclose(second[0] * second[1], -0.5, atol=1e-12)
    np.testing.assert_allclose(eig.reconstruct(), [[0.0, 1.0], [1.0, 0.0]], atol=1e-12)


def test_jacobi_rejects_non_finite() -> None:
    with pytest.raises(InvalidInputError):
        jacobi_eigh(np.array([[[1.0, np.inf], [np.inf, 1.0]]]))


def test_sym_eig_descending_with_signs() -> None:
    eig = sym_eig(SymMatrix.diag([-2.0, 2.0]))
    assert eig.eigenvalues.tolist() == pytest.approx([2.0, -2.0])
    assert eig.positive_count == 1
    assert eig.negative_count == 1
    assert eig.zero_count == 0
    np.testing.assert_allclose(eig.reconstruct(), np.diag([-2.0, 2.0]), atol=1e-12)


def test_sym_eig_relative_zero_classification() -> None:
    eig = sym_eig(SymMatrix.diag([1.0, 1e-12]))
    assert eig.positive_count == 1
    assert eig.zero_count == 1


def test_all_zero_matrix_is_all_zero_signs() -> None:
    batch = batch_sym_eig(np.zeros((2, 3, 3)))
    assert np.all(batch.signs == 0)
    assert batch.item(1).zero_count == 3
