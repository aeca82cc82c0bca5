"""Exception hierarchy shared by every kmis module.

Each error carries a stable ``code`` so the CLI and the experiment harness can
tag failed rows without string matching on messages.

Dependencies: (none, leaf module)
Wired in: every module that validates inputs; cli.py → main()
"""

from __future__ import annotations

from collections.abc import Sequence


class KmisError(Exception):
    """Root of all library errors."""

    code: str = "kmis-error"


class InvalidInputError(KmisError, ValueError):
    """Raised when inputs are non-finite, mis-shaped, or outside an operation's domain."""

    code = "invalid-input"


class DegenerateTruncationError(InvalidInputError):
    """Raised when a truncated normal has (numerically) zero mass on its interval."""

    code = "degenerate-truncation"


class DegenerateHessianError(KmisError, ValueError):
    """Raised when a Hessian has no eigenvalue classified as nonzero."""

    code = "degenerate-hessian"


class InternalConsistencyError(KmisError, RuntimeError):
    """Raised when an internal invariant is violated (never caused by user input)."""

    code = "internal-consistency"


class NumericalError(KmisError, ArithmeticError):
    """Raised when a numerical procedure produces non-finite values."""

    code = "numerical"

    def __init__(self, message: str, indices: Sequence[tuple[int, ...]] = ()) -> None:
        super().__init__(message)
        self.indices = list(indices)


class TrainingDivergedError(KmisError, RuntimeError):
    """Raised when the reward-model training loss becomes non-finite."""

    code = "training-diverged"

    def __init__(self, epoch: int) -> None:
        super().__init__(f"Training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


class ModelStateError(KmisError, RuntimeError):
    """Raised when an unfitted reward model is queried."""

    code = "model-state"


class EmptyOverlapError(KmisError, ArithmeticError):
    """Raised when a self-normalized estimator has a zero weight sum."""

    code = "empty-overlap"

    def __init__(self, weight_sum: float) -> None:
        super().__init__(
            f"Self-normalized weight sum is {weight_sum!r}; no logged action overlaps the target"
        )
        self.weight_sum = weight_sum


class DegenerateBiasError(KmisError, ValueError):
    """Raised when the leading bias constant is zero and the optimal bandwidth diverges."""

    code = "degenerate-bias"


class SelectionFailedError(KmisError, RuntimeError):
    """Raised when bandwidth selection has no successful grid evaluation."""

    code = "selection-failed"


class SchemaError(KmisError, ValueError):
    """Raised when a tabular input is missing a required column."""

    code = "schema"

    def __init__(self, column: str, source: str) -> None:
        super().__init__(f"{source}: missing required column {column!r}")
        self.column = column


class DoseBoundsError(KmisError, ValueError):
    """Raised when a therapeutic dose lies outside the configured bounds."""

    code = "dose-bounds"


class AggregationError(KmisError, ValueError):
    """Raised when an aggregation group has no successful record."""

    code = "aggregation"

    def __init__(self, group: str) -> None:
        super().__init__(f"No successful trial records for group {group}")
        self.group = group
