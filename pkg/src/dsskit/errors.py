"""Exception types shared across the package."""

from __future__ import annotations


class Error(Exception):
    """Base class for all package-specific failures."""


class InvariantViolation(Error):
    """A value failed one of its declared invariants.

    ``invariant`` is a short stable name for the failed check ("trace",
    "hermitian", "positive-semidefinite", "norm", "orthonormal", ...), so
    callers and the CLI can report exactly which contract was broken.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant


class DimensionCapError(Error):
    """A dense matrix would exceed the configured size cap."""


class ImpossibleOutcomeError(Error):
    """A measurement branch has (numerically) zero probability.

    Carries the raw trace so callers can distinguish an exactly impossible
    branch from one lost to numerical noise.
    """

    def __init__(self, raw_trace: float):
        super().__init__(f"outcome never occurs (raw trace {raw_trace:.3e})")
        self.raw_trace = raw_trace


class SearchSpaceTooLarge(Error):
    """A subspace search would enumerate more candidates than allowed."""

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"search would enumerate {count} candidate subspaces "
            f"(cap {cap}); restrict the supplied bases or raise the cap"
        )
        self.count = count
        self.cap = cap


class SchemaError(Error):
    """A document does not match the expected file schema."""


class ProtocolStepError(Error):
    """A protocol step could not be applied to the evolving state."""

    def __init__(self, step_index: int, message: str):
        super().__init__(f"step {step_index}: {message}")
        self.step_index = step_index
