"""Exception types shared across the package."""


class NiraError(Exception):
    """Base class for package errors."""


class ContractViolationError(NiraError, ValueError):
    """An operation was called with arguments violating its preconditions."""


class WeightFormatError(NiraError, ValueError):
    """A weight bundle file could not be parsed; message names the field."""


class NetworkValidationError(NiraError, ValueError):
    """Parsed network data violates structural invariants."""


class TrainingDivergedError(NiraError, RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged: non-finite loss at epoch {epoch}")
        self.epoch = epoch


class InternalConsistencyError(NiraError, RuntimeError):
    """A numerical invariant that should hold by construction was violated."""


class UndefinedDivergenceError(NiraError, ValueError):
    """KL divergence against a zero-variance estimate is undefined."""


class UndefinedPsnrError(NiraError, ValueError):
    """PSNR is undefined for a zero-range reference volume."""
