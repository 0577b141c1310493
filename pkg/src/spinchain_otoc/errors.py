"""Exception types shared across the package."""


class SpinchainError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SpinchainError):
    """Invalid physical parameter or an operation outside its contract."""


class CapacityError(DomainError):
    """Chain too large for dense diagonalization under the configured cap."""


class NumericError(SpinchainError):
    """A numerical routine failed to converge or validate."""


class ResourceBudgetError(SpinchainError):
    """A configured work budget was exceeded (e.g. resonance-scan quadruples)."""

    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count


class NotFoundError(DomainError):
    """A requested feature (threshold crossing, set label) does not exist."""


class UsageError(SpinchainError):
    """Command line is missing required parameters; exits with code 2."""


class FitError(SpinchainError):
    """Least-squares fit failed or was given degenerate data."""


class SweepError(SpinchainError):
    """Every point of a parameter sweep failed."""
