"""Custom exceptions for the sixwave package."""

from typing import Any


class SixWaveError(Exception):
    """sixwave base exception.

    All sixwave errors inherit from this class.
    Users can catch every library error with `except SixWaveError`.

    Attributes:
        exit_code: Process exit code used by the CLI (1 usage/config, 2 regime, 3 non-convergence)
        details: Structured context for debugging (e.g. the worst node of a failed check)
    """

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        details: dict[str, Any] | None = None,
    ) -> None:
        """Initialize SixWaveError.

        Args:
            message: Error message
            exit_code: CLI exit code associated with this error
            details: Optional structured context
        """
        super().__init__(message)
        self.exit_code = exit_code
        self.details = details


class FieldError(SixWaveError):
    """Field evaluation error.

    Raised for non-finite field values, weighted products that overflow,
    and grid shape mismatches.
    """

    pass


class QuadratureError(SixWaveError):
    """Quadrature setup error (insufficient nodes, degenerate direction)."""

    pass


class TailPolicyError(SixWaveError):
    """An integral endpoint lies outside the time grid and no tail policy was given."""

    pass


class ConfigError(SixWaveError):
    """Configuration or command-line usage error."""

    pass


class RegimeError(SixWaveError):
    """Input data lies outside the regime in which a solver is certified.

    Raised with exit code 2. Common causes:
    - weighted norm of the initial data above r_e, r_ks or r_s
    - empty r_p interval for Maxwellian-centered solves
    - negative data passed to the associated linear problem
    """

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        """Initialize RegimeError with exit code 2."""
        super().__init__(message, exit_code=2, details=details)


class BeginningConditionError(RegimeError):
    """The ordering 0 <= l0 <= l1 <= u1 <= u0 failed at some node.

    `details` holds the worst node: time, x, v and the size of the violation.
    """

    pass


class ConvergenceError(SixWaveError):
    """A solver stopped before reaching its tolerance (exit code 3)."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        """Initialize ConvergenceError with exit code 3."""
        super().__init__(message, exit_code=3, details=details)
