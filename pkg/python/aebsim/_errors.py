from __future__ import annotations

from collections.abc import Sequence


class AebException(Exception):
    """Base class for every error raised by aebsim."""


class InvalidParameter(AebException, ValueError):
    """A physical parameter or setting is outside its valid range."""

    def __init__(self, message: str, *, field: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class ConfigError(InvalidParameter):
    """A scenario file could not be read or contains an invalid entry."""


class SlipUndefined(AebException, ValueError):
    """Practical slip was requested at a speed where it is not defined."""


class ModelValidityError(AebException, ArithmeticError):
    """The vehicle model left its domain of validity (e.g. a non-positive load denominator)."""


class RiccatiError(AebException, ArithmeticError):
    """The continuous algebraic Riccati equation has no usable stabilizing solution."""

    def __init__(self, message: str, eigenvalues: Sequence[complex] = ()) -> None:
        super().__init__(message)
        self.eigenvalues = tuple(eigenvalues)


class SchedulingError(RiccatiError):
    """A gain-schedule point could not be stabilized."""

    def __init__(self, v_ref: float, cause: RiccatiError) -> None:
        message = f"no stabilizing LQR gain at v_ref={v_ref:.3f} m/s: {cause}"
        super().__init__(message, cause.eigenvalues)
        self.v_ref = v_ref
