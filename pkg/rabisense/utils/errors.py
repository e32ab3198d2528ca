"""Exception types shared by the numerical core and the command line.

Argument validation raises plain `ValueError` (or `ConfigError`, which is one);
failures of a numerical method raise a `NumericalError` subclass. The CLI maps
the first family to exit code 2 and the second to exit code 3.
"""
from typing import Optional


class ConfigError(ValueError):
    """A configuration value is missing, unknown, malformed or out of range."""

    def __init__(
        self, message: str, key: Optional[str] = None, lineno: Optional[int] = None
    ) -> None:
        self.key = key
        self.lineno = lineno
        prefix = ""
        if lineno is not None:
            prefix += f"line {lineno}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)


class NumericalError(RuntimeError):
    """A numerical routine did not reach its accuracy contract."""


class EvolutionError(NumericalError):
    def __init__(self, message: str, achieved_tolerance: float) -> None:
        self.achieved_tolerance = achieved_tolerance
        super().__init__(f"{message} (achieved tolerance {achieved_tolerance:.3e})")


class QuadratureError(NumericalError):
    pass


class DivergentSensitivityError(NumericalError):
    """The signal derivative vanishes, so the single-time sensitivity is infinite."""


class FitError(NumericalError):
    pass


class UndefinedSqueezingError(NumericalError, ZeroDivisionError):
    """xi^2 needs <Jx> != 0; states such as twin-Fock have none."""
