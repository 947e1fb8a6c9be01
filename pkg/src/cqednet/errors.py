"""Exception hierarchy; the CLI maps these onto exit codes."""


class CqedError(Exception):
    """Base class for all package errors."""


class ConfigError(CqedError, ValueError):
    """Invalid or inconsistent run configuration."""


class NumericalError(CqedError, ArithmeticError):
    """A numerical stage failed or produced an unphysical result."""

    def __init__(self, message: str, stage: str | None = None):
        self.stage = stage
        super().__init__(f"[{stage}] {message}" if stage else message)


class DressingError(NumericalError):
    def __init__(self, message: str):
        super().__init__(message, stage="dressing")


class RateError(NumericalError):
    def __init__(self, message: str):
        super().__init__(message, stage="rates")


class PropagationError(NumericalError):
    def __init__(self, message: str):
        super().__init__(message, stage="evolution")


class ProjectionError(NumericalError):
    def __init__(self, message: str):
        super().__init__(message, stage="state-io")
