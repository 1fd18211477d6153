"""Exception hierarchy. Every error is a ValueError so callers can catch broadly."""


class SpeclabError(ValueError):
    pass


class InputError(SpeclabError):
    """Invalid matrix, vector or callable input."""


class ConfigurationError(SpeclabError):
    """Impossible or inconsistent configuration."""


class MagnitudeGuardError(ConfigurationError):
    """A construction would leave the double-precision range."""


class SingularMatrixError(SpeclabError):
    pass


class SpectrumError(SpeclabError):
    """The dense eigen/singular value solver did not converge."""


class ExpressionSyntaxError(ConfigurationError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column
