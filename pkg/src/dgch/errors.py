"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, operator, model or run configuration.

    ``field`` names the offending setting (dotted path) when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class NonFiniteError(OverflowError):
    """A right-hand side or stage value contains inf/nan."""


class UndefinedRatioError(ZeroDivisionError):
    """An inequality ratio has a vanishing denominator."""


class InconclusiveError(RuntimeError):
    """A verification could not reach a verdict (e.g. a run stopped early)."""
