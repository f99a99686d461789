"""Exception hierarchy shared by all modules."""


class SubbandAdaptError(Exception):
    """Base class for library errors."""


class ValidationError(SubbandAdaptError, ValueError):
    """A configuration or argument violates a documented invariant."""


class InvalidBankSpec(ValidationError):
    pass


class InvalidVariance(ValidationError):
    pass


class InvalidSparsityParam(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class ParseError(SubbandAdaptError):
    """Malformed config file. ``lineno`` is 1-based, or None for overrides."""

    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


class NotPositiveDefinite(SubbandAdaptError, ArithmeticError):
    """Cholesky factorization met a non-positive pivot."""
