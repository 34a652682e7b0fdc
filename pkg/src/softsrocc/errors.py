"""Exception hierarchy shared by the library and the CLI."""


class SoftSroccError(Exception):
    """Base class for every error raised by softsrocc."""


class LengthMismatch(SoftSroccError, ValueError):
    pass


class NonFinite(SoftSroccError, ValueError):
    pass


class DegenerateVariance(SoftSroccError, ValueError):
    """A vector (or its rank vector) has zero spread, so a correlation is undefined."""


class InvalidConfig(SoftSroccError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class LabelConflict(SoftSroccError, ValueError):
    pass


class ParseError(SoftSroccError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergenceDetected(SoftSroccError, ArithmeticError):
    pass
