"""Exceptions raised by the free-field engine and the script front end."""


class FreeFieldError(Exception):
    """Base class for every error raised by the package."""


class DomainError(FreeFieldError):
    """An operation was applied outside its domain (wrong mode, system or weight)."""


class InvalidMode(FreeFieldError):
    """A mode variable lies outside the creation range or the index range."""


class NotInvertible(FreeFieldError):
    """A coefficient has no inverse in its ring."""


class NotInvertibleChange(FreeFieldError):
    """A coordinate change has a singular Jacobian at the origin."""


class NoConstant(FreeFieldError):
    """Sampled values are not proportional with a single constant."""


class ResourceBound(FreeFieldError):
    """A computation ran out of its configured truncation, window or order."""


class TruncationUnderflow(ResourceBound):
    """A truncated power series is not known to the order a result needs."""


class WindowExhausted(ResourceBound):
    """A Laurent-degree window kept growing without the ranks stabilizing."""


class FlowNotRational(ResourceBound):
    """A flow coefficient could not be certified as a rational function of t."""


class ScriptError(FreeFieldError):
    """Parse or name error in a script; carries the source position."""

    def __init__(self, message, line=None, column=None, length=1):
        self.message, self.line, self.column, self.length = message, line, column, length
        if line is not None:
            message = "Line {0}, column {1}: {2}".format(line, column, message)
        super(ScriptError, self).__init__(message)

    def diagnostic(self):
        return {
            "severity": "error",
            "message": self.message,
            "line": self.line,
            "column": self.column,
            "length": self.length,
        }
