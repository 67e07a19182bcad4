"""Exception hierarchy shared by every module of the package."""


class HeydeError(Exception):
    """Base class for all errors raised by :mod:`heyde`."""

    code = "error"


class InvalidOrderError(HeydeError, ValueError):
    code = "invalid-order"


class SizeLimitError(HeydeError):
    code = "size-limit"


class GroupMismatchError(HeydeError, ValueError):
    code = "group-mismatch"


class NotAHomomorphismError(HeydeError, ValueError):
    code = "not-a-homomorphism"


class PreconditionError(HeydeError, ValueError):
    code = "precondition"


class DimensionMismatchError(HeydeError, ValueError):
    code = "dimension-mismatch"


class ConfigError(HeydeError):
    """Raised by the config parser; carries the offending line number."""

    code = "config"

    def __init__(self, message, line=None, witness=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.witness = witness

    def __str__(self):
        if self.line is None:
            return self.message
        return f"line {self.line}: {self.message}"


class ConfigSyntaxError(ConfigError):
    code = "syntax"


class ConfigSemanticError(ConfigError):
    code = "semantic"
