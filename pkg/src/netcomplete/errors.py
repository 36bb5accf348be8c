"""Exception hierarchy shared by all modules."""


class NetCompleteError(Exception):
    """Base class for every error raised by this package."""


class InvalidInstance(NetCompleteError, ValueError):
    pass


class InvalidCompletion(NetCompleteError, ValueError):
    pass


class InconsistentUnion(NetCompleteError, ValueError):
    pass


class IdCollision(NetCompleteError, ValueError):
    pass


class UnknownEntity(NetCompleteError, KeyError):
    def __str__(self):
        # KeyError quotes its argument; keep plain messages
        return str(self.args[0]) if self.args else ""


class FactFormatError(NetCompleteError, ValueError):
    """Problems with fact text. ``line``/``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class FactSyntaxError(FactFormatError):
    pass


class BadNumber(FactFormatError):
    pass


class DuplicateFact(FactFormatError):
    pass


class MissingBounds(FactFormatError):
    pass


class NotInfeasible(NetCompleteError, ValueError):
    pass


class NumericalFailure(NetCompleteError, RuntimeError):
    pass


class PoolTooLarge(NetCompleteError, ValueError):
    pass


class CannotDeactivate(NetCompleteError, RuntimeError):
    pass
