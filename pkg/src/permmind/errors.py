"""Exception hierarchy shared by every module."""


class PermMindError(Exception):
    """Base class for all package errors."""


class NotABijection(PermMindError, ValueError):
    pass


class SizeMismatch(PermMindError, ValueError):
    pass


class DomainMismatch(PermMindError, ValueError):
    pass


class InvalidV(PermMindError, ValueError):
    """Raised when a colouring that must be injective is not."""


class OutOfRange(PermMindError, ValueError):
    pass


class CutoffExceeded(PermMindError, ValueError):
    def __init__(self, n, limit, what="exhaustive enumeration"):
        self.n = n
        self.limit = limit
        super().__init__(f"{what} refused: n={n} exceeds cutoff {limit}")


class ParseError(PermMindError, ValueError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class MalformedFeedback(PermMindError, ValueError):
    pass


class InconsistentFeedback(MalformedFeedback):
    """Feedback that no codeword could have produced for the given queries."""
