"""Exception hierarchy shared by the library and the CLI."""


class FuncObsError(Exception):
    """Base class for all errors raised by funcobs."""


class InvalidInputError(FuncObsError, ValueError):
    """Malformed, inconsistent or non-finite input."""


class NotDiagonalizableError(FuncObsError):
    """The state matrix has a defective eigenvalue.

    Eigenstructure-based routes refuse such matrices; the rank-based
    predicates remain available.
    """


class UnsupportedError(FuncObsError):
    """The request falls outside what the library can decide."""


class NumericalDegeneracyError(FuncObsError):
    """A construction failed its own post-verification."""

    def __init__(self, message: str, condition_number: float | None = None):
        super().__init__(message)
        self.condition_number = condition_number
