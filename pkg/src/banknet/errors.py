"""Exception hierarchy shared by every banknet module."""


class BanknetError(Exception):
    """Base class for all errors raised by banknet."""


class GraphError(BanknetError, ValueError):
    pass


class DuplicateEdge(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class UnknownNode(GraphError, KeyError):
    pass


class ParseError(BanknetError, ValueError):
    """Input could not be parsed.

    ``line`` is the 1-based line number of the offending record when known,
    ``source`` the file it came from.
    """

    def __init__(self, message, line=None, source=None):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(message)

    def __str__(self):
        where = ""
        if self.source is not None:
            where += f"{self.source}:"
        if self.line is not None:
            where += f"{self.line}:"
        return f"{where} {self.message}" if where else self.message


class MalformedRow(ParseError):
    pass


class UnparseableAmount(ParseError):
    pass


class UnparseableRecord(ParseError):
    pass


class YearOrderViolation(ParseError):
    pass


class DuplicatePeriod(BanknetError, ValueError):
    pass


class SameNode(BanknetError, ValueError):
    pass


class SetTooSmall(BanknetError, ValueError):
    pass


class EmptyInput(BanknetError, ValueError):
    pass


class KeyMismatch(BanknetError, ValueError):
    pass


class EmptyGraph(BanknetError, ValueError):
    pass


class ConvergenceWarning(UserWarning):
    """Iterative solver stopped at its iteration cap before converging."""
