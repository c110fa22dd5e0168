"""Exception hierarchy shared by all workbench modules."""


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench."""


class NotAMonomial(WorkbenchError):
    pass


class ZeroCoefficient(WorkbenchError):
    pass


class ZeroParameter(WorkbenchError):
    pass


class ParseError(WorkbenchError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ValidationError(WorkbenchError):
    pass


class InvalidOrder(WorkbenchError):
    pass


class UnsupportedOrder(WorkbenchError):
    """The arrow order cannot be rotated into the form the cycle builder needs."""


class Disconnected(WorkbenchError):
    pass


class EmptyWhite(WorkbenchError):
    pass


class NoCycle(WorkbenchError):
    pass


class RoutingMismatch(WorkbenchError):
    pass


class RoutingError(WorkbenchError):
    pass


class UnknownGenerator(WorkbenchError):
    pass


class UnknownLetter(WorkbenchError):
    pass


class UnsupportedLetter(WorkbenchError):
    pass


class MeasureViolation(WorkbenchError):
    def __init__(self, rule_name, word, before, after):
        super().__init__(
            f"rule {rule_name} did not decrease the measure on {word}: {before} -> {after}"
        )
        self.rule_name = rule_name
        self.word = word
        self.before = before
        self.after = after


class ConfluenceFailure(WorkbenchError):
    pass


class CountMismatch(WorkbenchError):
    def __init__(self, length, expected, actual):
        super().__init__(f"basis count mismatch at length {length}: expected {expected}, got {actual}")
        self.length = length
        self.expected = expected
        self.actual = actual


class ZeroInput(WorkbenchError):
    pass


class SearchExhausted(WorkbenchError):
    pass
