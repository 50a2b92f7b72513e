"""Exception hierarchy shared by every module of the package."""


class ImrcError(Exception):
    """Base class for all errors raised by :mod:`imrc`."""


class InvalidConfigError(ImrcError, ValueError):
    pass


class InvalidInputError(ImrcError, ValueError):
    pass


class ShapeError(ImrcError, ValueError):
    pass


class DomainError(ImrcError, ValueError):
    pass


class EmptyTaskError(ImrcError, ValueError):
    pass


class EmptyStateError(ImrcError, ValueError):
    pass


class InsufficientHistoryError(ImrcError, ValueError):
    pass


class InsufficientDataError(ImrcError, ValueError):
    """A task holds too few samples for the requested split."""

    def __init__(self, message, task=None):
        super().__init__(message)
        self.task = task


class ParseError(ImrcError, ValueError):
    """Malformed input row; ``row`` is the 1-based line number in the file."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class StepError(ImrcError, RuntimeError):
    """A step of the streaming loop failed."""

    def __init__(self, message, step, repetition=None):
        super().__init__(f"step {step}: {message}")
        self.step = step
        self.repetition = repetition
