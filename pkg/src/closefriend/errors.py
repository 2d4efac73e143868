"""Exception hierarchy shared by all closefriend modules."""


class CloseFriendError(Exception):
    """Base class for every error raised by this package."""


class GraphParseError(CloseFriendError):
    """Malformed edge-list or embedding record; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class GraphValidationError(CloseFriendError):
    """Graph content violates an invariant (weight range, self-loop, duplicate edge)."""


class ParameterError(CloseFriendError):
    """Numeric parameter outside its documented range."""


class LookupError_(CloseFriendError):
    """A requested edge or node does not exist."""


class StateError(CloseFriendError):
    """Operation invoked on an object that is not yet in the required state."""


class TrainingError(CloseFriendError):
    """Learner preconditions violated (single-class data, empty corpus, ...)."""


class ConfigError(CloseFriendError):
    """Infeasible or inconsistent run/generator configuration."""
