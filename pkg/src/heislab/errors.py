"""Exception hierarchy shared by all heislab modules."""


class HeislabError(Exception):
    """Base class for every error raised by heislab."""


class InputError(HeislabError, ValueError):
    """Invalid argument: wrong dimension, out-of-range parameter, bad spec."""


class ConvergenceError(HeislabError):
    """An iterative solver did not converge.

    ``best`` carries the best-so-far result (certificate, iterate, ...) so
    callers can still inspect what was reached.
    """

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class AliasingError(HeislabError):
    """The requested coefficient window is too small for the symbol supports."""


class TailBoundError(HeislabError):
    """A truncated lattice sum cannot certify the requested accuracy."""

    def __init__(self, msg, required_n_max):
        super().__init__(msg)
        self.required_n_max = required_n_max
