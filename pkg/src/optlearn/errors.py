"""Exception hierarchy shared across the package."""


class OptLearnError(Exception):
    """Base class for all errors raised by optlearn."""


class UsageError(OptLearnError, ValueError):
    """An operation was called outside its domain (bad index, bad budget)."""


class InputError(OptLearnError, ValueError):
    """Supplied data is malformed: non-finite values, incomplete tables."""


class NumericalDegeneracyError(OptLearnError, ArithmeticError):
    """A computation hit a degenerate denominator or lost definiteness."""


class FittingError(OptLearnError, RuntimeError):
    """Hyperparameter fitting produced an unusable model.

    The ``diagnostics`` mapping carries whatever the fitter knew at the
    point of failure (eigenvalues, hyperparameters, log-likelihood).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(OptLearnError, ValueError):
    """A run configuration could not be parsed or validated."""
