"""Exception types shared across the package.

The CLI maps InvalidInputError to exit code 1 (usage/config problems) and
NumericalFailure subclasses to exit code 2.
"""


class SynapseCascadeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SynapseCascadeError, ValueError):
    """Arguments violate a documented precondition."""


class NumericalFailure(SynapseCascadeError, RuntimeError):
    """A numerical procedure could not produce a trustworthy result."""


class NonConvergenceError(NumericalFailure):
    """An iterative procedure hit its cap without meeting its target."""


class UnidentifiableError(NumericalFailure):
    """A fitted parameter has no influence on the observations."""


class UndefinedSNRError(NumericalFailure):
    """SNR requested from a state with zero null spread (e.g. empty array)."""


class IngestionError(NumericalFailure):
    """A data file could not be parsed into the expected structure."""
