"""Exception hierarchy shared by all modules."""


class BolabError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(BolabError, ValueError):
    """A numerical parameter violates a documented precondition."""


class GridMismatchError(BolabError, ValueError):
    """Two fields that must share a grid live on different grids."""


class DegenerateSpectrumError(BolabError):
    """Two discrete eigenvalues are closer than the simplicity tolerance."""


class NonconvergenceError(BolabError):
    """An iterative solve did not reach its residual tolerance."""


class IllConditionedError(BolabError):
    """A resolvent solve is too badly conditioned to be trusted."""


class BlowUpError(BolabError):
    """The time stepper produced an unbounded solution."""


class PreconditionError(BolabError, ValueError):
    """Inputs are individually valid but jointly unsuitable."""


class ConfigParseError(BolabError, ValueError):
    """A scenario configuration could not be parsed."""


class GridDecayError(BolabError, ValueError):
    """Initial data does not decay enough to live on the chosen grid."""
