"""Exception types raised across the package."""


class GwmviewError(Exception):
    """Base class for all package errors."""


class DataValidationError(GwmviewError, ValueError):
    """Invalid input data (shape, sign, symmetry, ...)."""


class NonSquareError(DataValidationError):
    pass


class NegativeEntryError(DataValidationError):
    pass


class NonzeroDiagonalError(DataValidationError):
    pass


class AsymmetryError(DataValidationError):
    """Distance matrix asymmetry exceeds the repairable tolerance."""


class NonFiniteInputError(DataValidationError):
    pass


class ZeroSizeError(DataValidationError):
    pass


class ShapeMismatchError(DataValidationError):
    pass


class LengthMismatchError(DataValidationError):
    pass


class EmptyInputError(DataValidationError):
    pass


class ZeroVarianceError(DataValidationError):
    """Constant off-diagonal distances make correlation undefined."""


class EmptyViewsError(DataValidationError):
    pass


class PrototypeCountError(DataValidationError):
    """More prototypes requested than samples available."""


class KTooLargeError(DataValidationError):
    """Neighbor count must be smaller than the sample count."""


class GraphDisconnectedError(GwmviewError):
    """Neighborhood graph split into several components."""


class LinearOtError(GwmviewError):
    """The linear optimal-transport subproblem could not be solved."""


class NumericalError(GwmviewError):
    """Numerical failure (non-convergence in strict mode, degenerate division, ...)."""


class ConfigError(GwmviewError, ValueError):
    """Invalid experiment configuration."""


class InvalidSweepParameterError(ConfigError):
    pass
