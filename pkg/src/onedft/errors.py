"""Exception types raised across the package."""


class OneDFTError(Exception):
    """Base class for all package errors."""


class InvalidGrid(OneDFTError, ValueError):
    pass


class NotNormalizable(OneDFTError, ValueError):
    pass


class DegeneratePower(OneDFTError, ValueError):
    pass


class DomainMismatch(OneDFTError, ValueError):
    pass


class UnsanctionedIndex(OneDFTError, ValueError):
    """The closed form from V_1 only holds for n = 2**j."""


class NoConvergence(OneDFTError, RuntimeError):
    """An iterative solver hit its iteration cap.

    ``density`` and ``report`` carry the last iterate when available.
    """

    def __init__(self, message, density=None, report=None):
        super().__init__(message)
        self.density = density
        self.report = report


class NonPositiveIterate(OneDFTError, RuntimeError):
    pass


class ConfigError(OneDFTError, ValueError):
    pass
