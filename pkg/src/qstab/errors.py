"""Exception hierarchy shared by all modules."""

__all__ = [
    "QstabError",
    "DimensionError",
    "ShapeError",
    "ValidationError",
    "NumericalError",
    "SingularityError",
    "PreconditionError",
    "TruncationError",
    "ParameterError",
    "UnsupportedDimensionError",
    "StepSizeError",
    "IntegratorError",
    "ConfigError",
]


class QstabError(Exception):
    """Base class for every error raised by qstab."""


class DimensionError(QstabError, ValueError):
    """Array shapes are inconsistent with each other."""


class ShapeError(QstabError, ValueError):
    """A matrix lacks a required structure (e.g. it is not Hermitian)."""


class ValidationError(QstabError, ValueError):
    """Model data violates a structural constraint."""


class NumericalError(QstabError, ArithmeticError):
    """An iterative numerical routine failed."""


class SingularityError(NumericalError):
    """A linear system is singular or too ill-conditioned to solve."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class PreconditionError(QstabError, ValueError):
    """An operation was called outside its domain (e.g. non-Hurwitz F)."""


class TruncationError(QstabError, ValueError):
    """Fock truncation too small for the requested polynomial degree."""


class ParameterError(QstabError, ValueError):
    """A scalar parameter is out of range."""


class UnsupportedDimensionError(QstabError, NotImplementedError):
    """The routine only supports a restricted number of modes."""


class StepSizeError(QstabError, ArithmeticError):
    """Time step too large: the integrator lost trace preservation."""


class IntegratorError(QstabError, ArithmeticError):
    """The integrated density matrix left the set of states."""


class ConfigError(QstabError, ValueError):
    """Malformed configuration document; ``path`` names the bad field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
