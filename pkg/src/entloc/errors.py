"""Exception types raised across the package."""


class EntlocError(ValueError):
    """Base class for all package errors."""


# linalg
class NonHermitianInput(EntlocError):
    pass


class NonUnitaryInput(EntlocError):
    pass


class NoConvergence(EntlocError, ArithmeticError):
    pass


class DegenerateSpectrum(EntlocError, ArithmeticError):
    pass


# states / localization
class SupportTooLarge(EntlocError):
    pass


class NotNormalized(EntlocError):
    pass


class InsufficientPoints(EntlocError):
    pass


# entanglement
class DimensionMismatch(EntlocError):
    pass


class InvalidQubitIndex(EntlocError):
    pass


class InvalidDensityMatrix(EntlocError):
    pass


# theory
class OutOfRange(EntlocError):
    pass


class ModeUnavailable(EntlocError):
    pass


# models
class TooLarge(EntlocError):
    pass


class DegenerateGamma(EntlocError):
    pass


class NotPowerOfTwo(EntlocError):
    pass


# harness
class SpecError(EntlocError):
    pass


class NoTheoryAvailable(EntlocError):
    pass


class SampleError(EntlocError):
    """Kernel failure while processing one sample; carries the sample index."""

    def __init__(self, index, cause):
        super().__init__(f"sample {index}: {cause}")
        self.index = index
        self.cause = cause
