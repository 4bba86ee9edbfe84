"""Exception types raised across the package."""


class FockMetrologyError(Exception):
    """Base class for all package errors."""


class TruncationError(FockMetrologyError):
    """A state carries too much probability near the Fock cutoff."""


class SpaceMismatch(FockMetrologyError):
    """Operands live in different Fock spaces or have incompatible shapes."""


class OutOfRange(FockMetrologyError, ValueError):
    """A parameter lies outside its admissible range."""


class NotPathSymmetric(FockMetrologyError):
    """The variance formula for the QFI would overestimate the information."""


class NotPositive(FockMetrologyError):
    """A density matrix has eigenvalues below the positivity tolerance."""


class DegenerateState(FockMetrologyError):
    """A ratio in the Mandel decomposition has a vanishing denominator."""


class ZeroInformation(FockMetrologyError):
    """The Fisher information is zero, so the Cramér-Rao bound is infinite."""


class DerivativeInconsistent(FockMetrologyError):
    """Finite-difference derivatives disagree between step h and h/2."""


class Unachievable(FockMetrologyError):
    """No admissible parameters reach the requested mean photon number."""


class ZeroLikelihood(FockMetrologyError):
    """A sampled outcome has zero likelihood everywhere on the phase grid."""


class GridTooSmall(FockMetrologyError):
    """The phase-space grid misses part of the Wigner function."""


class GridMismatch(FockMetrologyError):
    """Two Wigner grids do not share the same sample points."""


class ConfigError(FockMetrologyError, ValueError):
    """Invalid run configuration."""
