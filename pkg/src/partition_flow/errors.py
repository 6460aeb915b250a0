"""Exception types raised across the package."""


class PartitionFlowError(Exception):
    """Base class for all package errors."""


class SpectralPole(PartitionFlowError):
    """The spectral parameter sits on a Dirichlet eigenvalue of one arc."""


class EpsilonTooLarge(PartitionFlowError):
    pass


class SpecError(PartitionFlowError):
    """A domain/partition description violates a grid invariant."""


class SlitError(PartitionFlowError):
    pass


class NotAnEigenvector(PartitionFlowError):
    pass


class ConvergenceFailure(PartitionFlowError):
    pass


class FactorizationError(PartitionFlowError):
    pass


class InteriorResonance(PartitionFlowError):
    """``lambda`` is (numerically) an eigenvalue of the decoupled interior block."""


class ToleranceAmbiguity(PartitionFlowError):
    """An eigenvalue is too close to zero to decide its sign."""


class MonotonicityViolation(PartitionFlowError):
    pass


class LevelOnSpectrum(PartitionFlowError):
    pass


class NotEquipartition(PartitionFlowError):
    pass


class EpsilonWindowEmpty(PartitionFlowError):
    pass
