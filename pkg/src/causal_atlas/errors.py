"""Exception hierarchy shared across the engine."""


class CausalAtlasError(Exception):
    """Base class for all engine errors."""


class DimensionMismatch(CausalAtlasError):
    pass


class NoConsistentExtension(CausalAtlasError):
    pass


class SingularSubmatrix(CausalAtlasError):
    pass


class InsufficientSamples(CausalAtlasError):
    pass


class NonDiscreteColumn(CausalAtlasError):
    pass


class ConstantColumn(CausalAtlasError):
    pass


class DataContainsMissing(CausalAtlasError):
    pass


class TestMismatch(CausalAtlasError):
    __test__ = False  # keep pytest from collecting the Test* name



class VarianceUnderflow(CausalAtlasError):
    pass


class NonConvergence(CausalAtlasError):
    def __init__(self, message, h_value=None):
        super().__init__(message)
        self.h_value = h_value


class InsufficientLength(CausalAtlasError):
    pass


class SingularInstantaneousSystem(CausalAtlasError):
    pass


class RateOutOfRange(CausalAtlasError):
    pass


class EmptyDataset(CausalAtlasError):
    pass


class AllMissingColumn(CausalAtlasError):
    pass


class AllColumnsConstant(CausalAtlasError):
    pass


class SeriesTooShort(CausalAtlasError):
    pass


class UnknownAlgorithm(CausalAtlasError):
    pass


class ConflictingConstraints(CausalAtlasError):
    pass


class CycleFromConstraints(CausalAtlasError):
    pass


class UnknownFormat(CausalAtlasError):
    pass


class MalformedCsv(CausalAtlasError):
    pass


class NotFound(CausalAtlasError):
    pass


class InvalidPhase(CausalAtlasError):
    pass


class Cancelled(CausalAtlasError):
    """Raised inside iterative solvers when a cancellation token fires."""
