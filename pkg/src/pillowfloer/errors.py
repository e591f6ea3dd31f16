"""Exception types raised across the package."""


class PillowError(Exception):
    """Base class; the CLI maps it to exit code 1."""


class NonTransverseCrossing(PillowError):
    pass


class NonClosedLoop(PillowError):
    pass


class NonCoprime(PillowError):
    pass


class BadEpsilon(PillowError):
    pass


class NonTransverse(PillowError):
    pass


class WindowTooSmall(PillowError):
    pass


class NonIntegralDegree(PillowError):
    pass


class NonGenericVertex(PillowError):
    pass


class EqualLines(PillowError):
    pass


class ChainMismatch(PillowError):
    pass


class DifferentComponents(PillowError):
    pass


class UnknownGenerator(PillowError):
    pass


class WindowExhausted(PillowError):
    pass


class DifferentialNotSquareZero(PillowError):
    pass


class NotMonotonic(PillowError):
    pass


class InvalidSpec(PillowError):
    pass


class SingularPoint(PillowError):
    pass


class SeedMiss(PillowError):
    pass


class AmbiguousConjugation(PillowError):
    pass


class UnfoldJump(PillowError):
    pass


class InvalidCurve(PillowError):
    pass
