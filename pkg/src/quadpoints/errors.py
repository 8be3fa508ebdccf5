"""Exception types raised across the package."""


class QuadPointsError(ValueError):
    """Base class for all domain errors."""


class IdenticallyZero(QuadPointsError):
    pass


class IdenticallyZeroSystem(QuadPointsError):
    pass


class NotAGraph(QuadPointsError):
    pass


class OriginNotFixed(QuadPointsError):
    pass


class NotAdapted(QuadPointsError):
    pass


class DegenerateQuadraticPoint(QuadPointsError):
    pass


class ChartSingular(QuadPointsError):
    pass


class DegenerateCurve(QuadPointsError):
    pass


class GridTooCoarse(QuadPointsError):
    pass


class MixedClasses(QuadPointsError):
    pass


class DegenerateAlpha(QuadPointsError):
    pass


class NotHyperbolic(QuadPointsError):
    pass


class InconsistentSignature(QuadPointsError):
    pass


class NonTransversal(QuadPointsError):
    pass


class NotAsymptotic(QuadPointsError):
    pass


class DegenerateFrame(QuadPointsError):
    pass


class NonMonotone(QuadPointsError):
    pass


class NotFirstHarmonic(QuadPointsError):
    pass


class NotSecondHarmonic(QuadPointsError):
    pass


class DegenerateInput(QuadPointsError):
    pass
