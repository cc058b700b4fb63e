"""Exception types raised across the package."""


class HierClustError(Exception):
    """Base class for all package errors."""


class MetricError(HierClustError):
    pass


class AsymmetricMatrix(MetricError):
    def __init__(self, i, j):
        super().__init__(f"d({i},{j}) != d({j},{i})")
        self.i, self.j = i, j


class NonzeroDiagonal(MetricError):
    def __init__(self, i):
        super().__init__(f"d({i},{i}) != 0")
        self.i = i


class NonpositiveOffDiagonal(MetricError):
    def __init__(self, i, j):
        super().__init__(f"d({i},{j}) <= 0 for distinct points")
        self.i, self.j = i, j


class TriangleViolation(MetricError):
    """``d(i, k) > d(i, j) + d(j, k)`` for the witnessing triple."""

    def __init__(self, i, j, k):
        super().__init__(f"triangle inequality violated: d({i},{k}) > d({i},{j}) + d({j},{k})")
        self.triple = (i, j, k)


class EmptyCluster(HierClustError):
    pass


class NonpositiveFactor(HierClustError):
    pass


class InstanceTooLarge(HierClustError):
    def __init__(self, n, limit):
        super().__init__(f"instance has {n} points, limit is {limit}")
        self.n, self.limit = n, limit


class GroundSetMismatch(HierClustError):
    pass


class InvalidSequence(HierClustError):
    pass


class InvalidHierarchy(HierClustError):
    pass


class KindMismatch(HierClustError):
    pass


class SizeMismatch(HierClustError):
    pass


class SizePreconditionViolated(HierClustError):
    pass


class DistancePreconditionViolated(HierClustError):
    pass


class IncompleteProfile(HierClustError):
    pass


class BadAlpha(HierClustError):
    pass


class KindUnsupported(HierClustError):
    pass


class NestingBoundViolated(HierClustError):
    """A constructive nesting produced a clustering above its certified bound."""


class DepthTooLarge(HierClustError):
    pass


class NoBadClusterAtTopLevel(HierClustError):
    pass


class NotBad(HierClustError):
    pass


class BadSequence(HierClustError):
    pass


class EpsilonOutOfRange(HierClustError):
    pass
