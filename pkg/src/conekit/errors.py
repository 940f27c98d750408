"""Exception types shared across the package."""


class ConekitError(Exception):
    """Base class for all conekit errors."""


class NonPositiveHeight(ConekitError):
    """Klein projection requires z > 0."""


class DegenerateTangentPlane(ConekitError):
    """Tangent span is not spacelike (Gram determinant at or below tolerance)."""


class GridMismatch(ConekitError):
    """Operation combined fields living on different grids."""


class NotPositiveDefinite(ConekitError):
    """A metric field that must be Riemannian is not."""


class NotSpacelike(ConekitError):
    """An immersion that must induce a Riemannian metric does not."""


class DefectOutsideCone(ConekitError):
    """Defect field leaves the positive span of the form dictionary."""


class MetricNotRiemannian(ConekitError):
    """Corrugation target metric fails positivity (1/q^2 - eta <= 0)."""


class TargetBelowOne(ConekitError):
    """Amplitude equation target dropped below 1; upstream data is corrupt."""


class IntermediateMetricNotRiemannian(ConekitError):
    """A pipeline stage produced a non-Riemannian intermediate target."""

    def __init__(self, stage, message):
        super().__init__(message)
        self.stage = stage


class SolverDiverged(ConekitError):
    """Iterative elliptic solve failed to reach the requested residual."""


class NoAdmissibleDelta(ConekitError):
    """No dyadic longness scale keeps the defect inside the cone."""


class SearchFailed(ConekitError):
    """Conformal search exhausted its budget; trace attached."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class RelatorNotSatisfied(ConekitError):
    """Root-finding on the surface-group relator defect failed."""


class DegenerateInput(ConekitError):
    """Convex hull input is affinely degenerate."""


class RayMissesHull(ConekitError):
    """Ray casting from the origin misses the (truncated) orbit hull."""


class NotSpacelikeGraph(ConekitError):
    """Graph gradient reaches or exceeds slope 1 somewhere."""


class AlphaNotAboveOne(ConekitError):
    """Rigidity constants require a level bound alpha > 1."""


class ConfigError(ConekitError):
    """Malformed CLI flag or config-file entry."""
