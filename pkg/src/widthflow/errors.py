"""Exception types shared across the package."""
from __future__ import annotations


class WidthflowError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatch(WidthflowError):
    """Input has the wrong number of curvature components."""


class NonPositiveCurvature(WidthflowError):
    """A curvature argument left the positive cone."""


class ShapeHypothesisUnmet(WidthflowError):
    """An operation requiring a convex (or linear) speed was given a concave one."""


class UnknownSpeed(WidthflowError):
    """Requested speed name is not registered."""


class ConvexityLost(WidthflowError):
    """A principal radius of curvature became non-positive."""


class InitialNotConvex(WidthflowError):
    """The starting surface of a flow is not strictly convex."""


class CentroidOutside(WidthflowError):
    """Surface centroid failed the containment test."""


class FitRankDeficient(WidthflowError):
    """Local quadric fit for mesh curvature is rank deficient or flat."""


class TangledMesh(WidthflowError):
    """A mesh step inverted at least one triangle."""


class EmptySlice(WidthflowError):
    """A sweepout plane produced no usable cross-section."""


class ProjectionFailed(WidthflowError):
    """Closest-point projection onto the mesh did not converge near the surface."""


class NoGeodesicFound(WidthflowError):
    """Tightening did not reach the requested geodesic residual."""


class NotExtinct(WidthflowError):
    """The flow trace did not terminate by extinction."""


class InsufficientSamples(WidthflowError):
    """Too few recorded samples to evaluate a decay check."""


class InsufficientStep(WidthflowError):
    """A finite-difference probe step must be strictly positive."""


class ConfigError(WidthflowError):
    """Invalid or inconsistent experiment configuration."""
