"""Quadratic points on hyperbolic surfaces in projective 3-space."""

from .errors import QuadPointsError
from .trigpoly import HarmonicSubspace, TrigPoly2

__all__ = ["QuadPointsError", "HarmonicSubspace", "TrigPoly2"]
__version__ = "0.1.0"
