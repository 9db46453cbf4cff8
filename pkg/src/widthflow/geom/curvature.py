"""Principal-curvature fields and the pinching ratio.

A :class:`CurvatureField` stores per-point principal curvatures ordered
``lam1 <= lam2`` together with inward unit normals.  Fields are produced by the
axisymmetric stencil in :mod:`widthflow.geom.axisym` and the quadric fit in
:mod:`widthflow.geom.mesh`; consumers (flow stepping, pinching monitors,
curve transport) treat them uniformly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, NonPositiveCurvature
from ..speed import SpeedSpec

__all__ = ["CurvatureField", "pinching_ratio"]


@dataclass(frozen=True)
class CurvatureField:
    lam1: np.ndarray
    lam2: np.ndarray
    normal_in: np.ndarray

    def __post_init__(self) -> None:
        lam1 = np.asarray(self.lam1, dtype=float)
        lam2 = np.asarray(self.lam2, dtype=float)
        normal = np.asarray(self.normal_in, dtype=float)
        object.__setattr__(self, "lam1", lam1)
        object.__setattr__(self, "lam2", lam2)
        object.__setattr__(self, "normal_in", normal)
        if lam1.shape != lam2.shape or lam1.ndim != 1:
            raise ValueError("lam1 and lam2 must be matching 1-d arrays")
        if normal.shape != (lam1.shape[0], 3):
            raise ValueError(f"normals must have shape ({lam1.shape[0]}, 3), got {normal.shape}")
        if np.any(lam1 > lam2):
            raise ValueError("principal curvatures must be ordered lam1 <= lam2")
        norms = np.linalg.norm(normal, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("inward normals must be unit length to 1e-10")

    def __len__(self) -> int:
        return self.lam1.shape[0]

    @property
    def H(self) -> np.ndarray:
        """Mean curvature magnitude |lam1 + lam2| per point."""
        return np.abs(self.lam1 + self.lam2)

    @property
    def lam(self) -> np.ndarray:
        """Curvature pairs stacked as an (P, 2) array."""
        return np.stack([self.lam1, self.lam2], axis=-1)

    def is_convex(self) -> bool:
        return bool(np.all(self.lam1 > 0.0))


def pinching_ratio(field: CurvatureField, spec: SpeedSpec) -> float:
    """Largest value of |H| / (n F) over the field.

    For a normalized concave speed this is >= 1 everywhere; for the arithmetic
    mean it is identically 1.  The value at the start of a flow is the pinching
    constant carried through the decay estimates.
    """
    if spec.n != 2:
        raise DimensionMismatch(f"field carries 2 curvatures per point but speed has n={spec.n}")
    if not field.is_convex():
        raise NonPositiveCurvature("pinching ratio needs strictly positive curvatures")
    f = np.asarray(spec.evaluator(field.lam), dtype=float)
    return float(np.max(field.H / (spec.n * f)))
