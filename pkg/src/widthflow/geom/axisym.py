"""Axisymmetric convex surfaces represented by their support function.

The surface of revolution is described by support samples h(theta) on a
uniform grid of polar normal angles, theta in (0, pi), plus the two pole
values.  Principal radii come from the standard support-function stencil
r1 = h'' + h (meridional) and r2 = h' cot(theta) + h (azimuthal); at the poles
smoothness forces r1 = r2 = h'' + h with an even-reflection ghost node.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CentroidOutside, ConvexityLost
from .curvature import CurvatureField

__all__ = [
    "AxiSurface",
    "principal_radii",
    "curvatures_axi",
    "meridian_points",
    "volume_and_centroid_z",
    "inradius_axi",
    "read_axi_csv",
    "write_axi_csv",
]


@dataclass(frozen=True)
class AxiSurface:
    """Support-function samples of a convex surface of revolution.

    ``theta`` holds the interior grid angles j * pi / n_cells for
    j = 1 .. n_cells - 1; the pole values are the support at theta = 0 and
    theta = pi.  All support values must be positive (the origin lies inside).
    """

    theta: np.ndarray
    h: np.ndarray
    pole_north: float
    pole_south: float

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        h = np.asarray(self.h, dtype=float)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "pole_north", float(self.pole_north))
        object.__setattr__(self, "pole_south", float(self.pole_south))
        if theta.ndim != 1 or theta.shape != h.shape:
            raise ValueError("theta and h must be matching 1-d arrays")
        if theta.size < 3:
            raise ValueError("need at least 3 interior grid angles")
        cells = theta.size + 1
        step = np.pi / cells
        expected = step * np.arange(1, cells)
        if np.max(np.abs(theta - expected)) > 1e-9 * step:
            raise ValueError("grid must be uniform angles j*pi/n_cells for j=1..n_cells-1")
        if not (np.all(h > 0.0) and self.pole_north > 0.0 and self.pole_south > 0.0):
            raise ValueError("support samples must be strictly positive")

    @property
    def n_cells(self) -> int:
        return self.theta.size + 1

    @property
    def delta(self) -> float:
        """Uniform grid spacing in theta."""
        return np.pi / self.n_cells

    def full_theta(self) -> np.ndarray:
        """Grid angles including both poles."""
        return np.concatenate(([0.0], self.theta, [np.pi]))

    def full_h(self) -> np.ndarray:
        """Support samples including both poles."""
        return np.concatenate(([self.pole_north], self.h, [self.pole_south]))

    @classmethod
    def from_full(cls, h_full: np.ndarray) -> "AxiSurface":
        """Build from support samples over the full grid (poles included)."""
        h_full = np.asarray(h_full, dtype=float)
        cells = h_full.size - 1
        theta = np.pi / cells * np.arange(1, cells)
        return cls(theta=theta, h=h_full[1:-1], pole_north=h_full[0], pole_south=h_full[-1])

    @classmethod
    def sphere(cls, radius: float = 1.0, n_theta: int = 128) -> "AxiSurface":
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        return cls.from_full(np.full(n_theta + 1, float(radius)))

    @classmethod
    def spheroid(cls, a: float, c: float, n_theta: int = 128) -> "AxiSurface":
        """Spheroid with equatorial semi-axis a and polar semi-axis c.

        The support function of the ellipsoid with semi-axes (a, a, c) is
        h(theta) = sqrt(a^2 sin^2 theta + c^2 cos^2 theta).
        """
        if a <= 0.0 or c <= 0.0:
            raise ValueError("semi-axes must be positive")
        cells = n_theta
        th = np.pi / cells * np.arange(cells + 1)
        h = np.sqrt((a * np.sin(th)) ** 2 + (c * np.cos(th)) ** 2)
        return cls.from_full(h)

    def translated(self, dz: float) -> "AxiSurface":
        """Same body shifted by dz along the axis (support picks up dz cos)."""
        h = self.full_h() + dz * np.cos(self.full_theta())
        return AxiSurface.from_full(h)

    def scaled(self, factor: float) -> "AxiSurface":
        if factor <= 0.0:
            raise ValueError("scale factor must be positive")
        return AxiSurface.from_full(factor * self.full_h())


def _padded(h_full: np.ndarray) -> np.ndarray:
    """Full-grid samples with even-reflection ghost nodes at both poles."""
    return np.concatenate((h_full[1:2], h_full, h_full[-2:-1]))


def principal_radii(surface: AxiSurface) -> tuple[np.ndarray, np.ndarray]:
    """Principal radii (r1, r2) over the full grid, poles included."""
    h = surface.full_h()
    hp = _padded(h)
    dth = surface.delta
    d2 = (hp[2:] - 2.0 * h + hp[:-2]) / dth**2
    d1 = (hp[2:] - hp[:-2]) / (2.0 * dth)
    r1 = d2 + h
    theta = surface.full_theta()
    r2 = np.empty_like(r1)
    r2[1:-1] = d1[1:-1] * (np.cos(theta[1:-1]) / np.sin(theta[1:-1])) + h[1:-1]
    r2[0] = r1[0]
    r2[-1] = r1[-1]
    return r1, r2


def curvatures_axi(surface: AxiSurface) -> CurvatureField:
    """Principal curvature field on the full grid; raises if convexity fails."""
    r1, r2 = principal_radii(surface)
    worst = min(float(np.min(r1)), float(np.min(r2)))
    if worst <= 0.0:
        raise ConvexityLost(f"principal radius reached {worst:.3e}; surface is no longer convex")
    lam1 = 1.0 / np.maximum(r1, r2)
    lam2 = 1.0 / np.minimum(r1, r2)
    theta = surface.full_theta()
    normal_in = np.column_stack((-np.sin(theta), np.zeros_like(theta), -np.cos(theta)))
    return CurvatureField(lam1=lam1, lam2=lam2, normal_in=normal_in)


def meridian_points(surface: AxiSurface) -> tuple[np.ndarray, np.ndarray]:
    """Boundary meridian (rho, z) recovered from the support function.

    The boundary point with outward normal angle theta is
    x = h * n + h' * t, giving rho = h sin + h' cos and z = h cos - h' sin.
    """
    h = surface.full_h()
    hp = _padded(h)
    dth = surface.delta
    d1 = (hp[2:] - hp[:-2]) / (2.0 * dth)
    theta = surface.full_theta()
    rho = h * np.sin(theta) + d1 * np.cos(theta)
    z = h * np.cos(theta) - d1 * np.sin(theta)
    return rho, z


def volume_and_centroid_z(surface: AxiSurface) -> tuple[float, float]:
    """Solid volume and centroid height by slicing perpendicular to the axis."""
    rho, z = meridian_points(surface)
    r1, _r2 = principal_radii(surface)
    theta = surface.full_theta()
    # -dz/dtheta = r1 sin(theta) >= 0 on a convex body.
    w = rho**2 * r1 * np.sin(theta)
    vol = np.pi * np.trapezoid(w, theta)
    if vol <= 0.0:
        raise CentroidOutside("non-positive enclosed volume")
    moment = np.pi * np.trapezoid(z * w, theta)
    return float(vol), float(moment / vol)


def inradius_axi(surface: AxiSurface) -> float:
    """Largest sphere radius about the centroid fitting under every support plane."""
    _vol, zbar = volume_and_centroid_z(surface)
    r = surface.full_h() - zbar * np.cos(surface.full_theta())
    value = float(np.min(r))
    if value <= 0.0:
        raise CentroidOutside("centroid is not inside the surface")
    return value


def write_axi_csv(surface: AxiSurface, path: str | Path) -> None:
    """Two-column CSV (theta, h) over the full grid, poles included."""
    theta = surface.full_theta()
    h = surface.full_h()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "h"])
        for t, v in zip(theta, h):
            writer.writerow([format(t, ".17g"), format(v, ".17g")])


def read_axi_csv(path: str | Path) -> AxiSurface:
    """Load a surface written by :func:`write_axi_csv`."""
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["theta", "h"]:
        raise ValueError(f"{path}: expected header 'theta,h'")
    data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 5:
        raise ValueError(f"{path}: need at least 5 rows of theta,h pairs")
    theta, h = data[:, 0], data[:, 1]
    if abs(theta[0]) > 1e-12 or abs(theta[-1] - np.pi) > 1e-9:
        raise ValueError(f"{path}: grid must span [0, pi] including both poles")
    return AxiSurface.from_full(h)
