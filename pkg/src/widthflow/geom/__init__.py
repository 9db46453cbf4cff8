"""Geometry backends: axisymmetric support functions and triangle meshes."""
from .curvature import CurvatureField, pinching_ratio
from .axisym import (
    AxiSurface,
    principal_radii,
    curvatures_axi,
    meridian_points,
    volume_and_centroid_z,
    inradius_axi,
    read_axi_csv,
    write_axi_csv,
)
from .mesh import (
    TriMesh,
    icosphere,
    axi_to_mesh,
    curvatures_mesh,
    inradius_mesh,
    read_off,
    write_off,
    read_obj,
    write_obj,
    read_mesh,
)

__all__ = [
    "CurvatureField",
    "pinching_ratio",
    "AxiSurface",
    "principal_radii",
    "curvatures_axi",
    "meridian_points",
    "volume_and_centroid_z",
    "inradius_axi",
    "read_axi_csv",
    "write_axi_csv",
    "TriMesh",
    "icosphere",
    "axi_to_mesh",
    "curvatures_mesh",
    "inradius_mesh",
    "read_off",
    "write_off",
    "read_obj",
    "write_obj",
    "read_mesh",
]
