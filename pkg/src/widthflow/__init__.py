"""Contraction of convex surfaces by curvature speeds, with sweepout width tracking."""

__version__ = "0.1.0"

from . import errors
from .flow import FlowSample, FlowTrace, StepControl, check_pinching_monotone, make_state, run_flow
from .geom import AxiSurface, TriMesh, axi_to_mesh, curvatures_axi, curvatures_mesh, icosphere, pinching_ratio
from .speed import SpeedSpec, ConditionReport, check_conditions, check_lower_bound, evaluate, gradient, make_speed
from .verify import (
    InequalityReport,
    energy_derivative_stability,
    extinction_bound_check,
    geodesic_energy_decay_check,
    powered_energy_decay_check,
    run_checks,
    width_decay_check,
)
from .width import (
    SurfaceCurve,
    Sweepout,
    WidthEstimate,
    birkhoff_tighten,
    build_sweepout,
    curve_energy,
    curve_length,
    curve_to_obj,
    default_axes,
    geodesic_residual,
    make_width_probe,
    tighten_sweepout,
    total_curvature,
    transport_curve,
    turning_angles,
    width_estimate,
)

__all__ = [
    "errors",
    "__version__",
    "AxiSurface",
    "TriMesh",
    "axi_to_mesh",
    "curvatures_axi",
    "curvatures_mesh",
    "icosphere",
    "pinching_ratio",
    "SpeedSpec",
    "ConditionReport",
    "check_conditions",
    "check_lower_bound",
    "evaluate",
    "gradient",
    "make_speed",
    "FlowSample",
    "FlowTrace",
    "StepControl",
    "check_pinching_monotone",
    "make_state",
    "run_flow",
    "InequalityReport",
    "energy_derivative_stability",
    "extinction_bound_check",
    "geodesic_energy_decay_check",
    "powered_energy_decay_check",
    "run_checks",
    "width_decay_check",
    "SurfaceCurve",
    "Sweepout",
    "WidthEstimate",
    "birkhoff_tighten",
    "build_sweepout",
    "curve_energy",
    "curve_length",
    "curve_to_obj",
    "default_axes",
    "geodesic_residual",
    "make_width_probe",
    "tighten_sweepout",
    "total_curvature",
    "transport_curve",
    "turning_angles",
    "width_estimate",
]
