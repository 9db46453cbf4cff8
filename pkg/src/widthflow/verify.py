"""Inequality checks with measured margins.

Each check measures the left-hand side of one decay or extinction bound on a
concrete surface and packs it into an :class:`InequalityReport` together with
the bound, the tolerance used, and enough context to rerun it.  Checks never
clamp or rescale a failing measurement; a negative margin is the result.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    InsufficientSamples,
    InsufficientStep,
    NoGeodesicFound,
    NonPositiveCurvature,
    NotExtinct,
)
from .flow import EXTINCT, FlowTrace
from .geom import TriMesh, curvatures_mesh, inradius_mesh, pinching_ratio
from .speed import SpeedSpec
from .width import (
    SurfaceCurve,
    build_sweepout,
    curve_energy,
    curve_length,
    geodesic_residual,
    tighten_sweepout,
    total_curvature,
    transport_curve,
    turning_angles,
)

FOUR_PI = 4.0 * np.pi
DEFAULT_RESIDUAL_THRESHOLD = 0.1
DEFAULT_EPS_MESH = 0.03


@dataclass(frozen=True)
class InequalityReport:
    """One measured inequality: passes iff lhs <= rhs + tol.

    ``margin`` is rhs - lhs, so positive margins are comfortable passes and
    the JSON field ``pass`` (a keyword in Python, hence ``passed`` here)
    always equals ``lhs <= rhs + tol``.
    """

    name: str
    lhs: float
    rhs: float
    tol: float = 0.0
    context: dict = dc_field(default_factory=dict)
    margin: float = dc_field(init=False)
    passed: bool = dc_field(init=False)

    def __post_init__(self) -> None:
        if not np.isfinite(self.lhs) or not np.isfinite(self.rhs):
            raise ValueError(f"{self.name}: non-finite sides {self.lhs}, {self.rhs}")
        object.__setattr__(self, "margin", self.rhs - self.lhs)
        object.__setattr__(self, "passed", bool(self.lhs <= self.rhs + self.tol))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
            "tol": self.tol,
            "context": self.context,
        }


def _pinching_constant(field, spec: SpeedSpec) -> float:
    if spec.shape in ("convex", "linear"):
        return 1.0
    return pinching_ratio(field, spec)


def _tightened_geodesic(mesh, axis, slice_count, sweeps, threshold):
    sw = build_sweepout(mesh, axis, slice_count)
    tight, _ = tighten_sweepout(sw, mesh, sweeps)
    energies = [curve_energy(c) for c in tight.slices]
    geo = tight.slices[int(np.argmax(energies))]
    residual = geodesic_residual(geo, mesh)
    if residual > threshold:
        raise NoGeodesicFound(
            f"residual {residual:.3g} above threshold {threshold:.3g} "
            f"after {sweeps} sweeps")
    return geo, residual


def _default_step(mesh: TriMesh, spec: SpeedSpec) -> float:
    return 1e-3 * inradius_mesh(mesh) ** (spec.degree_k + 1)


def _energy_rate(geo, spec, field, h):
    plus = curve_energy(transport_curve(geo, spec, field, h))
    minus = curve_energy(transport_curve(geo, spec, field, -h))
    return (plus - minus) / (2.0 * h), plus, minus


def _curvature_chain_reports(geo: SurfaceCurve) -> list[dict]:
    """Fenchel and Cauchy-Schwarz steps for the tightened curve.

    The polygonal stand-ins are total turning angle for the curvature
    integral and angle-squared over dual edge length for its square; the
    Cauchy-Schwarz comparison between them is exact up to rounding.
    """
    angles = turning_angles(geo)
    xyz = geo.xyz
    seg = np.roll(xyz, -1, axis=0) - xyz
    lens = np.linalg.norm(seg, axis=1)
    lens = lens[lens > 0.0]
    dual = 0.5 * (lens + np.roll(lens, 1))
    length = float(lens.sum())
    total = float(angles.sum())
    square = float(np.sum(angles**2 / dual))
    fenchel = InequalityReport(
        name="fenchel", lhs=2.0 * np.pi, rhs=total, tol=1e-6,
        context={"curve_points": len(geo)})
    cauchy = InequalityReport(
        name="cauchy-schwarz", lhs=total**2, rhs=length * square, tol=1e-9,
        context={"curve_length": length})
    return [fenchel.to_dict(), cauchy.to_dict()]


def geodesic_energy_decay_check(
    mesh: TriMesh,
    spec: SpeedSpec,
    h: float | None = None,
    axis=(0.0, 0.0, 1.0),
    slice_count: int = 33,
    sweeps: int = 200,
    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD,
) -> InequalityReport:
    """Energy decay rate of a tightened geodesic against -4 pi / (n C0).

    Tightens the longest slice of a sweepout to a near-geodesic, transports
    it by +-h along the flow, and compares the central difference quotient
    of energy with the decay bound.  The Fenchel and Cauchy-Schwarz links of
    the underlying chain are reported under ``context["sub_reports"]``.
    """
    field = curvatures_mesh(mesh)
    if not field.is_convex():
        raise NonPositiveCurvature("surface must be strictly convex")
    c0 = _pinching_constant(field, spec)
    if h is None:
        h = _default_step(mesh, spec)
    if h <= 0.0:
        raise InsufficientStep("central difference step must be positive")
    geo, residual = _tightened_geodesic(mesh, axis, slice_count, sweeps,
                                        residual_threshold)
    rate, e_plus, e_minus = _energy_rate(geo, spec, field, h)
    bound = -FOUR_PI / (spec.n * c0)
    context = {
        "speed": spec.name, "C0": c0, "h": h,
        "geodesic_residual": residual,
        "geodesic_length": curve_length(geo),
        "energy": 0.5 * (e_plus + e_minus),
        "sub_reports": _curvature_chain_reports(geo),
    }
    return InequalityReport(name="geodesic-energy-decay", lhs=rate, rhs=bound,
                            context=context)


def powered_energy_decay_check(
    mesh: TriMesh,
    spec: SpeedSpec,
    h: float | None = None,
    axis=(0.0, 0.0, 1.0),
    slice_count: int = 33,
    sweeps: int = 200,
    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD,
) -> InequalityReport:
    """Decay of E^((k+1)/2) for a degree-k speed along a tightened geodesic.

    At k = 1 the bound coincides with the plain energy decay bound, which
    pins the two code paths together.  The quotient of E^(k+1) is recorded
    in the context but carries no bound of its own.
    """
    field = curvatures_mesh(mesh)
    if not field.is_convex():
        raise NonPositiveCurvature("surface must be strictly convex")
    k = spec.degree_k
    if k < 1:
        raise ValueError(f"degree must be >= 1, got {k}")
    c0 = _pinching_constant(field, spec)
    if h is None:
        h = _default_step(mesh, spec)
    if h <= 0.0:
        raise InsufficientStep("central difference step must be positive")
    geo, residual = _tightened_geodesic(mesh, axis, slice_count, sweeps,
                                        residual_threshold)
    plus = curve_energy(transport_curve(geo, spec, field, h))
    minus = curve_energy(transport_curve(geo, spec, field, -h))
    power = 0.5 * (k + 1)
    rate = (plus**power - minus**power) / (2.0 * h)
    bound = -((k + 1) / (spec.n * c0) ** k) * (2.0 * np.pi) ** power
    context = {
        "speed": spec.name, "degree_k": k, "C0": c0, "h": h,
        "geodesic_residual": residual,
        "raw_power_quotient": (plus ** (k + 1) - minus ** (k + 1)) / (2.0 * h),
    }
    return InequalityReport(name="powered-energy-decay", lhs=rate, rhs=bound,
                            context=context)


def width_decay_check(
    trace: FlowTrace,
    C0: float,
    tol: float | None = None,
    eps_mesh: float = DEFAULT_EPS_MESH,
) -> list[InequalityReport]:
    """Forward difference quotients of width against -4 pi / (n C0).

    One report per quotient plus one for the integrated bound
    W(t) <= W(0) - 4 pi t / (n C0).  When no tolerance is given each
    quotient gets 2 * eps_mesh * W(0) / gap, charging the estimator noise
    of both endpoints to the time gap between them.
    """
    times, widths = trace.width_series()
    if len(times) < 3:
        raise InsufficientSamples(
            f"need at least 3 width samples, got {len(times)}")
    n = trace.meta.get("n", 2)
    bound = -FOUR_PI / (n * C0)
    w0 = float(widths[0])
    reports = []
    digits = len(str(len(times) - 2))
    for i in range(len(times) - 1):
        gap = float(times[i + 1] - times[i])
        if gap <= 0.0:
            continue
        quotient = float(widths[i + 1] - widths[i]) / gap
        tol_i = tol if tol is not None else 2.0 * eps_mesh * w0 / gap
        reports.append(InequalityReport(
            name=f"width-decay-quotient-{i:0{digits}d}",
            lhs=quotient, rhs=bound, tol=tol_i,
            context={"t0": float(times[i]), "t1": float(times[i + 1]),
                     "w0": float(widths[i]), "w1": float(widths[i + 1])}))
    excess = widths + (FOUR_PI / (n * C0)) * times
    worst = int(np.argmax(excess))
    reports.append(InequalityReport(
        name="width-decay-integrated",
        lhs=float(excess[worst]), rhs=w0,
        tol=tol if tol is not None else 2.0 * eps_mesh * w0,
        context={"worst_t": float(times[worst]), "samples": len(times)}))
    return reports


def extinction_bound_check(trace: FlowTrace, C0: float) -> InequalityReport:
    """Extinction time against n C0 W(0) / (4 pi)."""
    if trace.termination != EXTINCT or trace.extinction_time is None:
        raise NotExtinct(f"trace terminated with {trace.termination}")
    times, widths = trace.width_series()
    if len(times) == 0:
        raise InsufficientSamples("no width samples recorded")
    n = trace.meta.get("n", 2)
    w0 = float(widths[0])
    return InequalityReport(
        name="extinction-bound",
        lhs=float(trace.extinction_time),
        rhs=n * C0 * w0 / FOUR_PI,
        context={"W0": w0, "t_first_width": float(times[0]),
                 "termination": trace.termination})


def energy_derivative_stability(
    c1: SurfaceCurve,
    c2: SurfaceCurve,
    spec: SpeedSpec,
    field,
    h: float,
) -> float:
    """Ratio of the energy-rate difference to the Sobolev distance of curves.

    Both curves are treated as maps from the uniformly sampled circle, so
    they must carry the same number of points.  Identical curves return 0.
    The ratio is a calibration constant for how fast nearby curves can
    separate in first variation; nothing is asserted against it here.
    """
    if h <= 0.0:
        raise InsufficientStep("central difference step must be positive")
    if len(c1) != len(c2):
        raise ValueError("curves must share a sample count for the distance")
    rate1, _, _ = _energy_rate(c1, spec, field, h)
    rate2, _, _ = _energy_rate(c2, spec, field, h)
    num = abs(rate1 - rate2)
    if num == 0.0:
        return 0.0
    dtheta = 2.0 * np.pi / len(c1)
    diff = c1.xyz - c2.xyz
    d1 = (np.roll(c1.xyz, -1, axis=0) - c1.xyz) / dtheta
    d2 = (np.roll(c2.xyz, -1, axis=0) - c2.xyz) / dtheta
    sobolev = np.sqrt(np.sum(
        (np.sum(diff**2, axis=1) + np.sum((d1 - d2)**2, axis=1)) * dtheta))
    sup_speed = float(np.max(np.sum(d2**2, axis=1)))
    return float(num / (sobolev * (1.0 + sup_speed)))


def run_checks(checks, jobs: int = 1) -> list[InequalityReport]:
    """Evaluate no-argument check callables, keeping the given order.

    Each callable returns a report or a list of reports; results are
    flattened in input order so the output is deterministic regardless of
    how many workers ran them.
    """
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda f: f(), checks))
    else:
        results = [f() for f in checks]
    flat: list[InequalityReport] = []
    for r in results:
        flat.extend(r if isinstance(r, list) else [r])
    return flat
