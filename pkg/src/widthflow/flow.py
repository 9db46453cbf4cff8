"""Time integration of the inward flow dx/dt = -F(lambda) n_out.

Two backends share one driver: the axisymmetric support-function form (the
accuracy workhorse; the update is h_j <- h_j - dt * F(lambda(theta_j)) on a
fixed theta grid) and a vertexwise triangle-mesh form.  Both are explicit in
time with an adaptive step from the linearized diffusion bound plus a
displacement cap.

Support values are taken relative to a fixed origin and only ever decrease,
so the bodies are nested along the run by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConvexityLost, InitialNotConvex, TangledMesh
from .geom import (
    AxiSurface,
    CurvatureField,
    TriMesh,
    curvatures_axi,
    curvatures_mesh,
    inradius_axi,
    inradius_mesh,
    pinching_ratio,
)
from .speed import SpeedSpec, speed_gradient

EXTINCT = "Extinct"
CONVEXITY_LOST = "ConvexityLost"
MAX_TIME_REACHED = "MaxTimeReached"

_CSV_HEADER = "t,inradius,sup_pinching,max_speed,width,dwdt_quotient"


@dataclass(frozen=True)
class StepControl:
    """Integration knobs; eps_extinct defaults to 1e-3 x initial inradius."""

    safety: float = 0.2
    eps_extinct: float | None = None
    max_time: float | None = None
    snapshot_stride: int = 4000
    method: str = "euler"
    record_snapshots: bool = False

    def __post_init__(self):
        if not 0.0 < self.safety <= 1.0:
            raise ValueError("safety must lie in (0, 1]")
        if self.eps_extinct is not None and self.eps_extinct <= 0.0:
            raise ValueError("eps_extinct must be positive")
        if self.max_time is not None and self.max_time <= 0.0:
            raise ValueError("max_time must be positive")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")
        if self.method not in ("euler", "rk2"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class FlowState:
    t: float
    surface: AxiSurface | TriMesh
    curvature: CurvatureField
    C0: float


@dataclass(frozen=True)
class FlowSample:
    t: float
    inradius: float
    sup_pinching: float
    max_speed: float
    width: float | None = None
    snapshot: object | None = None


@dataclass
class FlowTrace:
    samples: list[FlowSample]
    termination: str
    extinction_time: float | None
    meta: dict

    def width_series(self) -> tuple[np.ndarray, np.ndarray]:
        """Times and values of the samples where a width probe ran."""
        pairs = [(s.t, s.width) for s in self.samples if s.width is not None]
        if not pairs:
            return np.empty(0), np.empty(0)
        arr = np.asarray(pairs)
        return arr[:, 0], arr[:, 1]

    def to_csv(self, path: str | Path) -> None:
        def fmt(x):
            return "" if x is None else format(x, ".17g")

        lines = [_CSV_HEADER]
        last_width: tuple[float, float] | None = None
        for s in self.samples:
            quotient = None
            if s.width is not None:
                if last_width is not None and s.t > last_width[0]:
                    quotient = (s.width - last_width[1]) / (s.t - last_width[0])
                last_width = (s.t, s.width)
            lines.append(
                ",".join(
                    [fmt(s.t), fmt(s.inradius), fmt(s.sup_pinching), fmt(s.max_speed),
                     fmt(s.width), fmt(quotient)]
                )
            )
        Path(path).write_text("\n".join(lines) + "\n")


def make_state(surface: AxiSurface | TriMesh, spec: SpeedSpec) -> FlowState:
    """Initial flow state at t = 0 with the pinching constant frozen."""
    if isinstance(surface, AxiSurface):
        try:
            field = curvatures_axi(surface)
        except ConvexityLost as exc:
            raise InitialNotConvex(str(exc)) from exc
    elif isinstance(surface, TriMesh):
        field = curvatures_mesh(surface)
        if not field.is_convex():
            raise InitialNotConvex("mesh has non-positive principal curvature")
    else:
        raise TypeError(f"unsupported surface type {type(surface).__name__}")
    return FlowState(t=0.0, surface=surface, curvature=field, C0=pinching_ratio(field, spec))


def step_axi(state: FlowState, spec: SpeedSpec, dt: float) -> FlowState:
    """One explicit Euler step of the support function."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    surf = state.surface
    speed = spec.evaluator(state.curvature.lam)
    try:
        new_surf = AxiSurface.from_full(surf.full_h() - dt * speed)
        field = curvatures_axi(new_surf)
    except (ValueError, ConvexityLost) as exc:
        raise ConvexityLost(f"step to t={state.t + dt:.6g} left the convex cone") from exc
    return replace(state, t=state.t + dt, surface=new_surf, curvature=field)


def step_mesh(state: FlowState, spec: SpeedSpec, dt: float) -> FlowState:
    """One explicit Euler step of the vertex positions."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    mesh = state.surface
    speed = spec.evaluator(state.curvature.lam)
    verts = mesh.vertices + dt * speed[:, None] * state.curvature.normal_in
    new_mesh = mesh.with_vertices(verts)
    flipped = np.einsum("ij,ij->i", new_mesh.face_raw_normals(), mesh.face_raw_normals())
    if np.any(flipped <= 0.0):
        raise TangledMesh(f"{int(np.sum(flipped <= 0.0))} triangles inverted during the step")
    field = curvatures_mesh(new_mesh)
    if not field.is_convex():
        raise ConvexityLost(f"step to t={state.t + dt:.6g} left the convex cone")
    return replace(state, t=state.t + dt, surface=new_mesh, curvature=field)


def adaptive_dt(state: FlowState, spec: SpeedSpec, ctl: StepControl) -> float:
    """Stable explicit step: linearized-diffusion bound plus displacement cap.

    The diffusion coefficient at a node is sum_j dF/dlambda_j * lambda_j^2 in
    support form (where curvature is a second difference of h) and
    sum_j dF/dlambda_j in vertex form (where it is a second difference of
    position); the cap keeps any point from moving more than 5% of the
    inradius in one step.
    """
    lam = state.curvature.lam
    grad = speed_gradient(spec, lam)
    max_speed = float(np.max(spec.evaluator(lam)))
    if isinstance(state.surface, AxiSurface):
        diff = float(np.max(np.sum(grad * lam**2, axis=-1)))
        dt_diffusion = state.surface.delta**2 / diff
        inr = inradius_axi(state.surface)
    else:
        mesh = state.surface
        t = mesh.triangles
        edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        lengths = np.linalg.norm(mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]], axis=1)
        local = np.full(len(mesh.vertices), np.inf)
        np.minimum.at(local, edges[:, 0], lengths)
        np.minimum.at(local, edges[:, 1], lengths)
        diff = np.sum(grad, axis=-1)
        dt_diffusion = float(np.min(local**2 / diff))
        inr = inradius_mesh(mesh)
    return ctl.safety * min(dt_diffusion, 0.05 * inr / max_speed)


def run_flow(initial, spec: SpeedSpec, ctl: StepControl | None = None, probes=()) -> FlowTrace:
    """Integrate to extinction, convexity loss, or max_time.

    Probes are callables state -> dict merged into the sample recorded every
    snapshot_stride steps (e.g. {"width": ...}).
    """
    ctl = ctl or StepControl()
    if isinstance(initial, AxiSurface):
        return _run_axi(initial, spec, ctl, probes)
    if isinstance(initial, TriMesh):
        return _run_mesh(initial, spec, ctl, probes)
    raise TypeError(f"unsupported surface type {type(initial).__name__}")


def check_pinching_monotone(trace: FlowTrace, tol: float) -> tuple[bool, float]:
    """Worst increase of sup-pinching between consecutive samples vs tol."""
    vals = np.asarray([s.sup_pinching for s in trace.samples])
    if len(vals) < 2:
        return True, 0.0
    worst = float(np.max(np.diff(vals)))
    return worst <= tol, worst


# ---------------------------------------------------------------------------
# Axisymmetric driver.  Hot loop: all per-step work is O(grid) numpy ops on
# preallocated buffers; the step size, centroid cache, and samples refresh on
# a stride.


def _run_axi(surface: AxiSurface, spec: SpeedSpec, ctl: StepControl, probes) -> FlowTrace:
    state0 = make_state(surface, spec)
    c0 = state0.C0
    inr0 = inradius_axi(surface)
    eps = ctl.eps_extinct if ctl.eps_extinct is not None else 1e-3 * inr0

    n = surface.n_cells
    dx = surface.delta
    theta = surface.full_theta()
    cos = np.cos(theta)
    cot = np.zeros(n + 1)
    cot[1:-1] = cos[1:-1] / np.sin(theta[1:-1])
    inv_dx2 = 1.0 / dx**2
    half_inv = 0.5 / dx

    hp = np.empty(n + 3)
    hp[1:-1] = surface.full_h()
    h = hp[1:-1]
    lam = np.empty((n + 1, 2))
    r1 = np.empty(n + 1)
    r2 = np.empty(n + 1)
    evaluator = spec.evaluator

    samples: list[FlowSample] = []
    meta = {
        "mode": "axi", "speed": spec.name, "n": spec.n, "degree_k": spec.degree_k,
        "shape": spec.shape, "C0": c0, "safety": ctl.safety, "eps_extinct": eps,
        "max_time": ctl.max_time, "snapshot_stride": ctl.snapshot_stride,
        "method": ctl.method, "grid": n, "initial_inradius": inr0,
    }

    def curvature_pair(buf):
        buf[0] = buf[2]
        buf[-1] = buf[-3]
        inner = buf[1:-1]
        np.add(buf[:-2], buf[2:], out=r1)
        np.subtract(r1, 2.0 * inner, out=r1)
        np.multiply(r1, inv_dx2, out=r1)
        np.add(r1, inner, out=r1)
        np.subtract(buf[2:], buf[:-2], out=r2)
        np.multiply(r2, half_inv, out=r2)
        np.multiply(r2, cot, out=r2)
        np.add(r2, inner, out=r2)
        r2[0] = r1[0]
        r2[-1] = r1[-1]

    def record(t):
        surf = AxiSurface.from_full(h.copy())
        field = curvatures_axi(surf)
        try:
            inr = inradius_axi(surf)
        except Exception:
            inr = float((h - 0.5 * (h[0] - h[-1]) * cos).min())
        extras = {}
        for probe in probes:
            extras.update(probe(FlowState(t=t, surface=surf, curvature=field, C0=c0)))
        samples.append(
            FlowSample(
                t=t,
                inradius=inr,
                sup_pinching=pinching_ratio(field, spec),
                max_speed=float(np.max(evaluator(field.lam))),
                width=extras.get("width"),
                snapshot=surf if ctl.record_snapshots else None,
            )
        )

    t = 0.0
    steps = 0
    dt = 0.0
    proxy = inr0
    prev_t, prev_r = 0.0, inr0
    termination = None
    extinction_time = None
    refresh_stride = 8
    rk2 = ctl.method == "rk2"
    hp_mid = np.empty_like(hp) if rk2 else None
    tmp = np.empty(n + 1)

    def measure_proxy():
        # Inradius proxy about the midpoint of the axis chord: cheap, exact
        # for spheres, and vanishing exactly when the body does.
        np.multiply(cos, 0.5 * (h[0] - h[-1]), out=tmp)
        np.subtract(h, tmp, out=tmp)
        return float(tmp.min())

    record(0.0)
    while True:
        curvature_pair(hp)
        np.divide(1.0, r1, out=lam[:, 0])
        np.divide(1.0, r2, out=lam[:, 1])
        speed = evaluator(lam)

        if steps % refresh_stride == 0:
            # Monitors run on the refresh cadence: the displacement cap keeps
            # per-step shrinkage ~1%, so nothing is missed between refreshes.
            least = min(r1.min(), r2.min())
            if not least > 0.0:
                termination = CONVEXITY_LOST
                break
            prev_t, prev_r = t, proxy
            proxy = measure_proxy()
            if proxy < eps:
                termination = EXTINCT
                if prev_r > proxy:
                    extinction_time = t + proxy * (t - prev_t) / (prev_r - proxy)
                else:
                    extinction_time = t
                break
            grad = speed_gradient(spec, lam)
            diff = float(np.max(np.sum(grad * lam**2, axis=-1)))
            dt = ctl.safety * min(dx**2 / diff, 0.05 * proxy / float(speed.max()))
        clamped = False
        if ctl.max_time is not None and t + dt >= ctl.max_time:
            dt = ctl.max_time - t
            clamped = True

        if rk2:
            hp_mid[1:-1] = h - (0.5 * dt) * speed
            curvature_pair(hp_mid)
            if not min(r1.min(), r2.min()) > 0.0:
                termination = CONVEXITY_LOST
                break
            np.divide(1.0, r1, out=lam[:, 0])
            np.divide(1.0, r2, out=lam[:, 1])
            speed = evaluator(lam)

        np.multiply(speed, dt, out=tmp)
        np.subtract(h, tmp, out=h)
        t = ctl.max_time if clamped else t + dt
        steps += 1

        if clamped:
            proxy = measure_proxy()
            termination = MAX_TIME_REACHED
            break
        if steps % ctl.snapshot_stride == 0:
            record(t)

    if termination != CONVEXITY_LOST and (not samples or samples[-1].t < t):
        record(t)
    meta["steps"] = steps
    return FlowTrace(samples=samples, termination=termination,
                     extinction_time=extinction_time, meta=meta)


# ---------------------------------------------------------------------------
# Mesh driver: per-step curvature refits keep this an order slower than the
# axisymmetric path; intended for short monitored runs and cross-checks.


def _run_mesh(mesh: TriMesh, spec: SpeedSpec, ctl: StepControl, probes) -> FlowTrace:
    state = make_state(mesh, spec)
    c0 = state.C0
    inr0 = inradius_mesh(mesh)
    eps = ctl.eps_extinct if ctl.eps_extinct is not None else 1e-3 * inr0
    samples: list[FlowSample] = []
    meta = {
        "mode": "mesh", "speed": spec.name, "n": spec.n, "degree_k": spec.degree_k,
        "shape": spec.shape, "C0": c0, "safety": ctl.safety, "eps_extinct": eps,
        "max_time": ctl.max_time, "snapshot_stride": ctl.snapshot_stride,
        "method": ctl.method, "vertices": len(mesh.vertices), "initial_inradius": inr0,
    }

    def record(st: FlowState, inr: float):
        extras = {}
        for probe in probes:
            extras.update(probe(st))
        samples.append(
            FlowSample(
                t=st.t,
                inradius=inr,
                sup_pinching=pinching_ratio(st.curvature, spec),
                max_speed=float(np.max(spec.evaluator(st.curvature.lam))),
                width=extras.get("width"),
                snapshot=st.surface if ctl.record_snapshots else None,
            )
        )

    termination = None
    extinction_time = None
    steps = 0
    prev_t, prev_r = 0.0, inr0
    inr = inr0
    record(state, inr0)
    while True:
        dt = adaptive_dt(state, spec, ctl)
        clamped = False
        if ctl.max_time is not None and state.t + dt >= ctl.max_time:
            dt = ctl.max_time - state.t
            clamped = True
        prev_t, prev_r = state.t, inr
        try:
            state = step_mesh(state, spec, dt)
        except (ConvexityLost, TangledMesh):
            termination = CONVEXITY_LOST
            break
        if clamped:
            state = replace(state, t=ctl.max_time)
        steps += 1
        inr = inradius_mesh(state.surface)
        if inr < eps:
            termination = EXTINCT
            if prev_r > inr:
                extinction_time = state.t + inr * (state.t - prev_t) / (prev_r - inr)
            else:
                extinction_time = state.t
            break
        if clamped:
            termination = MAX_TIME_REACHED
            break
        if steps % ctl.snapshot_stride == 0:
            record(state, inr)

    if termination != CONVEXITY_LOST and (not samples or samples[-1].t < state.t):
        record(state, inr)
    meta["steps"] = steps
    return FlowTrace(samples=samples, termination=termination,
                     extinction_time=extinction_time, meta=meta)
