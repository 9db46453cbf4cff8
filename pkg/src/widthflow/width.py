"""Sweepout width via Birkhoff midpoint-projection tightening.

Closed curves on a convex triangle mesh are stored as triangle indices plus
barycentric coordinates.  A sweepout slices the mesh by parallel planes along
an axis, degenerating to point-curves at the two extremes.  Tightening every
slice with the same number of shortening sweeps keeps the family a single
homotopy competitor, so its max slice energy is an upper bound for the width
that only ever moves down.  The width estimate is the min of that bound over
a set of sweep axes.

Energy convention: E = L^2 / (2 pi) for a closed curve of length L (the
constant-speed parameterization is implicit; curves are geometric loci).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptySlice, ProjectionFailed
from .geom import TriMesh, axi_to_mesh
from .geom.axisym import AxiSurface
from .geom.curvature import CurvatureField
from .speed import SpeedSpec

__all__ = [
    "SurfaceCurve",
    "Sweepout",
    "WidthEstimate",
    "curve_length",
    "curve_energy",
    "build_sweepout",
    "birkhoff_tighten",
    "tighten_sweepout",
    "width_estimate",
    "geodesic_residual",
    "total_curvature",
    "transport_curve",
    "default_axes",
    "make_width_probe",
    "curve_to_obj",
]

# Curves shorter than this fraction of the bounding-box diagonal are treated
# as point-curves; keeps numerical noise from registering spurious energy.
DEGENERATE_LENGTH_FRACTION = 1e-3

_BARY_TOL = 1e-12


@dataclass(frozen=True)
class SurfaceCurve:
    """Closed polygonal curve lying on a triangle mesh.

    Point ``i`` connects to point ``(i + 1) % len``.  ``tri[i]`` names the
    triangle containing point ``i`` and ``bary[i]`` its barycentric weights
    there.  Degenerate curves stand for point-curves: their stored points are
    kept for plotting but carry zero length and energy.
    """

    mesh: TriMesh
    tri: np.ndarray
    bary: np.ndarray
    is_degenerate: bool = False
    xyz: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self) -> None:
        tri = np.asarray(self.tri, dtype=np.int64)
        bary = np.asarray(self.bary, dtype=float)
        if tri.ndim != 1 or len(tri) < 1:
            raise ValueError("curve needs at least one point")
        if bary.shape != (len(tri), 3):
            raise ValueError(f"bary must have shape ({len(tri)}, 3), got {bary.shape}")
        if tri.min() < 0 or tri.max() >= len(self.mesh.triangles):
            raise ValueError("triangle index out of range")
        if bary.min() < -_BARY_TOL or np.abs(bary.sum(axis=1) - 1.0).max() > _BARY_TOL:
            raise ValueError("barycentric coordinates leave the simplex")
        corners = self.mesh.vertices[self.mesh.triangles[tri]]
        xyz = np.einsum("pk,pkj->pj", bary, corners)
        if not self.is_degenerate:
            spread = xyz.max(axis=0) - xyz.min(axis=0)
            if len(tri) < 3 or not np.linalg.norm(spread) > 0.0:
                raise ValueError("non-degenerate curve collapsed to a point")
        for arr in (tri, bary, xyz):
            arr.setflags(write=False)
        object.__setattr__(self, "tri", tri)
        object.__setattr__(self, "bary", bary)
        object.__setattr__(self, "xyz", xyz)

    def __len__(self) -> int:
        return len(self.tri)


@dataclass(frozen=True)
class Sweepout:
    """One-parameter family of slice curves, degenerate at both ends."""

    params: np.ndarray
    slices: tuple[SurfaceCurve, ...]
    axis: np.ndarray
    max_adjacent_gap: float

    def __post_init__(self) -> None:
        params = np.asarray(self.params, dtype=float)
        axis = np.asarray(self.axis, dtype=float)
        if params.ndim != 1 or len(params) != len(self.slices):
            raise ValueError("one parameter per slice required")
        if np.any(np.diff(params) <= 0.0):
            raise ValueError("slice parameters must be strictly increasing")
        if params[0] != -1.0 or params[-1] != 1.0:
            raise ValueError("parameters must span [-1, 1]")
        if not (self.slices[0].is_degenerate and self.slices[-1].is_degenerate):
            raise ValueError("boundary slices must be degenerate")
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-10:
            raise ValueError("axis must be a unit 3-vector")
        params.setflags(write=False)
        axis.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "slices", tuple(self.slices))


@dataclass(frozen=True)
class WidthEstimate:
    value: float
    argmax_index: int
    geodesic_residual: float
    tighten_iterations: int
    axis: np.ndarray

    def __post_init__(self) -> None:
        if not self.value >= 0.0:
            raise ValueError(f"width must be nonnegative, got {self.value}")
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float))


def _poly_length(xyz: np.ndarray) -> float:
    if len(xyz) < 2:
        return 0.0
    return float(np.linalg.norm(np.roll(xyz, -1, axis=0) - xyz, axis=1).sum())


def curve_length(c: SurfaceCurve) -> float:
    """Sum of extrinsic segment lengths of the closed polygon (0 if degenerate)."""
    if c.is_degenerate:
        return 0.0
    return _poly_length(c.xyz)


def curve_energy(c: SurfaceCurve) -> float:
    length = curve_length(c)
    return length * length / (2.0 * np.pi)


def _point_curve(mesh: TriMesh, vertex: int) -> SurfaceCurve:
    tri = int(np.flatnonzero(np.any(mesh.triangles == vertex, axis=1))[0])
    bary = (mesh.triangles[tri] == vertex).astype(float)
    return SurfaceCurve(mesh, np.array([tri]), bary[None, :], is_degenerate=True)


def _plane_section(mesh: TriMesh, heights: np.ndarray, level: float):
    """Ordered crossing points of the plane <x, axis> = level with the mesh.

    Returns (tri_order, entry_bary, exit_bary, entry_xyz): one row per crossed
    triangle in walk order; the closed segment inside triangle j runs from its
    entry crossing to its exit crossing (= entry of triangle j + 1).
    """
    span = float(heights.max() - heights.min())
    d = heights - level
    if np.abs(d).min() < 1e-12 * span:
        # Plane through a vertex breaks the two-crossed-edges invariant; a
        # deterministic nudge far below slice spacing restores it.
        d = heights - (level + 1e-9 * span)
        if np.abs(d).min() < 1e-12 * span:
            raise EmptySlice(f"plane at {level} cannot be separated from mesh vertices")
    tris = mesh.triangles
    pos = d > 0.0
    tpos = pos[tris]
    crossed = tpos.any(axis=1) & ~tpos.all(axis=1)
    count = int(crossed.sum())
    if count == 0:
        raise EmptySlice(f"plane at {level} misses the mesh")

    neighbors = mesh.tri_neighbors()
    verts = mesh.vertices

    def crossed_slots(t: int) -> list[int]:
        pp = tpos[t]
        return [s for s in range(3) if pp[s] != pp[(s + 1) % 3]]

    def crossing(t: int, slot: int):
        a = tris[t, slot]
        b = tris[t, (slot + 1) % 3]
        w = d[a] / (d[a] - d[b])
        bary = np.zeros(3)
        bary[slot] = 1.0 - w
        bary[(slot + 1) % 3] = w
        return (1.0 - w) * verts[a] + w * verts[b], bary

    start = int(np.flatnonzero(crossed)[0])
    slot_in, slot_out = crossed_slots(start)
    order, entry_bary, exit_bary, entry_xyz = [], [], [], []
    cur, cur_in = start, slot_in
    for _ in range(count):
        slots = crossed_slots(cur)
        cur_out = slots[0] if slots[1] == cur_in else slots[1]
        p_in, b_in = crossing(cur, cur_in)
        _, b_out = crossing(cur, cur_out)
        order.append(cur)
        entry_bary.append(b_in)
        exit_bary.append(b_out)
        entry_xyz.append(p_in)
        nxt = int(neighbors[cur, cur_out])
        edge = {tris[cur, cur_out], tris[cur, (cur_out + 1) % 3]}
        nxt_in = next(s for s in range(3) if {tris[nxt, s], tris[nxt, (s + 1) % 3]} == edge)
        cur, cur_in = nxt, nxt_in
        if cur == start:
            break
    if cur != start:
        raise EmptySlice(f"plane section at {level} did not close after {count} triangles")
    return (np.array(order), np.array(entry_bary), np.array(exit_bary), np.array(entry_xyz))


def _resample_section(mesh, tri_order, entry_bary, exit_bary, entry_xyz) -> SurfaceCurve:
    seg = np.roll(entry_xyz, -1, axis=0) - entry_xyz
    seg_len = np.linalg.norm(seg, axis=1)
    total = float(seg_len.sum())
    # Point spacing of about one mesh edge: coarser curves amplify the
    # saddle instability of near-geodesic slices (poleward drift grows per
    # sweep like (2 pi / count)^2), finer ones just cost projections.
    count = int(np.clip(round(total / mesh.mean_edge_length()), 16, 512))
    count += count % 2  # even count keeps the alternating sweeps a partition
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    targets = total * np.arange(count) / count
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(seg_len) - 1)
    frac = (targets - cum[idx]) / np.maximum(seg_len[idx], 1e-300)
    bary = (1.0 - frac)[:, None] * entry_bary[idx] + frac[:, None] * exit_bary[idx]
    return SurfaceCurve(mesh, tri_order[idx], bary)


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    dm = cdist(a, b)
    return float(max(dm.min(axis=1).max(), dm.min(axis=0).max()))


def _max_adjacent_gap(slices) -> float:
    return max(
        _hausdorff(a.xyz, b.xyz) for a, b in zip(slices, slices[1:])
    )


def build_sweepout(mesh: TriMesh, axis, slice_count: int) -> Sweepout:
    """Slice the mesh by planes normal to ``axis`` into a sweepout.

    Interior slices are the full cross-section polygons, resampled to roughly
    uniform spacing; the two boundary slices are the point-curves at the
    extreme vertices, so the family sweeps from a point through the body and
    back to a point.
    """
    if slice_count < 8:
        raise ValueError(f"slice_count must be >= 8, got {slice_count}")
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if not norm > 0.0:
        raise ValueError("axis must be a nonzero vector")
    axis = axis / norm
    heights = mesh.vertices @ axis
    lo, hi = float(heights.min()), float(heights.max())
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    params = np.linspace(-1.0, 1.0, slice_count)
    slices: list[SurfaceCurve] = [_point_curve(mesh, int(np.argmin(heights)))]
    for t in params[1:-1]:
        slices.append(_resample_section(mesh, *_plane_section(mesh, heights, mid + t * half)))
    slices.append(_point_curve(mesh, int(np.argmax(heights))))
    return Sweepout(params, tuple(slices), axis, _max_adjacent_gap(slices))


# ---------------------------------------------------------------------------
# Birkhoff tightening.


class _Workset:
    """Mutable point arrays for one curve while it is being tightened."""

    __slots__ = ("tri", "bary", "xyz", "length", "active")

    def __init__(self, c: SurfaceCurve):
        self.tri = np.array(c.tri)
        self.bary = np.array(c.bary)
        self.xyz = np.array(c.xyz)
        self.length = _poly_length(self.xyz)
        self.active = not c.is_degenerate

    def finish(self, mesh: TriMesh) -> SurfaceCurve:
        return SurfaceCurve(mesh, self.tri, self.bary, is_degenerate=not self.active)


def _tighten_worksets(worksets: list[_Workset], mesh: TriMesh, sweeps: int) -> None:
    """Run ``sweeps`` alternating midpoint-projection passes over all curves.

    Each pass moves every other point to the projected midpoint of its two
    neighbors, accepting a move only when it shortens the local two-segment
    length by more than 1e-12 of the whole curve length.  Accepted decreases
    therefore dominate float resummation noise, making per-sweep length
    monotonicity exact.  All curves share one batched projection per pass.
    """
    threshold = DEGENERATE_LENGTH_FRACTION * mesh.bbox_diagonal()
    for _ in range(sweeps):
        for parity in (0, 1):
            live = [w for w in worksets if w.active]
            if not live:
                return
            mids, spans = [], []
            for w in live:
                n = len(w.xyz)
                sel = np.arange(parity, n, 2)
                if n % 2 == 1 and parity == 0:
                    # Odd curves: hold the wrap-around point so no two moved
                    # points ever share a segment within one pass.
                    sel = sel[:-1]
                prev = w.xyz[(sel - 1) % n]
                nxt = w.xyz[(sel + 1) % n]
                mids.append(0.5 * (prev + nxt))
                spans.append((sel, prev, nxt))
            flat = np.concatenate(mids, axis=0)
            tri_q, bary_q, xyz_q, _ = mesh.project(flat)
            offset = 0
            for w, (sel, prev, nxt) in zip(live, spans):
                stop = offset + len(sel)
                q = xyz_q[offset:stop]
                old = np.linalg.norm(w.xyz[sel] - prev, axis=1) + np.linalg.norm(w.xyz[sel] - nxt, axis=1)
                new = np.linalg.norm(q - prev, axis=1) + np.linalg.norm(q - nxt, axis=1)
                take = new < old - 1e-12 * w.length
                rows = sel[take]
                w.xyz[rows] = q[take]
                w.tri[rows] = tri_q[offset:stop][take]
                w.bary[rows] = bary_q[offset:stop][take]
                w.length -= float((old[take] - new[take]).sum())
                offset = stop
        for w in worksets:
            if w.active and w.length < threshold:
                w.active = False


def birkhoff_tighten(c: SurfaceCurve, mesh: TriMesh, sweeps: int) -> SurfaceCurve:
    """Tighten a single curve; shrinking below threshold marks it degenerate."""
    if c.is_degenerate:
        return c
    work = _Workset(c)
    _tighten_worksets([work], mesh, sweeps)
    return work.finish(mesh)


def tighten_sweepout(sw: Sweepout, mesh: TriMesh, sweeps: int) -> tuple[Sweepout, float]:
    """Tighten every slice with the same sweep count; returns max slice energy."""
    worksets = [_Workset(c) for c in sw.slices]
    _tighten_worksets(worksets, mesh, sweeps)
    slices = tuple(w.finish(mesh) for w in worksets)
    out = Sweepout(sw.params, slices, sw.axis, _max_adjacent_gap(slices))
    return out, max(curve_energy(c) for c in slices)


def default_axes(seed: int = 0, random_count: int = 10) -> np.ndarray:
    """Three coordinate axes plus seeded random directions."""
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((random_count, 3))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.concatenate([np.eye(3), extra], axis=0)


def width_estimate(
    mesh: TriMesh,
    axes=None,
    slice_count: int = 33,
    sweeps: int = 200,
    jobs: int = 1,
) -> WidthEstimate:
    """Min over sweep axes of the tightened max slice energy.

    The result is an upper bound for the min-max width that the tightening
    drives toward it; more axes sharpen the min, more sweeps sharpen each max.
    """
    if axes is None:
        axes = default_axes()
    axes = np.atleast_2d(np.asarray(axes, dtype=float))

    def run(axis):
        sw, max_energy = tighten_sweepout(build_sweepout(mesh, axis, slice_count), mesh, sweeps)
        energies = [curve_energy(c) for c in sw.slices]
        arg = int(np.argmax(energies))
        return max_energy, arg, geodesic_residual(sw.slices[arg], mesh)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, axes))
    else:
        results = [run(axis) for axis in axes]
    best = int(np.argmin([r[0] for r in results]))
    value, arg, residual = results[best]
    return WidthEstimate(
        value=value,
        argmax_index=arg,
        geodesic_residual=residual,
        tighten_iterations=sweeps,
        axis=axes[best] / np.linalg.norm(axes[best]),
    )


def geodesic_residual(c: SurfaceCurve, mesh: TriMesh) -> float:
    """Max tangential second difference over segment-length product.

    Zero for a discrete geodesic: at the midpoint-projection fixed point the
    second difference is parallel to the face normal.  Points sitting exactly
    on mesh edges are skipped; their face assignment is ambiguous and the
    dihedral kink would register as spurious tangential curvature.
    """
    if c.is_degenerate or len(c) < 3:
        return 0.0
    xyz = c.xyz
    fwd = np.roll(xyz, -1, axis=0) - xyz
    len_r = np.linalg.norm(fwd, axis=1)
    len_l = np.roll(len_r, 1)
    second = np.roll(xyz, -1, axis=0) - 2.0 * xyz + np.roll(xyz, 1, axis=0)
    normals = mesh.face_normals()[c.tri]
    tangential = second - (np.einsum("ij,ij->i", second, normals))[:, None] * normals
    keep = (c.bary.min(axis=1) > 1e-9) & (len_l > 0.0) & (len_r > 0.0)
    if not keep.any():
        return 0.0
    res = np.linalg.norm(tangential[keep], axis=1) / (len_l[keep] * len_r[keep])
    return float(res.max())


def turning_angles(c: SurfaceCurve) -> np.ndarray:
    """Exterior turning angle at each polygon corner (zero-length edges merged)."""
    if c.is_degenerate:
        return np.zeros(0)
    xyz = c.xyz
    seg = np.roll(xyz, -1, axis=0) - xyz
    lens = np.linalg.norm(seg, axis=1)
    seg = seg[lens > 0.0]
    if len(seg) < 2:
        return np.zeros(0)
    tangents = seg / np.linalg.norm(seg, axis=1, keepdims=True)
    before = np.roll(tangents, 1, axis=0)
    cross = np.linalg.norm(np.cross(before, tangents), axis=1)
    dot = np.einsum("ij,ij->i", before, tangents)
    return np.arctan2(cross, dot)


def total_curvature(c: SurfaceCurve) -> float:
    """Sum of exterior turning angles of the closed polygon."""
    return float(turning_angles(c).sum())


def transport_curve(c: SurfaceCurve, spec: SpeedSpec, field: CurvatureField, h: float) -> SurfaceCurve:
    """Carry a curve to the surface flowed for time ``h`` (h = 0 is identity).

    Every curve point moves by h * F(lam) * nu with vertex curvatures and
    inward normals interpolated barycentrically, then re-projects onto the
    mesh whose vertices took the same flow step.
    """
    if h == 0.0:
        return c
    mesh = c.mesh
    if len(field) != len(mesh.vertices):
        raise ValueError("curvature field must be per-vertex for the curve's mesh")
    speed_v = spec.evaluator(field.lam)
    flowed = mesh.with_vertices(mesh.vertices + h * speed_v[:, None] * field.normal_in)

    corner_ids = mesh.triangles[c.tri]
    lam_pt = np.einsum("pk,pkj->pj", c.bary, field.lam[corner_ids])
    nu_pt = np.einsum("pk,pkj->pj", c.bary, field.normal_in[corner_ids])
    nu_norm = np.linalg.norm(nu_pt, axis=1, keepdims=True)
    if not np.all(nu_norm > 0.0):
        raise ProjectionFailed("interpolated normal vanished; curvature field inconsistent")
    moved = c.xyz + h * spec.evaluator(lam_pt)[:, None] * (nu_pt / nu_norm)
    tri, bary, _, dist = flowed.project(moved)
    tolerance = max(10.0 * abs(h), 1e-6 * mesh.bbox_diagonal())
    if float(dist.max()) > tolerance:
        raise ProjectionFailed(f"transported point ended {dist.max():.3g} off the flowed surface")
    return SurfaceCurve(flowed, tri, bary, is_degenerate=c.is_degenerate)


def curve_to_obj(c: SurfaceCurve, path) -> None:
    """Write the curve as a closed polyline OBJ."""
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in c.xyz]
    loop = " ".join(str(i + 1) for i in range(len(c.xyz)))
    lines.append(f"l {loop} 1")
    Path(path).write_text("\n".join(lines) + "\n")


def make_width_probe(
    slice_count: int = 17,
    sweeps: int = 60,
    axes=((0.0, 0.0, 1.0), (1.0, 0.0, 0.0)),
    azimuth_count: int = 96,
    warm: bool = False,
):
    """Flow probe measuring width at every sample time.

    Axisymmetric surfaces are meshed on the fly.  With ``warm=True`` the probe
    keeps each axis's tightened slices and re-projects them onto the next
    surface as a warm start.  The default rebuilds plane sections from scratch
    every time: fresh sections of a convex body are already near-tight, and a
    reused curve compounds the slow off-equator drift of the tightening
    across probes until late-time widths sag below the true value.
    """
    axes_arr = np.atleast_2d(np.asarray(axes, dtype=float))
    axes_arr = axes_arr / np.linalg.norm(axes_arr, axis=1, keepdims=True)
    memory: dict[int, Sweepout] = {}

    def warm_sweepout(prev: Sweepout, mesh: TriMesh) -> Sweepout:
        slices = []
        for c in prev.slices:
            if c.is_degenerate:
                tri, bary, _, _ = mesh.project(c.xyz[0])
                slices.append(SurfaceCurve(mesh, np.array([tri]), bary[None, :], is_degenerate=True))
            else:
                tri, bary, _, _ = mesh.project(c.xyz)
                slices.append(SurfaceCurve(mesh, tri, bary))
        return Sweepout(prev.params, tuple(slices), prev.axis, _max_adjacent_gap(slices))

    def probe(state) -> dict:
        surface = state.surface
        mesh = surface if isinstance(surface, TriMesh) else axi_to_mesh(surface, azimuth_count)
        best = np.inf
        for i, axis in enumerate(axes_arr):
            if warm and i in memory:
                sweepout = warm_sweepout(memory[i], mesh)
            else:
                sweepout = build_sweepout(mesh, axis, slice_count)
            tightened, max_energy = tighten_sweepout(sweepout, mesh, sweeps)
            memory[i] = tightened
            best = min(best, max_energy)
        return {"width": float(best)}

    return probe
