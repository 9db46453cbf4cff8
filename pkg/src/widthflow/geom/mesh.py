"""Closed triangle meshes: construction, curvature estimation, projection, I/O.

Meshes are immutable values: every vertex array is frozen on construction and
flow steps build new meshes.  All meshes are required to be closed, free of
degenerate triangles, and consistently oriented with outward normals (positive
signed volume); loaders flip the winding when a file arrives inside out.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from ..errors import CentroidOutside, FitRankDeficient
from .axisym import AxiSurface, meridian_points
from .curvature import CurvatureField

__all__ = [
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


class TriMesh:
    """A closed, oriented triangle mesh in R^3."""

    def __init__(self, vertices, triangles, validate: bool = True):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ValueError(f"vertices must be (V, 3), got {vertices.shape}")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError(f"triangles must be (T, 3), got {triangles.shape}")
        vertices.flags.writeable = False
        triangles.flags.writeable = False
        self.vertices = vertices
        self.triangles = triangles
        self._cache: dict = {}
        if validate:
            self._validate()

    # -- validation -----------------------------------------------------

    def _validate(self) -> None:
        v, t = self.vertices, self.triangles
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        if len(t) < 4:
            raise ValueError("a closed surface needs at least 4 triangles")
        if np.any(t[:, 0] == t[:, 1]) or np.any(t[:, 1] == t[:, 2]) or np.any(t[:, 0] == t[:, 2]):
            raise ValueError("triangle with repeated vertex")
        if len(np.unique(t)) != len(v):
            raise ValueError("mesh has vertices not referenced by any triangle")
        areas = 0.5 * np.linalg.norm(self.face_raw_normals(), axis=1)
        tiny = 1e-14 * self.bbox_diagonal() ** 2
        if np.any(areas <= tiny):
            raise ValueError("degenerate (zero-area) triangle")
        # Closed and consistently oriented: every undirected edge is used by
        # exactly two triangles, once in each direction.
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = directed[:, 0] * len(v) + directed[:, 1]
        if len(np.unique(key)) != len(key):
            raise ValueError("directed edge reused; mesh is not consistently oriented")
        und = np.sort(directed, axis=1)
        ukey = und[:, 0] * len(v) + und[:, 1]
        _, counts = np.unique(ukey, return_counts=True)
        if np.any(counts != 2):
            raise ValueError("mesh has boundary or non-manifold edges; expected a closed surface")
        if self.signed_volume() <= 0.0:
            raise ValueError("winding encloses negative volume; expected outward orientation")

    # -- cached geometry --------------------------------------------------

    def _get(self, name, builder):
        if name not in self._cache:
            self._cache[name] = builder()
        return self._cache[name]

    def face_raw_normals(self) -> np.ndarray:
        """Cross products (twice the area-weighted outward face normals)."""
        def build():
            p = self.vertices[self.triangles]
            return np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return self._get("face_raw_normals", build)

    def face_normals(self) -> np.ndarray:
        def build():
            raw = self.face_raw_normals()
            return raw / np.linalg.norm(raw, axis=1, keepdims=True)
        return self._get("face_normals", build)

    def face_areas(self) -> np.ndarray:
        return self._get("face_areas", lambda: 0.5 * np.linalg.norm(self.face_raw_normals(), axis=1))

    def vertex_normals_out(self) -> np.ndarray:
        """Area-weighted outward vertex normals."""
        def build():
            raw = self.face_raw_normals()
            acc = np.zeros_like(self.vertices)
            for c in range(3):
                np.add.at(acc, self.triangles[:, c], raw)
            return acc / np.linalg.norm(acc, axis=1, keepdims=True)
        return self._get("vertex_normals_out", build)

    def signed_volume(self) -> float:
        def build():
            p = self.vertices[self.triangles]
            return float(np.einsum("ij,ij->", p[:, 0], np.cross(p[:, 1], p[:, 2])) / 6.0)
        return self._get("signed_volume", build)

    def centroid(self) -> np.ndarray:
        """Centroid of the enclosed solid."""
        def build():
            p = self.vertices[self.triangles]
            det = np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2]))
            vol = det.sum() / 6.0
            mom = (det[:, None] * p.sum(axis=1)).sum(axis=0) / 24.0
            return mom / vol
        return self._get("centroid", build)

    def bbox_diagonal(self) -> float:
        def build():
            ext = self.vertices.max(axis=0) - self.vertices.min(axis=0)
            return float(np.linalg.norm(ext))
        return self._get("bbox_diagonal", build)

    def mean_edge_length(self) -> float:
        def build():
            t = self.triangles
            e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            d = np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)
            return float(d.mean())
        return self._get("mean_edge_length", build)

    def tri_neighbors(self) -> np.ndarray:
        """(T, 3) neighbor triangle across edge slot c = (t[c], t[c+1])."""
        def build():
            t = self.triangles
            nt = len(t)
            directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            owner = np.tile(np.arange(nt), 3)
            und = np.sort(directed, axis=1)
            key = und[:, 0] * len(self.vertices) + und[:, 1]
            order = np.argsort(key, kind="stable")
            paired = owner[order].reshape(-1, 2)
            slots = np.concatenate([np.full(nt, 0), np.full(nt, 1), np.full(nt, 2)])[order].reshape(-1, 2)
            out = np.empty((nt, 3), dtype=np.int64)
            out[paired[:, 0], slots[:, 0]] = paired[:, 1]
            out[paired[:, 1], slots[:, 1]] = paired[:, 0]
            return out
        return self._get("tri_neighbors", build)

    def vertex_rings(self, depth: int) -> tuple[np.ndarray, np.ndarray]:
        """Padded neighbor indices within ``depth`` edge hops (self excluded).

        Returns (idx, mask) of shape (V, K); padded slots repeat the vertex's
        first neighbor and are masked out.
        """
        def build():
            v_count = len(self.vertices)
            t = self.triangles
            pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            adj: list[set[int]] = [set() for _ in range(v_count)]
            for a, b in pairs:
                adj[a].add(int(b))
                adj[b].add(int(a))
            rings: list[np.ndarray] = []
            for i in range(v_count):
                seen = {i}
                frontier = set(adj[i])
                seen |= frontier
                for _ in range(depth - 1):
                    nxt = set()
                    for j in frontier:
                        nxt |= adj[j]
                    frontier = nxt - seen
                    seen |= frontier
                seen.discard(i)
                rings.append(np.fromiter(sorted(seen), dtype=np.int64))
            k = max(len(r) for r in rings)
            idx = np.empty((v_count, k), dtype=np.int64)
            mask = np.zeros((v_count, k), dtype=bool)
            for i, r in enumerate(rings):
                idx[i, : len(r)] = r
                idx[i, len(r):] = r[0]
                mask[i, : len(r)] = True
            return idx, mask
        return self._get(("rings", depth), build)

    def _projector(self) -> "_Projector":
        return self._get("projector", lambda: _Projector(self))

    def project(self, points: np.ndarray, k: int = 12):
        """Closest points on the mesh for a batch of query points.

        Returns (tri, bary, xyz, dist) arrays.  Exact for queries whose closest
        triangle is near one of the k nearest triangle centroids, with a
        brute-force fallback for any stragglers, so results are always true
        closest points.
        """
        return self._projector().project(np.asarray(points, dtype=float), k=k)

    # -- transforms -------------------------------------------------------

    def translated(self, offset) -> "TriMesh":
        return TriMesh(self.vertices + np.asarray(offset, dtype=float), self.triangles, validate=False)

    def scaled(self, factor: float) -> "TriMesh":
        return TriMesh(self.vertices * float(factor), self.triangles, validate=False)

    def with_vertices(self, vertices) -> "TriMesh":
        """Same topology with replaced vertex positions (no validation)."""
        return TriMesh(vertices, self.triangles, validate=False)


# ---------------------------------------------------------------------------
# Constructors.


def icosphere(subdivisions: int = 4, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Geodesic sphere obtained by midpoint-subdividing an icosahedron."""
    if subdivisions < 0:
        raise ValueError("subdivisions must be >= 0")
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    for _ in range(subdivisions):
        verts_list = list(verts)
        midpoint: dict[tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                m = verts_list[a] + verts_list[b]
                m = m / np.linalg.norm(m)
                midpoint[key] = len(verts_list)
                verts_list.append(m)
            return midpoint[key]

        new_faces = np.empty((4 * len(faces), 3), dtype=np.int64)
        for i, (a, b, c) in enumerate(faces):
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces[4 * i:4 * i + 4] = [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        verts = np.array(verts_list)
        faces = new_faces
    verts = verts * radius + np.asarray(center, dtype=float)
    return TriMesh(verts, faces)


def axi_to_mesh(surface: AxiSurface, azimuth_count: int = 96) -> TriMesh:
    """Revolve the meridian of an axisymmetric surface into a triangle mesh.

    Produces len(surface.theta) * azimuth_count + 2 vertices: one ring per
    interior grid angle plus the two pole points.
    """
    if azimuth_count < 3:
        raise ValueError("need at least 3 azimuthal samples")
    rho, z = meridian_points(surface)
    rings = len(surface.theta)
    a = azimuth_count
    phi = 2.0 * np.pi * np.arange(a) / a
    cosp, sinp = np.cos(phi), np.sin(phi)
    verts = np.empty((rings * a + 2, 3))
    for j in range(rings):
        r, zz = rho[j + 1], z[j + 1]
        verts[j * a:(j + 1) * a, 0] = r * cosp
        verts[j * a:(j + 1) * a, 1] = r * sinp
        verts[j * a:(j + 1) * a, 2] = zz
    north = rings * a
    south = rings * a + 1
    verts[north] = (0.0, 0.0, z[0])
    verts[south] = (0.0, 0.0, z[-1])

    tris = []
    k = np.arange(a)
    k1 = (k + 1) % a
    tris.append(np.column_stack([np.full(a, north), k, k1]))
    for j in range(rings - 1):
        up, lo = j * a, (j + 1) * a
        tris.append(np.column_stack([up + k, lo + k, lo + k1]))
        tris.append(np.column_stack([up + k, lo + k1, up + k1]))
    last = (rings - 1) * a
    tris.append(np.column_stack([np.full(a, south), last + k1, last + k]))
    return TriMesh(verts, np.concatenate(tris))


# ---------------------------------------------------------------------------
# Curvature by local quadric (osculating paraboloid) fitting.


def curvatures_mesh(mesh: TriMesh, ring_depth: int = 2) -> CurvatureField:
    """Per-vertex principal curvatures from a least-squares quadric fit.

    Each vertex gets a tangent frame from its area-weighted normal; the
    neighbors within ``ring_depth`` edge hops are fit by a height graph
    w = a u^2/2 + b u v + c v^2/2 + d u + e v over the tangent plane, with the
    height axis along the inward normal so convex surfaces come out positive.
    The shape operator of the fitted graph gives the curvature pair.

    Raises FitRankDeficient when a neighborhood is too small, numerically
    rank-deficient, or the fitted quadratic term vanishes (flat patch).
    """
    if ring_depth < 1:
        raise ValueError("ring_depth must be >= 1")
    v = mesh.vertices
    n_out = mesh.vertex_normals_out()
    n_in = -n_out
    idx, mask = mesh.vertex_rings(ring_depth)
    counts = mask.sum(axis=1)
    if np.any(counts < 5):
        bad = int(np.argmin(counts))
        raise FitRankDeficient(f"vertex {bad} has only {int(counts[bad])} ring neighbors; need >= 5")

    # Tangent frames.
    pick = np.abs(n_in[:, 0]) < 0.9
    helper = np.where(pick[:, None], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    e1 = helper - np.einsum("ij,ij->i", helper, n_in)[:, None] * n_in
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(n_in, e1)

    d = v[idx] - v[:, None, :]
    u = np.einsum("vkj,vj->vk", d, e1)
    w = np.einsum("vkj,vj->vk", d, e2)
    hgt = np.einsum("vkj,vj->vk", d, n_in)

    cols = np.stack([0.5 * u * u, u * w, 0.5 * w * w, u, w], axis=-1)
    cols = np.where(mask[:, :, None], cols, 0.0)
    hgt = np.where(mask, hgt, 0.0)
    gram = np.einsum("vki,vkj->vij", cols, cols)
    rhs = np.einsum("vki,vk->vi", cols, hgt)

    sv = np.linalg.svd(gram, compute_uv=False)
    bad = sv[:, -1] <= 1e-12 * sv[:, 0]
    if np.any(bad):
        raise FitRankDeficient(f"quadric fit is rank deficient at vertex {int(np.flatnonzero(bad)[0])}")
    coef = np.linalg.solve(gram, rhs[..., None])[..., 0]
    a, b, c, dd, ee = coef.T

    scale = mesh.bbox_diagonal()
    flat = np.maximum.reduce([np.abs(a), np.abs(b), np.abs(c)]) < 1e-10 / scale
    if np.any(flat):
        raise FitRankDeficient(
            f"quadratic term vanishes at vertex {int(np.flatnonzero(flat)[0])}; patch is flat"
        )

    # Shape operator of the graph w(u, v) with slopes (dd, ee) at the origin.
    wgt = np.sqrt(1.0 + dd**2 + ee**2)
    ii11, ii12, ii22 = a / wgt, b / wgt, c / wgt
    g11, g12, g22 = 1.0 + dd**2, dd * ee, 1.0 + ee**2
    det_g = g11 * g22 - g12**2
    gauss = (ii11 * ii22 - ii12**2) / det_g
    mean2 = (g22 * ii11 - 2.0 * g12 * ii12 + g11 * ii22) / det_g
    half = 0.5 * mean2
    disc = np.sqrt(np.maximum(half**2 - gauss, 0.0))
    lam1 = half - disc
    lam2 = half + disc
    return CurvatureField(lam1=lam1, lam2=lam2, normal_in=n_in)


def inradius_mesh(mesh: TriMesh) -> float:
    """Smallest centroid-to-face-plane distance; requires the centroid inside."""
    c = mesh.centroid()
    n = mesh.face_normals()
    base = mesh.vertices[mesh.triangles[:, 0]]
    dist = np.einsum("ij,ij->i", base - c[None, :], n)
    value = float(np.min(dist))
    if value <= 0.0:
        raise CentroidOutside("centroid fails the face-plane containment test")
    return value


# ---------------------------------------------------------------------------
# Closest-point projection.


def _closest_on_triangles(p: np.ndarray, tri: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closest point on each candidate triangle (Ericson's region test).

    p: (..., 3) query points; tri: (..., 3, 3) triangle vertices.
    Returns barycentric coordinates (..., 3) and squared distances (...).
    """
    a, b, c = tri[..., 0, :], tri[..., 1, :], tri[..., 2, :]
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("...j,...j->...", ab, ap)
    d2 = np.einsum("...j,...j->...", ac, ap)
    bp = p - b
    d3 = np.einsum("...j,...j->...", ab, bp)
    d4 = np.einsum("...j,...j->...", ac, bp)
    cp = p - c
    d5 = np.einsum("...j,...j->...", ab, cp)
    d6 = np.einsum("...j,...j->...", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    eps = 1e-300
    shape = np.broadcast_shapes(p.shape[:-1], tri.shape[:-2])
    bary = np.empty(shape + (3,))

    # Interior by default.
    denom = va + vb + vc
    denom = np.where(np.abs(denom) < eps, 1.0, denom)
    v_in = vb / denom
    w_in = vc / denom
    bary[..., 0] = 1.0 - v_in - w_in
    bary[..., 1] = v_in
    bary[..., 2] = w_in

    def put(cond, b0, b1, b2):
        bary[..., 0] = np.where(cond, b0, bary[..., 0])
        bary[..., 1] = np.where(cond, b1, bary[..., 1])
        bary[..., 2] = np.where(cond, b2, bary[..., 2])

    # Edge regions (checked before vertex regions; vertex conditions override).
    t_bc = (d4 - d3) / np.where(np.abs((d4 - d3) + (d5 - d6)) < eps, 1.0, (d4 - d3) + (d5 - d6))
    on_bc = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)
    put(on_bc, 0.0, 1.0 - t_bc, t_bc)

    t_ac = d2 / np.where(np.abs(d2 - d6) < eps, 1.0, d2 - d6)
    on_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    put(on_ac, 1.0 - t_ac, 0.0, t_ac)

    t_ab = d1 / np.where(np.abs(d1 - d3) < eps, 1.0, d1 - d3)
    on_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    put(on_ab, 1.0 - t_ab, t_ab, 0.0)

    put((d1 <= 0) & (d2 <= 0), 1.0, 0.0, 0.0)
    put((d3 >= 0) & (d4 <= d3), 0.0, 1.0, 0.0)
    put((d6 >= 0) & (d5 <= d6), 0.0, 0.0, 1.0)

    np.clip(bary, 0.0, 1.0, out=bary)
    bary /= bary.sum(axis=-1, keepdims=True)
    closest = np.einsum("...k,...kj->...j", bary, tri)
    diff = closest - p
    return bary, np.einsum("...j,...j->...", diff, diff)


class _Projector:
    """KD-tree accelerated closest-point queries against one mesh."""

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        p = mesh.vertices[mesh.triangles]
        self.tri_xyz = p
        self.centroid_tree = cKDTree(p.mean(axis=1))
        self.vertex_tree = cKDTree(mesh.vertices)

    def project(self, points: np.ndarray, k: int = 12):
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        n_tri = len(self.mesh.triangles)
        kk = min(k, n_tri)
        _, cand = self.centroid_tree.query(pts, k=kk)
        cand = cand.reshape(len(pts), kk)
        bary, d2 = _closest_on_triangles(pts[:, None, :], self.tri_xyz[cand])
        best = np.argmin(d2, axis=1)
        rows = np.arange(len(pts))
        tri_idx = cand[rows, best]
        bary_best = bary[rows, best]
        dist = np.sqrt(d2[rows, best])

        # The nearest vertex bounds the true distance; anything beating it by
        # more than roundoff means the candidate set missed, so brute-force.
        dv, _ = self.vertex_tree.query(pts, k=1)
        miss = dist > dv + 1e-9 * self.mesh.bbox_diagonal()
        if np.any(miss):
            sub = np.flatnonzero(miss)
            for i in sub:
                bary_all, d2_all = _closest_on_triangles(pts[i][None, :], self.tri_xyz)
                j = int(np.argmin(d2_all))
                tri_idx[i] = j
                bary_best[i] = bary_all[j]
                dist[i] = math.sqrt(float(d2_all[j]))

        xyz = np.einsum("pk,pkj->pj", bary_best, self.tri_xyz[tri_idx])
        if single:
            return int(tri_idx[0]), bary_best[0], xyz[0], float(dist[0])
        return tri_idx, bary_best, xyz, dist


# ---------------------------------------------------------------------------
# File formats.


def write_off(mesh: TriMesh, path: str | Path) -> None:
    lines = ["OFF", f"{len(mesh.vertices)} {len(mesh.triangles)} 0"]
    for x, y, z in mesh.vertices:
        lines.append(f"{x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_off(path: str | Path) -> TriMesh:
    tokens: list[str] = []
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            tokens.extend(body.split())
    if not tokens or tokens[0].upper() != "OFF":
        raise ValueError(f"{path}: missing OFF header")
    pos = 1
    try:
        nv, nf = int(tokens[pos]), int(tokens[pos + 1])
        pos += 3  # vertex, face, edge counts
        verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            arity = int(tokens[pos])
            if arity != 3:
                raise ValueError(f"{path}: only triangle faces supported, got arity {arity}")
            faces.append([int(tokens[pos + 1]), int(tokens[pos + 2]), int(tokens[pos + 3])])
            pos += 1 + arity
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ValueError) and "arity" in str(exc):
            raise
        raise ValueError(f"{path}: malformed OFF data") from exc
    return _oriented(np.asarray(verts), np.asarray(faces, dtype=np.int64))


def write_obj(mesh: TriMesh, path: str | Path) -> None:
    lines = []
    for x, y, z in mesh.vertices:
        lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.triangles:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_obj(path: str | Path) -> TriMesh:
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise ValueError(f"{path}: malformed vertex line {body!r}")
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            refs = [p.split("/")[0] for p in parts[1:]]
            if len(refs) != 3:
                raise ValueError(f"{path}: only triangle faces supported, got {body!r}")
            faces.append([int(r) - 1 for r in refs])
    if not verts or not faces:
        raise ValueError(f"{path}: no usable vertex/face data")
    return _oriented(np.asarray(verts, dtype=float), np.asarray(faces, dtype=np.int64))


def _oriented(verts: np.ndarray, faces: np.ndarray) -> TriMesh:
    """Build a mesh, flipping winding if the file encloses negative volume."""
    probe = TriMesh(verts, faces, validate=False)
    if probe.signed_volume() < 0.0:
        faces = faces[:, ::-1]
    return TriMesh(verts, faces)


def read_mesh(path: str | Path) -> TriMesh:
    suffix = Path(path).suffix.lower()
    if suffix == ".off":
        return read_off(path)
    if suffix == ".obj":
        return read_obj(path)
    raise ValueError(f"unsupported mesh format {suffix!r}; expected .off or .obj")
