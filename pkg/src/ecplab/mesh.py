"""G0-symmetric triangulations of the built-in domains.

A structured lattice on the fundamental sector of T0 (between the mirror
lines at angles pi/6 and pi/2) is unfolded by the six group elements and then
pushed radially onto the target domain. The group therefore acts on the mesh by
exact vertex permutations, and all three mirror lines are unions of mesh edges.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import DegenerateTriangle, InputError, MeshFormatError, PointOutside
from .geometry import (CIRCUMRADIUS, GROUP_ELEMENTS, INRADIUS, SQRT3, DomainSpec,
                       group_apply, level_residual, triangle_inverse_radius)

NEUMANN = 0
DIRICHLET = 1
MARKER_NAMES = {NEUMANN: "GammaNeumann", DIRICHLET: "GammaDirichlet"}

_SECTOR_M = INRADIUS * np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)])
_SECTOR_C = np.array([0.0, CIRCUMRADIUS])


@dataclass
class Mesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray  # rows (i, j, marker)
    h: float
    spec: Optional[DomainSpec] = None
    half: bool = False
    group: Optional[dict] = None  # element name -> vertex permutation
    parent: Optional[np.ndarray] = None  # half mesh: vertex index in the full mesh
    level: int = 0
    _edges: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def symmetric(self) -> bool:
        return self.group is not None

    def edges(self) -> np.ndarray:
        if self._edges is None:
            self._edges = unique_edges(self.triangles)
        return self._edges

    def areas(self) -> np.ndarray:
        return triangle_areas(self.vertices, self.triangles)

    def boundary_vertices(self, marker: Optional[int] = None) -> np.ndarray:
        b = self.boundary if marker is None else self.boundary[self.boundary[:, 2] == marker]
        return np.unique(b[:, :2])

    def dirichlet_axis_vertices(self) -> np.ndarray:
        """Vertices on the Gamma_D segment (u = 0) of a half mesh."""
        return self.boundary_vertices(DIRICHLET)

    def perm(self, g: str) -> np.ndarray:
        from .errors import NoGroupTables
        if self.group is None or g not in self.group:
            raise NoGroupTables(f"mesh carries no permutation for {g!r}")
        return self.group[g]


# ---------------------------------------------------------------------------
# helpers

def triangle_areas(x: np.ndarray, tri: np.ndarray) -> np.ndarray:
    a, b, c = x[tri[:, 0]], x[tri[:, 1]], x[tri[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                  - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def unique_edges(tri: np.ndarray) -> np.ndarray:
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def boundary_edges(tri: np.ndarray) -> np.ndarray:
    """Edges that belong to a single triangle, oriented as in that triangle."""
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(e, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return e[counts[inv.ravel()] == 1]


def _orient(x: np.ndarray, tri: np.ndarray) -> np.ndarray:
    tri = tri.copy()
    neg = triangle_areas(x, tri) < 0
    tri[neg] = tri[neg][:, [0, 2, 1]]
    return tri


def _sector_lattice(n: int):
    idx = {}
    pts = []
    for i in range(n + 1):
        for j in range(i + 1):
            idx[i, j] = len(pts)
            pts.append(((i - j) * _SECTOR_M + j * _SECTOR_C) / n)
    tris = []
    for i in range(n):
        for j in range(i + 1):
            tris.append((idx[i, j], idx[i + 1, j], idx[i + 1, j + 1]))
            if j < i:
                tris.append((idx[i, j], idx[i + 1, j + 1], idx[i, j + 1]))
    on_boundary = np.array([i == n for i in range(n + 1) for _ in range(i + 1)])
    return np.array(pts), np.array(tris), on_boundary


def _match(ref: np.ndarray, query: np.ndarray, tol: float) -> np.ndarray:
    d, k = cKDTree(ref).query(query)
    if np.any(d > tol):
        raise MeshFormatError("group action does not map mesh vertices to vertices")
    return k


def _radial_map(spec: DomainSpec, ref: np.ndarray, on_boundary: np.ndarray) -> np.ndarray:
    theta = np.arctan2(ref[:, 1], ref[:, 0])
    rho = spec.rho(theta)
    r_tri, _ = triangle_inverse_radius(theta)
    out = ref * (rho * r_tri)[:, None]
    bd = on_boundary
    out[bd] = np.stack([rho[bd] * np.cos(theta[bd]), rho[bd] * np.sin(theta[bd])], -1)
    out[np.all(ref == 0, axis=1)] = 0.0
    return out


def _enforce_mirror(x: np.ndarray, mirror: np.ndarray) -> np.ndarray:
    """Make the D_C reflection exact to the last bit."""
    x = x.copy()
    idx = np.arange(len(x))
    fixed = mirror == idx
    x[fixed, 0] = 0.0
    pos = (~fixed) & (x[:, 0] > 0)
    x[mirror[pos]] = np.stack([-x[pos, 0], x[pos, 1]], -1)
    return x


def _check_quality(x, tri):
    q = min_angles(x, tri)
    if q.size and q.min() < 5.0:
        raise DegenerateTriangle(f"minimum angle {q.min():.2f} deg is below 5 deg")


# ---------------------------------------------------------------------------
# generation and refinement

def generate(spec: DomainSpec, h: float, half: bool = False) -> Mesh:
    """Symmetric mesh of ``spec`` with nominal edge length ``h``."""
    if not h > 0 or h > 0.25:
        raise InputError(f"h must lie in (0, diameter/4] = (0, 0.25], got {h}")
    n = max(1, math.ceil(CIRCUMRADIUS / h - 1e-9))
    pts, tris, on_bd = _sector_lattice(n)
    all_pts, all_tri, all_bd = [], [], []
    for k, g in enumerate(GROUP_ELEMENTS):
        all_pts.append(group_apply(g, pts))
        all_tri.append(tris + k * len(pts))
        all_bd.append(on_bd)
    P = np.concatenate(all_pts)
    T = np.concatenate(all_tri)
    B = np.concatenate(all_bd)
    # merge copies of vertices shared between sectors
    tol = 1e-9 * CIRCUMRADIUS
    pairs = cKDTree(P).query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(P), len(P)))
    _, label = connected_components(graph, directed=False)
    _, first = np.unique(label, return_index=True)
    order = np.argsort(first)
    new_id = np.empty(label.max() + 1, dtype=int)
    new_id[order] = np.arange(len(order))
    ref = P[first[order]]
    on_boundary = B[first[order]]
    tri = new_id[label[T]]

    group = {g: _match(ref, group_apply(g, ref), tol) for g in GROUP_ELEMENTS}
    ref[group["D_C"] == np.arange(len(ref)), 0] = 0.0
    x = _enforce_mirror(_radial_map(spec, ref, on_boundary), group["D_C"])
    tri = _orient(x, tri)
    _check_quality(x, tri)
    bd = boundary_edges(tri)
    full = Mesh(x, tri, np.column_stack([bd, np.zeros(len(bd), dtype=int)]),
                h=CIRCUMRADIUS / n, spec=spec, group=group if spec.g0_symmetric else
                {"I": group["I"], "D_C": group["D_C"]})
    return half_mesh(full) if half else full


def half_mesh(full: Mesh) -> Mesh:
    """Restriction of a D_C-symmetric mesh to the half domain u > 0."""
    x, tri = full.vertices, full.triangles
    keep = x[tri].mean(axis=1)[:, 0] > 0
    sub = tri[keep]
    used = np.unique(sub)
    remap = -np.ones(len(x), dtype=int)
    remap[used] = np.arange(len(used))
    sub = remap[sub]
    xv = x[used]
    bd = boundary_edges(sub)
    axis = (xv[bd[:, 0], 0] == 0.0) & (xv[bd[:, 1], 0] == 0.0)
    marker = np.where(axis, DIRICHLET, NEUMANN)
    return Mesh(xv, sub, np.column_stack([bd, marker]), h=full.h, spec=full.spec,
                half=True, group=None, parent=used, level=full.level)


def refine(m: Mesh) -> Mesh:
    """Uniform 4-split; new boundary midpoints are pushed back onto the curve."""
    x, tri = m.vertices, m.triangles
    nv = len(x)
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(e, axis=1)
    edges, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    mid = nv + inv.reshape(3, -1).T  # midpoint ids of edges (01, 12, 20)
    xm = 0.5 * (x[edges[:, 0]] + x[edges[:, 1]])

    bkey = np.sort(m.boundary[:, :2], axis=1)
    bidx = _edge_lookup(edges, bkey)
    curved = bidx[m.boundary[:, 2] == NEUMANN]
    if m.spec is not None and len(curved):
        p = xm[curved]
        theta = np.arctan2(p[:, 1], p[:, 0])
        rho = m.spec.rho(theta)
        xm[curved] = np.stack([rho * np.cos(theta), rho * np.sin(theta)], -1)
    X = np.concatenate([x, xm])
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab, bc, ca = mid[:, 0], mid[:, 1], mid[:, 2]
    T = np.concatenate([np.column_stack([a, ab, ca]), np.column_stack([ab, b, bc]),
                        np.column_stack([ca, bc, c]), np.column_stack([ab, bc, ca])])
    # split boundary edges, keeping markers
    bm = nv + bidx
    B = np.concatenate([np.column_stack([m.boundary[:, 0], bm, m.boundary[:, 2]]),
                        np.column_stack([bm, m.boundary[:, 1], m.boundary[:, 2]])])
    group = None
    if m.group is not None:
        group = {}
        for g, p in m.group.items():
            img = np.sort(p[edges], axis=1)
            group[g] = np.concatenate([p, nv + _edge_lookup(edges, img)])
        X = _enforce_mirror(X, group["D_C"])
    _check_quality(X, T)
    # a refined half mesh no longer indexes a full mesh; use half_mesh(refine(full))
    return Mesh(X, T, B, h=m.h / 2, spec=m.spec, half=m.half, group=group,
                level=m.level + 1)


def _edge_lookup(edges: np.ndarray, query: np.ndarray) -> np.ndarray:
    n = edges.max() + 1 if len(edges) else 1
    ek = edges[:, 0] * n + edges[:, 1]
    qk = query[:, 0] * n + query[:, 1]
    order = np.argsort(ek)
    pos = np.searchsorted(ek[order], qk)
    pos = np.clip(pos, 0, len(ek) - 1)
    found = order[pos]
    if np.any(ek[found] != qk):
        raise MeshFormatError("edge lookup failed")
    return found


def generate_levels(spec: DomainSpec, h: float, levels: int = 3, half: bool = False) -> list:
    """Meshes at h, h/2, h/4, ... by repeated uniform refinement."""
    meshes = [generate(spec, h, half=False)]
    for _ in range(levels - 1):
        meshes.append(refine(meshes[-1]))
    return [half_mesh(mm) for mm in meshes] if half else meshes


# ---------------------------------------------------------------------------
# quality and diagnostics

def min_angles(x: np.ndarray, tri: np.ndarray) -> np.ndarray:
    p = x[tri]
    angs = []
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        w = p[:, (k + 2) % 3] - p[:, k]
        cosang = np.sum(u * w, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
        angs.append(np.degrees(np.arccos(np.clip(cosang, -1, 1))))
    return np.min(np.stack(angs, 1), axis=1)


def quality(m: Mesh) -> dict:
    e = m.edges()
    lengths = np.linalg.norm(m.vertices[e[:, 0]] - m.vertices[e[:, 1]], axis=1)
    return {"min_angle": float(min_angles(m.vertices, m.triangles).min()),
            "max_h": float(lengths.max()), "n_vertices": m.n_vertices,
            "n_triangles": m.n_triangles}


def euler_characteristic(m: Mesh) -> int:
    return m.n_vertices - len(m.edges()) + m.n_triangles


def boundary_level_residual(m: Mesh) -> float:
    if m.spec is None:
        raise InputError("mesh has no domain attached")
    vids = m.boundary_vertices(NEUMANN)
    return float(np.max(level_residual(m.spec, m.vertices[vids])))


def triangles_map_to_triangles(m: Mesh, g: str) -> bool:
    p = m.perm(g)
    orig = {tuple(sorted(t)) for t in m.triangles.tolist()}
    img = {tuple(sorted(t)) for t in p[m.triangles].tolist()}
    return orig == img


# ---------------------------------------------------------------------------
# interpolation

def _neighbors(tri: np.ndarray) -> np.ndarray:
    """nbr[t, k] = triangle across the edge opposite local vertex k, or -1."""
    nt = len(tri)
    e = np.concatenate([tri[:, [1, 2]], tri[:, [2, 0]], tri[:, [0, 1]]])
    key = np.sort(e, axis=1)
    owner = np.tile(np.arange(nt), 3)
    local = np.repeat(np.arange(3), nt)
    order = np.lexsort((key[:, 1], key[:, 0]))
    ks = key[order]
    same = np.all(ks[1:] == ks[:-1], axis=1)
    nbr = -np.ones((nt, 3), dtype=int)
    i0, i1 = order[:-1][same], order[1:][same]
    nbr[owner[i0], local[i0]] = owner[i1]
    nbr[owner[i1], local[i1]] = owner[i0]
    return nbr


def _barycentric(x: np.ndarray, tri_v: np.ndarray, p: np.ndarray) -> np.ndarray:
    a, b, c = x[tri_v[0]], x[tri_v[1]], x[tri_v[2]]
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det
    l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det
    return np.array([1 - l1 - l2, l1, l2])


def locate(m: Mesh, points, tol: float = 1e-12):
    """Containing triangle and barycentric coordinates, by walking from the
    triangle with the nearest centroid."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, tri = m.vertices, m.triangles
    nbr = _neighbors(tri)
    _, start = cKDTree(x[tri].mean(axis=1)).query(pts)
    tids = np.empty(len(pts), dtype=int)
    bary = np.empty((len(pts), 3))
    limit = 4 * int(math.sqrt(len(tri))) + 20
    for n, p in enumerate(pts):
        t = int(start[n])
        for _ in range(limit):
            lam = _barycentric(x, tri[t], p)
            k = int(np.argmin(lam))
            if lam[k] >= -tol:
                break
            nxt = nbr[t, k]
            if nxt < 0:
                raise PointOutside(f"point {p.tolist()} lies outside the mesh")
            t = int(nxt)
        else:
            raise PointOutside(f"walk did not terminate for point {p.tolist()}")
        tids[n] = t
        bary[n] = lam
    return tids, bary


def interpolate(m_from: Mesh, values, points) -> np.ndarray:
    """P1 interpolation of nodal ``values`` at ``points``."""
    values = np.asarray(values, dtype=float)
    tids, bary = locate(m_from, points)
    return np.sum(values[m_from.triangles[tids]] * bary, axis=1)


# ---------------------------------------------------------------------------
# JSON I/O

def mesh_to_dict(m: Mesh) -> dict:
    d = {"h": m.h, "vertices": m.vertices.tolist(), "triangles": m.triangles.tolist(),
         "boundary": m.boundary.tolist(), "half": m.half, "level": m.level}
    if m.spec is not None:
        d["domain"] = m.spec.to_dict()
    if m.group is not None:
        d["group"] = {g: p.tolist() for g, p in m.group.items()}
    if m.parent is not None:
        d["parent"] = m.parent.tolist()
    return d


def write_mesh(m: Mesh, path, extra: Optional[dict] = None) -> None:
    d = mesh_to_dict(m)
    if extra:
        d.update(extra)
    Path(path).write_text(json.dumps(d))


def mesh_from_dict(d: dict) -> Mesh:
    try:
        x = np.asarray(d["vertices"], dtype=float)
        tri = np.asarray(d["triangles"], dtype=int)
        bd = np.asarray(d["boundary"], dtype=int)
        h = float(d["h"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MeshFormatError(f"malformed mesh record: {exc}") from None
    if x.ndim != 2 or x.shape[1] != 2 or tri.ndim != 2 or tri.shape[1] != 3:
        raise MeshFormatError("vertices must be (n, 2) and triangles (m, 3)")
    if bd.ndim != 2 or bd.shape[1] != 3:
        raise MeshFormatError("boundary rows must be [i, j, marker]")
    if tri.min() < 0 or tri.max() >= len(x) or bd[:, :2].max() >= len(x):
        raise MeshFormatError("vertex index out of range")
    spec = DomainSpec.from_dict(d["domain"]) if "domain" in d else None
    group = {g: np.asarray(p, dtype=int) for g, p in d["group"].items()} if "group" in d else None
    parent = np.asarray(d["parent"], dtype=int) if "parent" in d else None
    m = Mesh(x, tri, bd, h, spec=spec, half=bool(d.get("half", False)), group=group,
             parent=parent, level=int(d.get("level", 0)))
    validate(m)
    return m


def read_mesh(path) -> Mesh:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MeshFormatError(f"cannot read mesh file {path}: {exc}") from None
    return mesh_from_dict(d)


def validate(m: Mesh) -> None:
    """Check every structural invariant; raise MeshFormatError on violation."""
    if np.any(m.areas() <= 0):
        raise MeshFormatError("triangles must have positive signed area")
    bd = boundary_edges(m.triangles)
    if {tuple(sorted(e)) for e in bd.tolist()} != {tuple(sorted(e)) for e in m.boundary[:, :2].tolist()}:
        raise MeshFormatError("boundary list does not match the triangulation")
    deg = np.bincount(m.boundary[:, :2].ravel(), minlength=m.n_vertices)
    if np.any(deg[np.unique(m.boundary[:, :2])] != 2):
        raise MeshFormatError("boundary edges do not form closed loops")
    if m.spec is not None and boundary_level_residual(m) > 1e-10:
        raise MeshFormatError("boundary vertices are off the domain boundary")
    if m.group is not None:
        for g, p in m.group.items():
            if len(p) != m.n_vertices or not triangles_map_to_triangles(m, g):
                raise MeshFormatError(f"permutation {g} is not a mesh automorphism")
