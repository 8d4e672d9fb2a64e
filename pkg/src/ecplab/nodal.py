"""Sign partitions, nodal-domain counts and level sets of mesh functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import InputError
from .mesh import Mesh

DEFAULT_EPS = 1e-10
CLUSTER_GAP = 1e-3


@dataclass
class Component:
    sign: int
    n_vertices: int
    area: float

    def to_dict(self) -> dict:
        return {"sign": "+" if self.sign > 0 else "-", "n_vertices": self.n_vertices,
                "area": self.area}


@dataclass
class NodalReport:
    """Nodal domains of ``values + a``.

    ``labels`` holds the component id of each vertex, -1 on the zero set.
    """
    a: float
    eps: float
    components: list
    labels: np.ndarray = field(repr=False)

    @property
    def beta0(self) -> int:
        return len(self.components)

    @property
    def n_positive(self) -> int:
        return sum(1 for c in self.components if c.sign > 0)

    @property
    def n_negative(self) -> int:
        return sum(1 for c in self.components if c.sign < 0)

    @property
    def signature(self) -> tuple:
        return (self.n_positive, self.n_negative)

    def area(self, sign: int) -> float:
        return float(sum(c.area for c in self.components if c.sign == sign))

    def to_dict(self) -> dict:
        return {"a": self.a, "eps": self.eps, "beta0": self.beta0,
                "n_positive": self.n_positive, "n_negative": self.n_negative,
                "components": [c.to_dict() for c in self.components]}


def sign_partition(m: Mesh, values, a: float = 0.0, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Labels +1, -1, 0 for the sign of ``values + a`` with a relative zero band."""
    v = np.asarray(values, dtype=float)
    if v.shape != (m.n_vertices,):
        raise InputError(f"expected {m.n_vertices} values, got shape {v.shape}")
    scale = float(np.max(np.abs(v))) or 1.0
    w = v + a
    lab = np.sign(w).astype(np.int8)
    lab[np.abs(w) <= eps * scale] = 0
    return lab


def count_nodal_domains(m: Mesh, values, a: float = 0.0, eps: float = DEFAULT_EPS) -> NodalReport:
    lab = sign_partition(m, values, a, eps)
    e = m.edges()
    same = (lab[e[:, 0]] == lab[e[:, 1]]) & (lab[e[:, 0]] != 0)
    ee = e[same]
    n = m.n_vertices
    g = sp.coo_matrix((np.ones(len(ee)), (ee[:, 0], ee[:, 1])), shape=(n, n))
    _, comp = connected_components(g, directed=False)
    nonzero = lab != 0
    # relabel the components of nonzero vertices as 0..k-1 in vertex order
    ids, first, inv = np.unique(comp[nonzero], return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    labels = np.full(n, -1, dtype=np.int64)
    labels[nonzero] = rank[inv.ravel()]
    k = len(ids)
    counts = np.bincount(labels[nonzero], minlength=k)
    signs = np.zeros(k, dtype=int)
    signs[labels[nonzero]] = lab[nonzero]
    tl = labels[m.triangles]
    whole = (tl[:, 0] >= 0) & (tl[:, 0] == tl[:, 1]) & (tl[:, 1] == tl[:, 2])
    areas = np.bincount(tl[whole, 0], weights=m.areas()[whole], minlength=k)
    comps = [Component(int(signs[i]), int(counts[i]), float(areas[i])) for i in range(k)]
    return NodalReport(float(a), float(eps), comps, labels)


def mirror_equivariant(m: Mesh, report: NodalReport, g: str = "D_C") -> bool:
    """True when the permutation ``g`` maps each component onto a component of equal sign."""
    p = m.perm(g)
    lab = report.labels
    if np.any((lab < 0) != (lab[p] < 0)):
        return False
    mapping = {}
    for i in np.flatnonzero(lab >= 0):
        src, dst = lab[i], lab[p[i]]
        if mapping.setdefault(src, dst) != dst:
            return False
    if len(set(mapping.values())) != len(mapping):
        return False
    return all(report.components[s].sign == report.components[d].sign for s, d in mapping.items())


def negative_components_swapped(m: Mesh, report: NodalReport, g: str = "D_C") -> bool:
    """Two negative components that ``g`` exchanges."""
    neg = [i for i, c in enumerate(report.components) if c.sign < 0]
    if len(neg) != 2:
        return False
    p = m.perm(g)
    a_verts = np.flatnonzero(report.labels == neg[0])
    return bool(np.all(report.labels[p[a_verts]] == neg[1]))


# ---------------------------------------------------------------------------
# level sets

@dataclass
class Polyline:
    points: np.ndarray
    closed: bool

    def to_dict(self) -> dict:
        return {"closed": self.closed, "points": self.points.tolist()}


def extract_level_set(m: Mesh, values, c: float) -> list:
    """Polylines of ``{values = c}`` by marching triangles.

    Vertices with value exactly ``c`` count as above the level. Open
    polylines end on boundary edges; the rest are closed loops.
    """
    v = np.asarray(values, dtype=float) - c
    if not (v.min() < 0 < v.max()):
        raise InputError("level must lie strictly between the minimum and maximum")
    edges = m.edges()
    above = v >= 0
    cross = above[edges[:, 0]] != above[edges[:, 1]]
    # crossing point per edge
    i, j = edges[:, 0], edges[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = v[i] / (v[i] - v[j])
    s = np.where(cross, np.clip(s, 0.0, 1.0), 0.0)
    pts = m.vertices[i] + s[:, None] * (m.vertices[j] - m.vertices[i])
    # triangle -> its three edge ids
    key = {(int(a), int(b)): k for k, (a, b) in enumerate(edges)}
    tri = m.triangles
    adj: dict = {}
    for t in tri:
        ids = []
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            k = key[(min(a, b), max(a, b))]
            if cross[k]:
                ids.append(k)
        if len(ids) == 2:
            adj.setdefault(ids[0], []).append(ids[1])
            adj.setdefault(ids[1], []).append(ids[0])
    lines = []
    seen = set()
    starts = [k for k, nb in adj.items() if len(nb) == 1]
    for k0 in starts + list(adj):
        if k0 in seen:
            continue
        chain = [k0]
        seen.add(k0)
        prev, cur = None, k0
        while True:
            nxt = [x for x in adj[cur] if x != prev and x not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
            seen.add(cur)
        closed = len(adj[k0]) == 2 and k0 in adj[chain[-1]] and len(chain) > 2
        p = pts[chain]
        keep = np.ones(len(p), dtype=bool)
        keep[1:] = np.any(np.abs(np.diff(p, axis=0)) > 1e-14, axis=1)
        p = p[keep]
        if closed:
            p = np.vstack([p, p[:1]])
        lines.append(Polyline(p, bool(closed)))
    return lines


def polyline_is_convex(points: np.ndarray, tol: float = 1e-9) -> bool:
    """Turning direction never changes sign along a closed polyline."""
    p = points[:-1] if np.allclose(points[0], points[-1]) else points
    d = np.roll(p, -1, axis=0) - p
    cr = d[:, 0] * np.roll(d, -1, axis=0)[:, 1] - d[:, 1] * np.roll(d, -1, axis=0)[:, 0]
    scale = np.abs(cr).max()
    return bool(np.all(cr >= -tol * scale) or np.all(cr <= tol * scale))


def write_polylines_csv(lines: Sequence[Polyline], path, label: str = "") -> None:
    with open(path, "w") as fh:
        fh.write("curve,label,closed,x,y\n")
        for k, ln in enumerate(lines):
            for x, y in ln.points:
                fh.write(f"{k},{label},{int(ln.closed)},{x:.12g},{y:.12g}\n")


# ---------------------------------------------------------------------------
# Courant-type checks

def eigenvalue_clusters(values, gap: float = CLUSTER_GAP) -> list:
    """Least (1-based) index of each eigenvalue's cluster."""
    lam = np.asarray(values, dtype=float)
    kappa = []
    start = 0
    for k in range(len(lam)):
        ref = max(abs(lam[start]), abs(lam[k]))
        if k and abs(lam[k] - lam[start]) > gap * ref:
            start = k
        kappa.append(start + 1)
    return kappa


def courant_check(eig, m: Optional[Mesh] = None, max_index: int = 10,
                  eps: float = DEFAULT_EPS) -> list:
    """``beta0 <= kappa`` for each eigenvector, kappa the least index of its cluster."""
    mesh = m if m is not None else eig.mesh
    if mesh is None:
        raise InputError("courant_check needs the eigenvectors' mesh")
    kappa = eigenvalue_clusters(eig.eigenvalues)
    rows = []
    for k in range(min(max_index, eig.k)):
        rep = count_nodal_domains(mesh, eig.vectors[:, k], 0.0, eps)
        rows.append({"index": k + 1, "eigenvalue": float(eig.eigenvalues[k]),
                     "beta0": rep.beta0, "kappa": kappa[k], "pass": rep.beta0 <= kappa[k]})
    return rows


def gladwell_zhu_check(m: Mesh, phi_n, n: int, a_grid, eps: float = DEFAULT_EPS) -> dict:
    """At most ``n - 1`` positive components of ``phi_n + a`` for each ``a > 0``."""
    a_grid = np.asarray(a_grid, dtype=float)
    if np.any(a_grid <= 0):
        raise InputError("offsets must be positive")
    counts = [count_nodal_domains(m, phi_n, float(a), eps).n_positive for a in a_grid]
    return {"pass": all(c <= n - 1 for c in counts), "n": n,
            "offsets": a_grid.tolist(), "positive_counts": counts}


@dataclass
class WindowScan:
    offsets: np.ndarray
    n_positive: np.ndarray
    n_negative: np.ndarray
    window: Optional[tuple]

    @property
    def midpoint(self) -> Optional[float]:
        return None if self.window is None else 0.5 * (self.window[0] + self.window[1])

    @property
    def width(self) -> float:
        return 0.0 if self.window is None else self.window[1] - self.window[0]

    def to_dict(self) -> dict:
        return {"window": None if self.window is None else list(self.window),
                "offsets": self.offsets.tolist(),
                "n_positive": self.n_positive.tolist(), "n_negative": self.n_negative.tolist()}


def offset_grid(phi, n_steps: int = 200) -> np.ndarray:
    top = float(np.max(np.abs(phi)))
    return np.linspace(0.0, top, n_steps + 2)[1:-1]


def find_three_domain_window(m: Mesh, phi, a_min: Optional[float] = None,
                             a_max: Optional[float] = None, n_steps: int = 200,
                             eps: float = DEFAULT_EPS) -> WindowScan:
    """Longest run of grid offsets where ``phi + a`` has one positive and two
    negative components; both ends of every grid cell in the run must qualify."""
    if a_min is None or a_max is None:
        grid = offset_grid(phi, n_steps)
    else:
        grid = np.linspace(a_min, a_max, n_steps)
    pos = np.empty(len(grid), dtype=int)
    neg = np.empty(len(grid), dtype=int)
    for k, a in enumerate(grid):
        r = count_nodal_domains(m, phi, float(a), eps)
        pos[k], neg[k] = r.n_positive, r.n_negative
    good = (pos == 1) & (neg == 2)
    best, run_start, best_len = None, None, 0
    for k in range(len(grid) + 1):
        if k < len(grid) and good[k]:
            if run_start is None:
                run_start = k
            continue
        if run_start is not None:
            length = k - run_start
            if length >= 2 and length > best_len:
                best_len, best = length, (float(grid[run_start]), float(grid[k - 1]))
            run_start = None
    return WindowScan(grid, pos, neg, best)
