"""P1 finite elements and symmetric generalized eigensolves.

Neumann, Dirichlet and mixed (Dirichlet on the symmetry axis of a half mesh)
problems, plus the symmetry-reduced eigenvalues nu+ / nu-.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .closedform import phi0_neumann
from .errors import InputError, NoGroupTables, SolverStagnation
from .geometry import DomainSpec
from .mesh import DIRICHLET, Mesh, generate, generate_levels, half_mesh, refine

DENSE_LIMIT = 2500
SHIFT = -1.0
RESIDUAL_TOL = 1e-8
BCS = ("neumann", "dirichlet", "mixed_nd")


@dataclass
class EigenResult:
    bc: str
    eigenvalues: np.ndarray
    vectors: np.ndarray  # (n_vertices, k), mass-normalised columns
    residuals: np.ndarray
    h: float
    sector: str = "full"
    mesh: Optional[Mesh] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def to_dict(self, vector_file: Optional[str] = None) -> dict:
        return {"bc": self.bc, "sector": self.sector, "h": self.h,
                "eigenvalues": [float(x) for x in self.eigenvalues],
                "residuals": [float(x) for x in self.residuals],
                "vector_file": vector_file}


# ---------------------------------------------------------------------------
# assembly

def element_matrices(p: np.ndarray):
    """Stiffness and consistent mass of one P1 triangle with vertices ``p`` (3x2)."""
    K, M = _element_batch(p[None])
    return K[0], M[0]


def _element_batch(p: np.ndarray):
    e0 = p[:, 2] - p[:, 1]
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    area = 0.5 * np.abs(e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0]))
    E = np.stack([e0, e1, e2], axis=1)  # edge opposite each vertex
    K = np.einsum("tik,tjk->tij", E, E) / (4 * area)[:, None, None]
    base = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12
    M = area[:, None, None] * base
    return K, M


def assemble(m: Mesh):
    """Global stiffness K and mass M as CSR matrices."""
    tri = m.triangles
    K_e, M_e = _element_batch(m.vertices[tri])
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = m.n_vertices
    K = sp.coo_matrix((K_e.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((M_e.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    return K, M


def lumped_mass(M) -> np.ndarray:
    return np.asarray(M.sum(axis=1)).ravel()


# ---------------------------------------------------------------------------
# eigensolver

def _rayleigh_ritz(K, M, V):
    Kr = V.T @ (K @ V)
    Mr = V.T @ (M @ V)
    Kr, Mr = 0.5 * (Kr + Kr.T), 0.5 * (Mr + Mr.T)
    w, Y = la.eigh(Kr, Mr)
    return w, V @ Y


def _residuals(K, M, lam, V):
    KV, MV = K @ V, M @ V
    r = np.linalg.norm(KV - MV * lam, axis=0)
    return r / np.linalg.norm(MV, axis=0)


def solve_lowest(K, M, k: int, bc: str = "neumann", dirichlet_dofs=None,
                 tol: Optional[float] = None, maxiter: Optional[int] = None,
                 dense_limit: int = DENSE_LIMIT) -> EigenResult:
    """The k smallest eigenpairs of ``K x = lambda M x``.

    Dirichlet dofs are removed from the system and re-inserted as zeros.
    ``tol`` defaults to the module-level ``RESIDUAL_TOL``.
    """
    if tol is None:
        tol = RESIDUAL_TOL
    if bc not in BCS:
        raise InputError(f"unknown boundary condition {bc!r}")
    if not 1 <= k <= 12:
        raise InputError(f"k must lie in [1, 12], got {k}")
    n = K.shape[0]
    free = np.arange(n)
    if bc != "neumann":
        if dirichlet_dofs is None or len(dirichlet_dofs) == 0:
            raise InputError(f"bc={bc} needs Dirichlet dofs")
        mask = np.ones(n, dtype=bool)
        mask[np.asarray(dirichlet_dofs)] = False
        free = np.flatnonzero(mask)
    Kf = K[free][:, free].tocsr()
    Mf = M[free][:, free].tocsr()
    nf = len(free)
    if k >= nf:
        raise InputError(f"k={k} exceeds the number of free dofs {nf}")
    if nf <= dense_limit:
        lam, V = la.eigh(Kf.toarray(), Mf.toarray(), subset_by_index=[0, k - 1])
        lam, V = _rayleigh_ritz(Kf, Mf, V)
    else:
        # extra vectors so degenerate clusters at the top are resolved
        kk = min(k + 2, nf - 2)
        iters = maxiter or 50 * nf
        try:
            lam, V = eigsh(Kf, k=kk, M=Mf, sigma=SHIFT, which="LM", maxiter=iters,
                           v0=np.ones(nf))
        except Exception as exc:  # ArpackNoConvergence and friends
            raise SolverStagnation(f"shift-invert Lanczos did not converge: {exc}") from None
        order = np.argsort(lam)
        lam, V = _rayleigh_ritz(Kf, Mf, V[:, order])
        lam, V = lam[:k], V[:, :k]
    res = _residuals(Kf, Mf, lam, V)
    if np.any(res > tol):
        raise SolverStagnation(f"residual target {tol:g} unmet: max residual {res.max():.3e}")
    full = np.zeros((n, k))
    full[free] = V
    full = _normalize(full, M)
    if bc == "neumann":
        lam = np.where(np.abs(lam) < 1e-12 * max(1.0, abs(lam[-1])), 0.0, lam)
        # constant mode positive
        if np.sum(M @ full[:, 0]) < 0:
            full[:, 0] *= -1
    return EigenResult(bc=bc, eigenvalues=np.asarray(lam), vectors=full, residuals=res, h=0.0)


def _normalize(V, M):
    norms = np.sqrt(np.einsum("ik,ik->k", V, M @ V))
    return V / norms


def solve_mesh(m: Mesh, k: int, bc: str = "neumann", sector: str = "full",
               tol: Optional[float] = None) -> EigenResult:
    """Assemble on ``m`` and solve; Dirichlet dofs follow from the mesh and bc."""
    K, M = assemble(m)
    dofs = None
    if bc == "dirichlet":
        dofs = m.boundary_vertices()
    elif bc == "mixed_nd":
        if not m.half:
            raise InputError("mixed_nd needs a half mesh")
        dofs = m.boundary_vertices(DIRICHLET)
    res = solve_lowest(K, M, k, bc, dofs, tol=tol)
    res.h = m.h
    res.sector = sector
    res.mesh = m
    return res


def mass_inner(m: Mesh, a, b, M=None) -> float:
    if M is None:
        _, M = assemble(m)
    return float(np.asarray(a) @ (M @ np.asarray(b)))


# ---------------------------------------------------------------------------
# symmetry machinery

def symmetry_project(m: Mesh, values, sector: str):
    """Even (``'+'``) or odd (``'-'``) part of ``values`` under the mirror D_C."""
    p = m.perm("D_C")
    v = np.asarray(values, dtype=float)
    if sector in ("+", "sym"):
        return 0.5 * (v + v[p])
    if sector in ("-", "antisym"):
        return 0.5 * (v - v[p])
    raise InputError(f"unknown sector {sector!r}")


def t_operator(m: Mesh, values):
    """``v o R - v o R^2`` through the rotation permutations."""
    if m.group is None or "R" not in m.group:
        raise NoGroupTables("mesh carries no rotation permutations")
    v = np.asarray(values, dtype=float)
    return v[m.group["R"]] - v[m.group["R2"]]


def rayleigh_quotient(m: Mesh, v, K=None, M=None) -> float:
    if K is None or M is None:
        K, M = assemble(m)
    return float(v @ (K @ v)) / float(v @ (M @ v))


def extend_to_full(half: Mesh, full: Mesh, values, parity: int):
    """Even (parity +1) or odd (-1) extension of half-mesh values, re-normalised
    so the full-domain L2 norm matches the half-domain one."""
    if half.parent is None:
        raise InputError("half mesh does not index a full mesh")
    mirror = full.perm("D_C")
    v = np.asarray(values, dtype=float)
    out = np.zeros(full.n_vertices)
    out[half.parent] = v
    img = mirror[half.parent]
    off_axis = img != half.parent
    out[img[off_axis]] = parity * v[off_axis]
    return out / math.sqrt(2.0)


def fix_symmetric_sign(m: Mesh, phi, M=None):
    """Sign so that the discrete inner product with the closed-form phi0 is positive."""
    if M is None:
        _, M = assemble(m)
    ref = phi0_neumann(m.vertices[:, 0], m.vertices[:, 1])
    return -phi if float(phi @ (M @ ref)) < 0 else phi


def fix_antisymmetric_sign(m: Mesh, psi, M=None):
    """Sign so that psi is positive on the half u > 0."""
    if M is None:
        _, M = assemble(m)
    w = M @ psi
    return -psi if np.sum(w[m.vertices[:, 0] > 0]) < 0 else psi


# ---------------------------------------------------------------------------
# symmetry-reduced eigenvalues

@dataclass
class SectorSolve:
    value: float
    vector: np.ndarray  # on the half mesh
    mesh: Mesh  # half mesh
    full: Optional[Mesh] = None
    residual: float = 0.0

    def extended(self, parity: int):
        return extend_to_full(self.mesh, self.full, self.vector, parity)


def nu_plus_on(full: Mesh, tol: Optional[float] = None) -> SectorSolve:
    """Second eigenvalue of the pure Neumann problem on the half mesh."""
    hm = half_mesh(full)
    res = solve_mesh(hm, 2, "neumann", sector="sym", tol=tol)
    vec = res.vectors[:, 1]
    _, M = assemble(hm)
    ref = phi0_neumann(hm.vertices[:, 0], hm.vertices[:, 1])
    if float(vec @ (M @ ref)) < 0:
        vec = -vec
    return SectorSolve(float(res.eigenvalues[1]), vec, hm, full, float(res.residuals[1]))


def nu_minus_on(full: Mesh, tol: Optional[float] = None) -> SectorSolve:
    """First eigenvalue of the half mesh with Dirichlet on the symmetry axis."""
    hm = half_mesh(full)
    res = solve_mesh(hm, 1, "mixed_nd", sector="antisym", tol=tol)
    vec = res.vectors[:, 0]
    _, M = assemble(hm)
    if np.sum(M @ vec) < 0:
        vec = -vec
    return SectorSolve(float(res.eigenvalues[0]), vec, hm, full, float(res.residuals[0]))


def nu_plus(spec: DomainSpec, h: float):
    """``(nu+, eigenvector on the half mesh)``."""
    s = nu_plus_on(generate(spec, h))
    return s.value, s.vector


def nu_minus(spec: DomainSpec, h: float):
    """``(nu-, eigenvector on the half mesh)``, positive on the half."""
    s = nu_minus_on(generate(spec, h))
    return s.value, s.vector


def full_spectrum(spec: DomainSpec, h: float, k: int = 6, bc: str = "neumann") -> dict:
    """Full-domain solve with the nu2/nu3 degeneracy gap and the nu3/nu4 gap."""
    m = generate(spec, h)
    res = solve_mesh(m, k, bc)
    lam = res.eigenvalues
    out = {"result": res, "eigenvalues": lam}
    if bc == "neumann" and k >= 4:
        out["gap23"] = float(abs(lam[2] - lam[1]) / lam[1])
        out["gap34"] = float(lam[3] - lam[2])
    return out


def dirichlet_ground(spec: DomainSpec, h: float) -> float:
    return float(solve_mesh(generate(spec, h), 1, "dirichlet").eigenvalues[0])


# ---------------------------------------------------------------------------
# Richardson extrapolation

def richardson(values, ratio: float = 2.0, order: float = 2.0) -> dict:
    """Extrapolate three values computed at h, h/ratio, h/ratio^2.

    The extrapolation assumes the given ``order``; the observed order is
    reported alongside and ``monotone`` flags non-decreasing sequences.
    """
    v = np.asarray(values, dtype=float)
    if v.shape != (3,):
        raise InputError("richardson needs exactly three values")
    d1, d2 = v[0] - v[1], v[1] - v[2]
    monotone = bool((d1 > 0 and d2 > 0) or (d1 < 0 and d2 < 0))
    if d2 != 0 and d1 / d2 > 0:
        observed = math.log(d1 / d2) / math.log(ratio)
    else:
        observed = float("nan")
    f = ratio ** order
    extrap = v[2] + (v[2] - v[1]) / (f - 1)
    return {"extrapolated": float(extrap), "observed_order": observed,
            "monotone": monotone, "error_estimate": float(abs(extrap - v[2])),
            "values": v.tolist()}


def extrapolated_sector_values(spec: DomainSpec, h: float, levels: int = 3) -> dict:
    """nu+ and nu- at h, h/2, h/4 with Richardson extrapolation of each."""
    fulls = generate_levels(spec, h, levels)
    plus = [nu_plus_on(m) for m in fulls]
    minus = [nu_minus_on(m) for m in fulls]
    out = {"meshes": fulls, "plus": plus, "minus": minus,
           "h": [m.h for m in fulls]}
    if levels == 3:
        out["nu_plus"] = richardson([s.value for s in plus])
        out["nu_minus"] = richardson([s.value for s in minus])
    return out


def extrapolated_eigenvalue(spec: DomainSpec, h: float, index: int, bc: str = "neumann") -> dict:
    """Richardson-extrapolated full-domain eigenvalue number ``index`` (1-based)."""
    m = generate(spec, h)
    vals = []
    for lvl in range(3):
        if lvl:
            m = refine(m)
        vals.append(float(solve_mesh(m, index, bc).eigenvalues[index - 1]))
    return richardson(vals)


# ---------------------------------------------------------------------------
# I/O

def write_eigen_result(res: EigenResult, path, extra: Optional[dict] = None) -> dict:
    """JSON record plus little-endian float64 vectors with a JSON sidecar."""
    path = Path(path)
    vec_path = path.with_suffix(".vectors.bin")
    res.vectors.astype("<f8").tofile(vec_path)
    sidecar = {"dtype": "<f8", "shape": list(res.vectors.shape), "order": "C",
               "layout": "rows are mesh vertices, columns are eigenvectors"}
    vec_path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    d = res.to_dict(vector_file=vec_path.name)
    if extra:
        d.update(extra)
    path.write_text(json.dumps(d, indent=2))
    return d


def read_eigen_vectors(json_path) -> tuple:
    json_path = Path(json_path)
    d = json.loads(json_path.read_text())
    vec_path = json_path.parent / d["vector_file"]
    side = json.loads(vec_path.with_suffix(".json").read_text())
    v = np.fromfile(vec_path, dtype=side["dtype"]).reshape(side["shape"])
    return d, v
