"""Domain families, polar boundary evaluation, certificates and the group G0.

All built-in domains live in the frame of the reference equilateral triangle
T0: side 1, centroid at the origin, vertices

    A = (-1/2, -sqrt(3)/6),  B = (1/2, -sqrt(3)/6),  C = (0, sqrt(3)/3).

Boundaries are described in inverse polar form ``r(theta) = 1 / rho(theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import (InputError, NoBracketedRoot, OutOfRangeT,
                     SandwichViolated, TooFewSamples)

SQRT3 = math.sqrt(3.0)
VERTEX_A = np.array([-0.5, -SQRT3 / 6])
VERTEX_B = np.array([0.5, -SQRT3 / 6])
VERTEX_C = np.array([0.0, SQRT3 / 3])
INRADIUS = SQRT3 / 6
CIRCUMRADIUS = SQRT3 / 3
# outward side normals of T0 (sides BC, CA, AB)
SIDE_NORMAL_ANGLES = np.array([math.pi / 6, 5 * math.pi / 6, -math.pi / 2])

KINDS = ("TriangleT0", "OmegaT", "LevelSetF0", "RoundedTriangle", "TabulatedPolar")


# ---------------------------------------------------------------------------
# the symmetry group G0

def _reflection(angle: float) -> np.ndarray:
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return np.array([[c, s], [s, -c]])


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


GROUP_ELEMENTS = ("I", "D_A", "D_B", "D_C", "R", "R2")

GROUP_MATRICES = {
    "I": np.eye(2),
    "D_A": _reflection(math.pi / 6),
    "D_B": _reflection(-math.pi / 6),
    "D_C": np.array([[-1.0, 0.0], [0.0, 1.0]]),
    "R": _rotation(2 * math.pi / 3),
    "R2": _rotation(4 * math.pi / 3),
}

# composition table, entry [g][h] = g o h (apply h first)
GROUP_TABLE = {
    "I": {"I": "I", "D_A": "D_A", "D_B": "D_B", "D_C": "D_C", "R": "R", "R2": "R2"},
    "D_A": {"I": "D_A", "D_A": "I", "D_B": "R", "D_C": "R2", "R": "D_B", "R2": "D_C"},
    "D_B": {"I": "D_B", "D_A": "R2", "D_B": "I", "D_C": "R", "R": "D_C", "R2": "D_A"},
    "D_C": {"I": "D_C", "D_A": "R", "D_B": "R2", "D_C": "I", "R": "D_A", "R2": "D_B"},
    "R": {"I": "R", "D_A": "D_C", "D_B": "D_A", "D_C": "D_B", "R": "R2", "R2": "I"},
    "R2": {"I": "R2", "D_A": "D_B", "D_B": "D_C", "D_C": "D_A", "R": "I", "R2": "R"},
}


@dataclass(frozen=True)
class SymmetryGroup:
    """The order-6 isometry group of T0 about the centroid."""

    elements: tuple = GROUP_ELEMENTS
    matrices: dict = field(default_factory=lambda: dict(GROUP_MATRICES))
    table: dict = field(default_factory=lambda: dict(GROUP_TABLE))

    def apply(self, g: str, p):
        return group_apply(g, p)

    def compose(self, g: str, h: str) -> str:
        return group_compose(g, h)

    def inverse(self, g: str) -> str:
        return next(h for h in self.elements if self.table[g][h] == "I")


G0 = SymmetryGroup()


def group_apply(g: str, p):
    """Apply group element ``g`` to a point or an ``(n, 2)`` array of points."""
    if g not in GROUP_MATRICES:
        raise InputError(f"unknown group element {g!r}")
    if g == "D_C":
        # exact in floating point
        q = np.array(p, dtype=float, copy=True)
        q[..., 0] = -q[..., 0]
        return q
    return np.asarray(p, dtype=float) @ GROUP_MATRICES[g].T


def group_compose(g: str, h: str) -> str:
    return GROUP_TABLE[g][h]


def group_from_matrix(m: np.ndarray, tol: float = 1e-12) -> str:
    for name, mat in GROUP_MATRICES.items():
        if np.allclose(mat, m, atol=tol):
            return name
    raise InputError("matrix is not an element of G0")


# ---------------------------------------------------------------------------
# closed-form level functions used to define the domains

def f0_eval(u, v):
    """Torsion polynomial of T0 (up to scaling)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (1 + 2 * SQRT3 * v) * (1 + 3 * u - SQRT3 * v) * (1 - 3 * u - SQRT3 * v)


def f0t_eval(t, u, v):
    """Torsion polynomial of the dilated triangle (1+t) T0."""
    if t < 0:
        raise OutOfRangeT(f"t must be >= 0, got {t}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return ((1 + t + 2 * SQRT3 * v) * (1 + t + 3 * u - SQRT3 * v)
            * (1 + t - 3 * u - SQRT3 * v))


def omega_level(t: float) -> float:
    """Level ``t^2 (3 + t)`` defining Omega_t, attained at the vertices of T0."""
    return t * t * (3 + t)


# ---------------------------------------------------------------------------
# angle reduction and the triangle

def reduce_theta(theta):
    """Reduce angles to the sector [-pi/6, pi/6] between vertex B and side BC.

    Returns ``(theta_reduced, sign)`` where ``sign`` is -1 when a reflection
    was used, so that ``r_theta(theta) = sign * r_theta(theta_reduced)``.
    """
    theta = np.asarray(theta, dtype=float)
    third = 2 * math.pi / 3
    tp = np.mod(theta + math.pi / 6, third) - math.pi / 6
    flip = tp > math.pi / 6
    red = np.where(flip, math.pi / 3 - tp, tp)
    sign = np.where(flip, -1.0, 1.0)
    return red, sign


def triangle_side_inverse_radius(theta):
    """Inverse polar radius of side BC, valid for theta in [-pi/6, pi/2]."""
    return 2 * SQRT3 * np.cos(np.asarray(theta, dtype=float) - math.pi / 6)


def triangle_inverse_radius(theta):
    """Inverse polar radius of T0 at any angle, with its derivative."""
    theta = np.asarray(theta, dtype=float)
    d = theta[..., None] - SIDE_NORMAL_ANGLES
    c = np.cos(d)
    k = np.argmax(c, axis=-1)
    r = 2 * SQRT3 * np.take_along_axis(c, k[..., None], -1)[..., 0]
    r_theta = -2 * SQRT3 * np.take_along_axis(np.sin(d), k[..., None], -1)[..., 0]
    return r, r_theta


# ---------------------------------------------------------------------------
# domain specification

@dataclass(frozen=True)
class DomainSpec:
    """A convex, star-shaped planar domain in the T0 frame.

    ``kind`` is one of ``KINDS``. ``t`` parametrises OmegaT / LevelSetF0,
    ``a`` is the corner radius of RoundedTriangle, ``samples`` holds
    ``(theta, rho)`` arrays for TabulatedPolar.
    """

    kind: str
    t: Optional[float] = None
    a: Optional[float] = None
    samples: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown domain kind {self.kind!r}")
        if self.kind == "OmegaT":
            if self.t is None or not 0 <= self.t <= 0.5:
                raise OutOfRangeT(f"OmegaT requires 0 <= t <= 1/2, got {self.t}")
        elif self.kind == "LevelSetF0":
            if self.t is None or not 0 < self.t < 0.5:
                raise OutOfRangeT(f"LevelSetF0 requires 0 < t < 1/2, got {self.t}")
        elif self.kind == "RoundedTriangle":
            if self.a is None or not 0 < self.a < INRADIUS:
                raise InputError(f"RoundedTriangle requires 0 < a < sqrt(3)/6, got {self.a}")
        elif self.kind == "TabulatedPolar":
            if self.samples is None or len(self.samples[0]) < 8:
                raise InputError("TabulatedPolar requires at least 8 (theta, rho) samples")

    # constructors
    @classmethod
    def triangle(cls) -> "DomainSpec":
        return cls("TriangleT0")

    @classmethod
    def omega(cls, t: float) -> "DomainSpec":
        return cls("OmegaT", t=float(t))

    @classmethod
    def level_set(cls, t: float) -> "DomainSpec":
        return cls("LevelSetF0", t=float(t))

    @classmethod
    def rounded(cls, a: float) -> "DomainSpec":
        return cls("RoundedTriangle", a=float(a))

    @classmethod
    def tabulated(cls, theta, rho) -> "DomainSpec":
        theta = tuple(float(x) for x in theta)
        rho = tuple(float(x) for x in rho)
        return cls("TabulatedPolar", samples=(theta, rho))

    @property
    def params(self) -> dict:
        if self.kind in ("OmegaT", "LevelSetF0"):
            return {"t": self.t}
        if self.kind == "RoundedTriangle":
            return {"a": self.a}
        if self.kind == "TabulatedPolar":
            return {"theta": list(self.samples[0]), "rho": list(self.samples[1])}
        return {}

    @property
    def g0_symmetric(self) -> bool:
        return self.kind != "TabulatedPolar"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        kind = d.get("kind")
        p = d.get("params", {}) or {}
        try:
            if kind == "TriangleT0":
                return cls.triangle()
            if kind == "OmegaT":
                return cls.omega(p["t"])
            if kind == "LevelSetF0":
                return cls.level_set(p["t"])
            if kind == "RoundedTriangle":
                return cls.rounded(p["a"])
            if kind == "TabulatedPolar":
                return cls.tabulated(p["theta"], p["rho"])
        except KeyError as exc:
            raise InputError(f"missing domain parameter {exc}") from None
        raise InputError(f"unknown domain kind {kind!r}")

    def label(self) -> str:
        if self.kind in ("OmegaT", "LevelSetF0"):
            return f"{self.kind}({self.t:g})"
        if self.kind == "RoundedTriangle":
            return f"{self.kind}({self.a:g})"
        return self.kind

    # evaluation helpers
    def inverse_radius(self, theta):
        return boundary_inverse_radius(self, theta)

    def rho(self, theta):
        r, _ = boundary_inverse_radius(self, theta)
        return 1.0 / r

    def boundary_points(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        rho = self.rho(theta)
        return np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=-1)

    def level_residual(self, points) -> np.ndarray:
        return level_residual(self, points)


# ---------------------------------------------------------------------------
# boundary evaluation

def _bisect_newton(g, dg, lo, hi, n_bisect: int = 50, n_newton: int = 2):
    """Vectorised bisection with g(lo) <= 0 <= g(hi), then guarded Newton polish."""
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    glo, ghi = g(lo), g(hi)
    scale = np.maximum(np.abs(glo), np.abs(ghi)) + 1.0
    if np.any(glo > 1e-12 * scale) or np.any(ghi < -1e-12 * scale):
        raise NoBracketedRoot("cubic root is not bracketed by the sandwich bounds")
    a, b = lo.copy(), hi.copy()
    for _ in range(n_bisect):
        mid = 0.5 * (a + b)
        gm = g(mid)
        neg = gm <= 0
        a = np.where(neg, mid, a)
        b = np.where(neg, b, mid)
        if np.all(b - a <= 1e-13 * np.maximum(1.0, np.abs(b))):
            break
    x = 0.5 * (a + b)
    for _ in range(n_newton):
        d = dg(x)
        ok = np.abs(d) > 1e-300
        step = np.where(ok, g(x) / np.where(ok, d, 1.0), 0.0)
        xn = x - step
        x = np.where((xn >= lo) & (xn <= hi), xn, x)
    return x


def _omega_t_reduced(t: float, th):
    r_a = triangle_side_inverse_radius(th)
    if t == 0:
        return r_a, -2 * SQRT3 * np.sin(th - math.pi / 6)
    # The cubic in d = r - sqrt3. At the vertex direction it has a double
    # root as t -> 0; this form keeps the root accurate there.
    c0 = -12 * SQRT3 * np.sin(1.5 * th + math.pi / 4) ** 2
    g = lambda d: c0 + 18 * t * d + (1 + 3 * t) * d * d * (3 * SQRT3 + d)
    dg = lambda d: 18 * t + (1 + 3 * t) * d * (6 * SQRT3 + 3 * d)
    d = _bisect_newton(g, dg, r_a / (1 + t) - SQRT3, r_a - SQRT3)
    r = SQRT3 + d
    r_theta = 6 * SQRT3 * np.cos(3 * th) / ((1 + 3 * t) * r ** 2 - 3 * (1 + t))
    return r, r_theta


def level_set_rotated_inverse_radius(t: float, theta_rot):
    """Root of ``(1-t) r^3 - 9 r + 6 sqrt(3) cos(3 theta) = 0`` in the frame
    where the triangle has a vertex on the positive x-axis."""
    if not 0 < t < 0.5:
        raise OutOfRangeT(f"LevelSetF0 requires 0 < t < 1/2, got {t}")
    theta_rot = np.asarray(theta_rot, dtype=float)
    r_b, _ = triangle_inverse_radius(math.pi / 2 - theta_rot)
    c3 = np.cos(3 * theta_rot)
    g = lambda r: (1 - t) * r ** 3 - 9 * r + 6 * SQRT3 * c3
    dg = lambda r: 3 * (1 - t) * r ** 2 - 9
    r = _bisect_newton(g, dg, r_b, 2 * r_b)
    r_theta = 18 * SQRT3 * np.sin(3 * theta_rot) / (3 * (1 - t) * r ** 2 - 9)
    return r, r_theta


def _level_set_reduced(t: float, th):
    # theta_rot = pi/2 - theta maps the T0 frame onto the rotated frame
    r, r_rot = level_set_rotated_inverse_radius(t, math.pi / 2 - th)
    return r, -r_rot


def _rounded_reduced(a: float, th):
    th_b = -math.pi / 6
    dc = CIRCUMRADIUS - 2 * a
    center = dc * np.array([math.cos(th_b), math.sin(th_b)])
    tangent = center + a * np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)])
    th_t = math.atan2(tangent[1], tangent[0])
    ec = dc * np.cos(th - th_b)
    epc = -dc * np.sin(th - th_b)
    s = np.sqrt(np.maximum(a * a - dc * dc + ec * ec, 0.0))
    rho_arc = ec + s
    drho_arc = epc * (1 + ec / np.where(s > 0, s, 1.0))
    arc = th <= th_t
    r_side = triangle_side_inverse_radius(th)
    rs_side = -2 * SQRT3 * np.sin(th - math.pi / 6)
    r = np.where(arc, 1.0 / rho_arc, r_side)
    r_theta = np.where(arc, -drho_arc / rho_arc ** 2, rs_side)
    return r, r_theta


_TAB_CACHE: dict = {}


def _tabulated(spec: DomainSpec, theta):
    key = spec.samples
    if key not in _TAB_CACHE:
        th = np.asarray(spec.samples[0], dtype=float)
        rho = np.asarray(spec.samples[1], dtype=float)
        order = np.argsort(np.mod(th, 2 * math.pi))
        th = np.mod(th, 2 * math.pi)[order]
        r = 1.0 / rho[order]
        th = np.append(th, th[0] + 2 * math.pi)
        r = np.append(r, r[0])
        _TAB_CACHE[key] = CubicSpline(th, r, bc_type="periodic")
    sp = _TAB_CACHE[key]
    x = np.mod(theta, 2 * math.pi)
    return sp(x), sp(x, 1)


def boundary_inverse_radius(spec: DomainSpec, theta):
    """Inverse polar radius ``r`` and its derivative ``r_theta`` at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if spec.kind == "TabulatedPolar":
        return _tabulated(spec, theta)
    if spec.kind == "TriangleT0":
        return triangle_inverse_radius(theta)
    th, sign = reduce_theta(theta)
    if spec.kind == "OmegaT":
        r, rt = _omega_t_reduced(spec.t, th)
    elif spec.kind == "LevelSetF0":
        r, rt = _level_set_reduced(spec.t, th)
    else:
        r, rt = _rounded_reduced(spec.a, th)
    return r, sign * rt


def boundary_cubic_residual(spec: DomainSpec, theta):
    """Relative residual of the defining cubic at the computed boundary root."""
    theta = np.asarray(theta, dtype=float)
    r, _ = boundary_inverse_radius(spec, theta)
    if spec.kind == "OmegaT":
        t = spec.t
        terms = [(1 + 3 * t) * r ** 3, 9 * (1 + t) * r, 6 * SQRT3 * np.sin(3 * theta)]
        val = terms[0] - terms[1] - terms[2]
    elif spec.kind == "LevelSetF0":
        t = spec.t
        c3 = np.cos(3 * (math.pi / 2 - theta))
        terms = [(1 - t) * r ** 3, 9 * r, 6 * SQRT3 * c3]
        val = terms[0] - terms[1] + terms[2]
    else:
        raise InputError(f"no boundary cubic for kind {spec.kind}")
    return np.abs(val) / np.max(np.abs(terms), axis=0)


def level_residual(spec: DomainSpec, points) -> np.ndarray:
    """How far boundary points are from the domain's defining level set."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    u, v = p[:, 0], p[:, 1]
    if spec.kind == "TriangleT0":
        return np.abs(f0_eval(u, v))
    if spec.kind == "OmegaT":
        return np.abs(f0t_eval(spec.t, u, v) - omega_level(spec.t))
    if spec.kind == "LevelSetF0":
        return np.abs(f0_eval(u, v) - spec.t)
    theta = np.arctan2(v, u)
    r, _ = boundary_inverse_radius(spec, theta)
    return np.abs(np.hypot(u, v) * r - 1.0)


def lipschitz_ratio(spec: DomainSpec, theta):
    """``r_theta / r`` evaluated in the reduced sector where r is increasing."""
    if spec.kind not in ("OmegaT", "LevelSetF0", "TriangleT0", "RoundedTriangle"):
        raise InputError(f"lipschitz_ratio is not defined for kind {spec.kind}")
    th, _ = reduce_theta(theta)
    r, rt = boundary_inverse_radius(spec, th)
    return rt / r


# ---------------------------------------------------------------------------
# polar boundaries and certificates

@dataclass
class PolarBoundary:
    """Inverse polar radius sampled on a uniform grid over [0, 2 pi)."""

    theta: np.ndarray
    r: np.ndarray
    r_theta: Optional[np.ndarray] = None

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        if self.theta.shape != self.r.shape:
            raise InputError("theta and r must have the same shape")
        if np.any(self.r <= 0):
            raise InputError("inverse radius must be positive")

    @property
    def rho(self) -> np.ndarray:
        return 1.0 / self.r

    @property
    def step(self) -> float:
        return 2 * math.pi / len(self.theta)

    def points(self) -> np.ndarray:
        return np.stack([self.rho * np.cos(self.theta), self.rho * np.sin(self.theta)], axis=-1)


def uniform_theta(n: int) -> np.ndarray:
    return 2 * math.pi * np.arange(n) / n


def sample_boundary(spec: DomainSpec, n: int = 1024) -> PolarBoundary:
    theta = uniform_theta(n)
    r, rt = boundary_inverse_radius(spec, theta)
    return PolarBoundary(theta, r, rt)


def convexity_certificate(b: PolarBoundary) -> dict:
    """Discrete check of ``R'' + R >= 0`` with a centered second difference."""
    n = len(b.r)
    if n < 16:
        raise TooFewSamples(f"need at least 16 samples, got {n}")
    h = b.step
    R = b.r
    vals = (np.roll(R, 1) + np.roll(R, -1) - 2 * R) / h ** 2 + R
    tol = 1e-8 * float(np.max(R))
    mn = float(np.min(vals))
    return {"ok": bool(mn >= -tol), "min_value": mn, "tol": tol}


def _bump_kernel(n: int, half_width: int) -> np.ndarray:
    # C^2 compactly supported profile (1 - x^2)^3 on [-1, 1]
    k = np.zeros(n)
    idx = np.arange(-half_width, half_width + 1)
    w = (1 - (idx / (half_width + 1)) ** 2) ** 3
    w /= w.sum()
    k[np.mod(idx, n)] = w
    return k


def mollify_boundary(b: PolarBoundary, eps: float) -> PolarBoundary:
    """Smooth a convex boundary by periodic convolution, then rescale into
    the sandwich ``R/(1+3 eps/2) < R_eps < R/(1+eps/2)``."""
    if not 0 < eps < 0.5:
        raise InputError(f"eps must lie in (0, 1/2), got {eps}")
    n = len(b.r)
    R = b.r
    lower, upper = R / (1 + 1.5 * eps), R / (1 + 0.5 * eps)
    fR = np.fft.rfft(R)
    half_width = max(1, int(round(eps * n / (2 * math.pi))))
    while half_width >= 1:
        kernel = _bump_kernel(n, half_width)
        smooth = np.fft.irfft(fR * np.fft.rfft(kernel), n)
        out = smooth / (1 + eps)
        if np.all(out > lower) and np.all(out < upper):
            rt = np.fft.irfft(1j * np.fft.rfftfreq(n, 1.0 / n) * np.fft.rfft(out), n)
            return PolarBoundary(b.theta.copy(), out, rt)
        half_width //= 2
    raise SandwichViolated("mollified boundary does not satisfy the sandwich bounds")


def ball_sandwich(spec: DomainSpec, n: int = 1024) -> dict:
    """Radii of the inscribed and enclosing centred balls on an n-point grid."""
    rho = spec.rho(uniform_theta(n))
    rmin, rmax = float(rho.min()), float(rho.max())
    return {"rho_min": rmin, "rho_max": rmax, "M": max(rmax, 1.0 / rmin), "grid": n}


def dr_distance(d1: DomainSpec, d2: DomainSpec, n: int = 1024) -> float:
    """Grid sup-norm distance between the polar radius functions."""
    theta = uniform_theta(n)
    return float(np.max(np.abs(d1.rho(theta) - d2.rho(theta))))


def _hausdorff_points(p: np.ndarray, q: np.ndarray) -> float:
    dpq, _ = cKDTree(q).query(p)
    dqp, _ = cKDTree(p).query(q)
    return float(max(dpq.max(), dqp.max()))


def hausdorff_distance(d1: DomainSpec, d2: DomainSpec, n: int = 1024) -> float:
    """Symmetric max-min distance between boundary point clouds of size n."""
    theta = uniform_theta(n)
    return _hausdorff_points(d1.boundary_points(theta), d2.boundary_points(theta))


def check_distance_ordering(d1: DomainSpec, d2: DomainSpec, n: int = 1024) -> dict:
    """Assert the Hausdorff distance does not exceed d_r beyond grid tolerance."""
    dr = dr_distance(d1, d2, n)
    dh = hausdorff_distance(d1, d2, n)
    # point-cloud error is bounded by the boundary sampling gap
    theta = uniform_theta(n)
    gap = max(np.max(np.linalg.norm(np.diff(d.boundary_points(theta), axis=0), axis=1))
              for d in (d1, d2))
    tol = gap
    if dh > dr + tol:
        raise AssertionError(f"Hausdorff distance {dh} exceeds d_r {dr} + {tol}")
    return {"d_r": dr, "d_H": dh, "tol": tol, "grid": n}


def disk_distances(r1: float, r2: float, n: int = 1024) -> tuple:
    """d_r and Hausdorff distance between concentric disks (test helper)."""
    theta = uniform_theta(n)
    p = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return abs(r1 - r2), _hausdorff_points(r1 * p, r2 * p)


def contains(spec: DomainSpec, points, tol: float = 0.0) -> np.ndarray:
    p = np.atleast_2d(np.asarray(points, dtype=float))
    theta = np.arctan2(p[:, 1], p[:, 0])
    return np.hypot(p[:, 0], p[:, 1]) <= spec.rho(theta) * (1 + tol)


def polar_area(spec: DomainSpec, n: int = 4096) -> float:
    """Area ``int rho^2 / 2 dtheta`` by the periodic trapezoid rule."""
    rho = spec.rho(uniform_theta(n))
    return float(np.sum(rho ** 2) * math.pi / n)


def export_domain(spec: DomainSpec, n: int = 1024) -> dict:
    b = sample_boundary(spec, n)
    return {"kind": spec.kind, "params": spec.params, "theta": b.theta.tolist(),
            "rho": b.rho.tolist(), "r": b.r.tolist(), "r_theta": b.r_theta.tolist()}
