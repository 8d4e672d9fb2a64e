"""Closed-form fields on the equilateral triangle and their certificates.

Every derivative here is differentiated by hand so the fields can serve as
oracles independent of any generic differentiation machinery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import InputError, OnZeroSet
from .geometry import SQRT3, f0_eval

PI = math.pi
PHI0_EIGENVALUE = 16 * PI ** 2 / 9
XI1_EIGENVALUE = 16 * PI ** 2 / 3

# A, M_C, B, C
PHI0_CRITICAL_POINTS = np.array([
    [-0.5, -SQRT3 / 6],
    [0.0, -SQRT3 / 6],
    [0.5, -SQRT3 / 6],
    [0.0, SQRT3 / 3],
])
CRITICAL_SEARCH_WINDOW = (-5 / 8, 5 / 8, -SQRT3 / 3, SQRT3 / 2)
PHI0_PERIODS = np.array([[0.0, SQRT3], [1.5, SQRT3 / 2]])


@dataclass(frozen=True)
class ClosedFormField:
    """Value, gradient and Hessian of an explicit field."""

    name: str
    value: Callable
    grad: Callable
    hess: Callable
    eigenvalue: Optional[float] = None

    def __call__(self, u, v):
        return self.value(u, v)


def _xy(x, y):
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


# ---------------------------------------------------------------------------
# first Dirichlet eigenfunction of T_e (vertices (0,0), (1,0), (1/2, sqrt3/2))

def xi1_dirichlet(x, y):
    """Sum form of the first Dirichlet eigenfunction of T_e."""
    x, y = _xy(x, y)
    return (np.sin(4 * PI * y / SQRT3) + np.sin(2 * PI * (x - y / SQRT3))
            - np.sin(2 * PI * (x + y / SQRT3)))


def xi1_dirichlet_product(x, y):
    """Factored form of the same function."""
    x, y = _xy(x, y)
    return (4 * np.sin(2 * PI * y / SQRT3) * np.sin(PI * (x - y / SQRT3))
            * np.sin(PI * (x + y / SQRT3)))


_B = 2 * PI / SQRT3


def xi1_grad(x, y):
    x, y = _xy(x, y)
    c1 = np.cos(2 * _B * y)
    c2 = np.cos(2 * PI * x - _B * y)
    c3 = np.cos(2 * PI * x + _B * y)
    gx = 2 * PI * (c2 - c3)
    gy = 2 * _B * c1 - _B * c2 - _B * c3
    return np.stack([gx, gy], axis=-1)


def xi1_hess(x, y):
    x, y = _xy(x, y)
    s1 = np.sin(2 * _B * y)
    s2 = np.sin(2 * PI * x - _B * y)
    s3 = np.sin(2 * PI * x + _B * y)
    hxx = -(2 * PI) ** 2 * s2 + (2 * PI) ** 2 * s3
    hxy = 2 * PI * _B * s2 + 2 * PI * _B * s3
    hyy = -(2 * _B) ** 2 * s1 - _B ** 2 * s2 + _B ** 2 * s3
    return _sym(hxx, hxy, hyy)


def _sym(hxx, hxy, hyy):
    return np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)


def phi1_dirichlet(u, v):
    """First Dirichlet eigenfunction of T0 (T_e shifted to the centroid frame)."""
    u, v = _xy(u, v)
    return (4 * np.sin(PI / 3 * (1 + 2 * SQRT3 * v)) * np.sin(PI / 3 * (1 + 3 * u - SQRT3 * v))
            * np.sin(PI / 3 * (1 - 3 * u - SQRT3 * v)))


def xi_log_hessian_numerator(x, y):
    x, y = _xy(x, y)
    return 2 - 2 * (np.cos(2 * PI * y / SQRT3) * np.cos(PI * (x - y / SQRT3))
                    * np.cos(PI * (x + y / SQRT3)))


def xi_log_hessian_denominator(x, y):
    """Squared product of the three sines, i.e. ``(xi / 4)^2``.

    det Hess(log xi) does not depend on the normalisation of xi, so the
    denominator has to be the bare sine product rather than xi itself.
    """
    x, y = _xy(x, y)
    return (np.sin(2 * PI * y / SQRT3) * np.sin(PI * (x - y / SQRT3))
            * np.sin(PI * (x + y / SQRT3))) ** 2


def log_hessian_det_xi(x, y):
    """Closed form ``(4 pi^4 / 3) N / D`` of det Hess(log xi) inside T_e."""
    x, y = _xy(x, y)
    xi = xi1_dirichlet_product(x, y)
    if np.any(xi <= 0):
        raise OnZeroSet("log xi is undefined outside the open triangle T_e")
    return 4 * PI ** 4 / 3 * xi_log_hessian_numerator(x, y) / xi_log_hessian_denominator(x, y)


def log_hessian_det_xi_exact(x, y):
    """det Hess(log xi) recomputed from the exact gradient and Hessian."""
    x, y = _xy(x, y)
    xi = xi1_dirichlet(x, y)
    if np.any(xi <= 0):
        raise OnZeroSet("log xi is undefined outside the open triangle T_e")
    return _log_hess_det(xi, xi1_grad(x, y), xi1_hess(x, y))


def _log_hess_det(f, g, h):
    gx, gy = g[..., 0], g[..., 1]
    a = f * h[..., 0, 0] - gx * gx
    b = f * h[..., 0, 1] - gx * gy
    c = f * h[..., 1, 1] - gy * gy
    return (a * c - b * b) / f ** 4


# ---------------------------------------------------------------------------
# torsion polynomial f0 and its rotated twin f1

def f0_grad(u, v):
    u, v = _xy(u, v)
    return np.stack([-18 * u - 36 * SQRT3 * u * v,
                     -18 * v + 18 * SQRT3 * v * v - 18 * SQRT3 * u * u], -1)


def f0_hess(u, v):
    u, v = _xy(u, v)
    return _sym(-18 - 36 * SQRT3 * v, -36 * SQRT3 * u, -18 + 36 * SQRT3 * v)


def f1_eval(x, y):
    x, y = _xy(x, y)
    return (1 + 2 * SQRT3 * x) * (1 - SQRT3 * x + 3 * y) * (1 - SQRT3 * x - 3 * y)


def log_hessian_det_f0(u, v):
    """Closed form ``324 (1 + 6u^2 + 6v^2) / f0^2``."""
    u, v = _xy(u, v)
    f = f0_eval(u, v)
    if np.any(f <= 0):
        raise OnZeroSet("log f0 is undefined outside the open triangle T0")
    return 324 * (1 + 6 * u * u + 6 * v * v) / f ** 2


def log_hessian_det_f0_exact(u, v):
    u, v = _xy(u, v)
    f = f0_eval(u, v)
    if np.any(f <= 0):
        raise OnZeroSet("log f0 is undefined outside the open triangle T0")
    return _log_hess_det(f, f0_grad(u, v), f0_hess(u, v))


# Polynomials with coefficients a + b sqrt(3), a and b rational, stored as
# {(i, j): (a, b)} for the monomial u^i v^j.

def _q3_mul(x, y):
    return (x[0] * y[0] + 3 * x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _poly_mul(p, q):
    out: dict = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            key = (i1 + i2, j1 + j2)
            prod = _q3_mul(c1, c2)
            old = out.get(key, (Fraction(0), Fraction(0)))
            out[key] = (old[0] + prod[0], old[1] + prod[1])
    return {k: c for k, c in out.items() if c != (0, 0)}


def _poly_laplacian(p):
    out: dict = {}
    for (i, j), (a, b) in p.items():
        for key, m in (((i - 2, j), i * (i - 1)), ((i, j - 2), j * (j - 1))):
            if m:
                old = out.get(key, (Fraction(0), Fraction(0)))
                out[key] = (old[0] + m * a, old[1] + m * b)
    return {k: c for k, c in out.items() if c != (0, 0)}


def torsion_polynomial(t=0) -> dict:
    """Exact coefficients of f_{0,t} (t rational)."""
    t = Fraction(t)
    one, zero = Fraction(1), Fraction(0)
    f1 = {(0, 0): (one + t, zero), (0, 1): (zero, Fraction(2))}
    f2 = {(0, 0): (one + t, zero), (1, 0): (Fraction(3), zero), (0, 1): (zero, Fraction(-1))}
    f3 = {(0, 0): (one + t, zero), (1, 0): (Fraction(-3), zero), (0, 1): (zero, Fraction(-1))}
    return _poly_mul(_poly_mul(f1, f2), f3)


def torsion_laplacian_check(t=0, u: float = 0.0, v: float = 0.0) -> float:
    """Laplacian of f_{0,t} from exact polynomial coefficients, evaluated at (u, v).

    The Laplacian is the constant -36 (1 + t).
    """
    lap = _poly_laplacian(torsion_polynomial(t))
    total = 0.0
    for (i, j), (a, b) in lap.items():
        total += (float(a) + float(b) * SQRT3) * u ** i * v ** j
    return total


# ---------------------------------------------------------------------------
# symmetric second Neumann eigenfunction of T0

_K = np.array([[4 * PI / 3, 0.0],
               [-2 * PI / 3, -2 * PI * SQRT3 / 3],
               [2 * PI / 3, -2 * PI * SQRT3 / 3]])
_C = np.array([0.0, 2 * PI / 3, 2 * PI / 3])


def _phi0_args(u, v):
    u, v = _xy(u, v)
    return u[..., None] * _K[:, 0] + v[..., None] * _K[:, 1] + _C


def phi0_neumann(u, v):
    """``cos(4 pi u/3) + cos(2 pi (1-u-sqrt3 v)/3) + cos(2 pi (1+u-sqrt3 v)/3)``."""
    u, v = _xy(u, v)
    w = 2 * PI * (1 - SQRT3 * v) / 3
    return (np.cos(4 * PI * u / 3) + np.cos(w - 2 * PI * u / 3)
            + np.cos(w + 2 * PI * u / 3))


phi0_neumann.eigenvalue = lambda: PHI0_EIGENVALUE

# squared L2 norm of phi0 over T0, 3/2 times the area
PHI0_NORM_SQ = 3 * SQRT3 / 8


def phi0_normalized(u, v):
    """phi0 scaled to unit L2 norm on T0."""
    return phi0_neumann(u, v) / math.sqrt(PHI0_NORM_SQ)


def phi0_grad(u, v):
    s = np.sin(_phi0_args(u, v))
    return -s @ _K


def phi0_hess(u, v):
    c = np.cos(_phi0_args(u, v))
    kk = _K[:, :, None] * _K[:, None, :]
    return -np.tensordot(c, kk, axes=([-1], [0]))


def phi0_laplacian(u, v):
    h = phi0_hess(u, v)
    return h[..., 0, 0] + h[..., 1, 1]


def phi0_eigen_residual(u, v):
    """``|Laplacian(phi0) + (16 pi^2 / 9) phi0|`` from exact second derivatives."""
    return np.abs(phi0_laplacian(u, v) + PHI0_EIGENVALUE * phi0_neumann(u, v))


def plane_wave_residual(u, v):
    """Residual of the single mode cos(4 pi u/3) alone."""
    u, v = _xy(u, v)
    k = 4 * PI / 3
    return np.abs(-k * k * np.cos(k * u) + PHI0_EIGENVALUE * np.cos(k * u))


def phi0_critical_residuals(u, v):
    """Left-hand sides of the critical-point system of phi0.

    ``F1 = sin(p) (cos(w) + 2 cos(p))`` and ``F2 = sin(w) cos(p)`` with
    ``p = 2 pi u / 3`` and ``w = 2 pi (1 - sqrt3 v) / 3``; ``F1`` and ``F2``
    are nonzero multiples of the two partial derivatives of phi0.
    """
    u, v = _xy(u, v)
    p = 2 * PI * u / 3
    w = 2 * PI * (1 - SQRT3 * v) / 3
    return np.sin(p) * (np.cos(w) + 2 * np.cos(p)), np.sin(w) * np.cos(p)


def _critical_jacobian(u, v):
    p = 2 * PI * u / 3
    w = 2 * PI * (1 - SQRT3 * v) / 3
    dp, dw = 2 * PI / 3, -2 * PI * SQRT3 / 3
    sp, cp, sw, cw = np.sin(p), np.cos(p), np.sin(w), np.cos(w)
    j11 = dp * (cp * (cw + 2 * cp) - 2 * sp * sp)
    j12 = -dw * sp * sw
    j21 = -dp * sw * sp
    j22 = dw * cw * cp
    return j11, j12, j21, j22


def find_phi0_critical_points(window=CRITICAL_SEARCH_WINDOW, n_seeds: int = 64,
                              max_iter: int = 60, dedup: float = 1e-8) -> np.ndarray:
    """Critical points of phi0 in ``window = (u0, u1, v0, v1)`` by seeded Newton."""
    u0, u1, v0, v1 = window
    if not (u1 > u0 and v1 > v0):
        raise InputError("window must be a non-empty rectangle")
    uu, vv = np.meshgrid(np.linspace(u0, u1, n_seeds), np.linspace(v0, v1, n_seeds))
    u, v = uu.ravel().copy(), vv.ravel().copy()
    for _ in range(max_iter):
        f1, f2 = phi0_critical_residuals(u, v)
        j11, j12, j21, j22 = _critical_jacobian(u, v)
        det = j11 * j22 - j12 * j21
        ok = np.abs(det) > 1e-14
        safe = np.where(ok, det, 1.0)
        du = np.where(ok, (j22 * f1 - j12 * f2) / safe, 0.0)
        dv = np.where(ok, (-j21 * f1 + j11 * f2) / safe, 0.0)
        # damp long steps so seeds stay near their basin
        step = np.hypot(du, dv)
        scale = np.where(step > 0.1, 0.1 / np.maximum(step, 1e-300), 1.0)
        u -= scale * du
        v -= scale * dv
    f1, f2 = phi0_critical_residuals(u, v)
    conv = np.hypot(f1, f2) < 1e-12
    pad = 1e-10
    inside = (u >= u0 - pad) & (u <= u1 + pad) & (v >= v0 - pad) & (v <= v1 + pad)
    pts = np.stack([u[conv & inside], v[conv & inside]], -1)
    found: list = []
    for p in pts:
        if not any(np.hypot(*(p - q)) < dedup for q in found):
            found.append(p)
    found.sort(key=lambda p: (round(p[1], 9), round(p[0], 9)))
    return np.array(found).reshape(-1, 2)


# ---------------------------------------------------------------------------
# registry

FIELDS = {
    "xi1": ClosedFormField("xi1", xi1_dirichlet, xi1_grad, xi1_hess, XI1_EIGENVALUE),
    "f0": ClosedFormField("f0", f0_eval, f0_grad, f0_hess),
    "phi0": ClosedFormField("phi0", phi0_neumann, phi0_grad, phi0_hess, PHI0_EIGENVALUE),
}
SAMPLE_ONLY = {"phi1_dirichlet": phi1_dirichlet, "f1": f1_eval}


def get_field(name: str) -> Callable:
    if name in FIELDS:
        return FIELDS[name].value
    if name in SAMPLE_ONLY:
        return SAMPLE_ONLY[name]
    raise InputError(f"unknown field {name!r}; choose from {sorted(FIELDS) + sorted(SAMPLE_ONLY)}")


def sample_field(name: str, n: int, bounds=(-0.5, 0.5, -SQRT3 / 6, SQRT3 / 3)) -> np.ndarray:
    """Rows ``(u, v, value)`` on an n x n grid over ``bounds``."""
    f = get_field(name)
    uu, vv = np.meshgrid(np.linspace(bounds[0], bounds[1], n), np.linspace(bounds[2], bounds[3], n))
    return np.column_stack([uu.ravel(), vv.ravel(), f(uu.ravel(), vv.ravel())])
