from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from ecplab import closedform as cf
from ecplab.errors import InputError, OnZeroSet
from ecplab.geometry import SQRT3, f0_eval, f0t_eval, group_apply, GROUP_ELEMENTS

PI = math.pi
T_E_CENTROID = (0.5, SQRT3 / 6)


def _bary_point(a, b):
    """Point of T0 from two barycentric weights in (0, 1) with a + b < 1."""
    A = np.array([-0.5, -SQRT3 / 6])
    B = np.array([0.5, -SQRT3 / 6])
    C = np.array([0.0, SQRT3 / 3])
    return (1 - a - b) * A + a * B + b * C


interior = st.tuples(st.floats(0.02, 0.96), st.floats(0.02, 0.96)).filter(
    lambda w: w[0] + w[1] < 0.98)
plane = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


def _fd_grad(f, u, v, h=1e-6):
    return np.array([(f(u + h, v) - f(u - h, v)) / (2 * h),
                     (f(u, v + h) - f(u, v - h)) / (2 * h)])


def _fd_hess(g, u, v, h=1e-6):
    return np.column_stack([(g(u + h, v) - g(u - h, v)) / (2 * h),
                            (g(u, v + h) - g(u, v - h)) / (2 * h)])


# --- xi1 on T_e ----------------------------------------------------------

def test_xi_centroid_value():
    assert cf.xi1_dirichlet(*T_E_CENTROID) == pytest.approx(3 * SQRT3 / 2, abs=1e-14)
    assert cf.xi1_dirichlet_product(*T_E_CENTROID) == pytest.approx(3 * SQRT3 / 2, abs=1e-14)


@given(plane)
def test_xi_sum_equals_product(p):
    assert cf.xi1_dirichlet(*p) == pytest.approx(cf.xi1_dirichlet_product(*p), abs=1e-12)


@pytest.mark.parametrize("p", [(0, 0), (1, 0), (0.5, SQRT3 / 2), (0.3, 0.0), (0.25, SQRT3 / 4)])
def test_xi_vanishes_on_boundary(p):
    assert abs(cf.xi1_dirichlet(*p)) < 1e-14


@given(plane)
def test_xi_eigen_equation(p):
    h = cf.xi1_hess(*p)
    lap = h[0, 0] + h[1, 1]
    assert lap + cf.XI1_EIGENVALUE * cf.xi1_dirichlet(*p) == pytest.approx(0, abs=1e-10)


@given(plane)
def test_xi_derivatives_match_finite_differences(p):
    np.testing.assert_allclose(cf.xi1_grad(*p), _fd_grad(cf.xi1_dirichlet, *p), atol=1e-6)
    np.testing.assert_allclose(cf.xi1_hess(*p), _fd_hess(cf.xi1_grad, *p), atol=1e-5)


def test_xi_log_hessian_at_centroid():
    assert cf.log_hessian_det_xi(*T_E_CENTROID) == pytest.approx(64 * PI ** 4 / 9, rel=1e-12)


@given(interior)
def test_xi_log_hessian_closed_form_matches_derivatives(w):
    u, v = _bary_point(*w)
    x, y = u + 0.5, v + SQRT3 / 6
    assert cf.log_hessian_det_xi(x, y) == pytest.approx(cf.log_hessian_det_xi_exact(x, y), rel=1e-8)
    assert cf.log_hessian_det_xi(x, y) > 0


def test_xi_log_hessian_outside_raises():
    with pytest.raises(OnZeroSet):
        cf.log_hessian_det_xi(0.5, -0.1)
    with pytest.raises(OnZeroSet):
        cf.log_hessian_det_xi_exact(2.0, 0.1)


@given(interior)
def test_phi1_is_shifted_xi(w):
    u, v = _bary_point(*w)
    assert cf.phi1_dirichlet(u, v) == pytest.approx(
        cf.xi1_dirichlet_product(u + 0.5, v + SQRT3 / 6), abs=1e-13)


# --- torsion polynomial ------------------------------------------------------

@pytest.mark.parametrize("p, expected", [((0.0, 0.0), 1.0), ((0.0, SQRT3 / 6), 0.5),
                                         ((-0.5, -SQRT3 / 6), 0.0), ((0.0, SQRT3 / 3), 0.0)])
def test_f0_values(p, expected):
    assert f0_eval(*p) == pytest.approx(expected, abs=1e-14)


def test_log_hessian_f0_examples():
    assert cf.log_hessian_det_f0(0.0, 0.0) == pytest.approx(324.0)
    assert cf.log_hessian_det_f0(0.0, SQRT3 / 6) == pytest.approx(1944.0)
    with pytest.raises(OnZeroSet):
        cf.log_hessian_det_f0(0.0, -0.5)


@given(interior)
def test_log_hessian_f0_matches_derivatives(w):
    u, v = _bary_point(*w)
    assert cf.log_hessian_det_f0(u, v) == pytest.approx(cf.log_hessian_det_f0_exact(u, v), rel=1e-9)


@given(plane)
def test_f0_derivatives_match_finite_differences(p):
    np.testing.assert_allclose(cf.f0_grad(*p), _fd_grad(f0_eval, *p), rtol=1e-6, atol=1e-5)
    np.testing.assert_allclose(cf.f0_hess(*p), _fd_hess(cf.f0_grad, *p), rtol=1e-6, atol=1e-5)


@given(plane)
def test_f0_laplacian_is_constant(p):
    h = cf.f0_hess(*p)
    assert h[0, 0] + h[1, 1] == pytest.approx(-36.0, abs=1e-10)


@pytest.mark.parametrize("t", [0, 0.1, 0.25, 1])
def test_torsion_laplacian_exact(t):
    for p in [(0.0, 0.0), (0.3, -0.2), (-1.0, 2.0)]:
        assert cf.torsion_laplacian_check(t, *p) == pytest.approx(-36 * (1 + t), abs=1e-10)


@given(plane, st.floats(0, 1))
def test_torsion_polynomial_evaluates_to_f0t(p, t):
    poly = cf.torsion_polynomial(0)
    val = sum((float(a) + float(b) * SQRT3) * p[0] ** i * p[1] ** j for (i, j), (a, b) in poly.items())
    assert val == pytest.approx(f0_eval(*p), abs=1e-9)
    assert f0t_eval(0.0, *p) == pytest.approx(f0_eval(*p), abs=1e-12)


@given(plane)
def test_f1_is_f0_with_swapped_arguments(p):
    x, y = p
    assert cf.f1_eval(x, y) == pytest.approx(f0_eval(y, x), abs=1e-10)


@given(plane, st.sampled_from(GROUP_ELEMENTS))
def test_f0_is_group_invariant(p, g):
    q = group_apply(g, np.array(p))
    assert f0_eval(*q) == pytest.approx(f0_eval(*p), rel=1e-10, abs=1e-10)


# --- phi0 -----------------------------------------------------------------

@pytest.mark.parametrize("p, expected", [((0.0, 0.0), 0.0), ((0.0, SQRT3 / 3), 3.0),
                                         ((-0.5, -SQRT3 / 6), -1.5), ((0.5, -SQRT3 / 6), -1.5),
                                         ((0.0, -SQRT3 / 6), -1.0)])
def test_phi0_values(p, expected):
    assert cf.phi0_neumann(*p) == pytest.approx(expected, abs=1e-14)


@given(plane)
def test_phi0_eigen_equation(p):
    assert cf.phi0_eigen_residual(*p) < 1e-10


def test_single_plane_wave_solves_pde_but_not_boundary_condition():
    assert cf.plane_wave_residual(0.3, 0.1) < 1e-12
    # normal derivative of cos(4 pi u / 3) on side BC at its midpoint
    k = 4 * PI / 3
    mid = np.array([0.25, SQRT3 / 12])
    n = np.array([SQRT3 / 2, 0.5])
    assert abs(-k * math.sin(k * mid[0]) * n[0]) > 0.5


@given(plane)
def test_phi0_derivatives_match_finite_differences(p):
    np.testing.assert_allclose(cf.phi0_grad(*p), _fd_grad(cf.phi0_neumann, *p), atol=1e-6)
    np.testing.assert_allclose(cf.phi0_hess(*p), _fd_hess(cf.phi0_grad, *p), atol=1e-5)


@given(plane)
def test_phi0_even_under_mirror(p):
    assert cf.phi0_neumann(-p[0], p[1]) == pytest.approx(cf.phi0_neumann(*p), abs=1e-12)


@given(st.floats(0, 1))
def test_phi0_neumann_condition(s):
    A = np.array([-0.5, -SQRT3 / 6])
    B = np.array([0.5, -SQRT3 / 6])
    C = np.array([0.0, SQRT3 / 3])
    for P, Q in ((A, B), (B, C), (C, A)):
        x = P + s * (Q - P)
        d = Q - P
        n = np.array([d[1], -d[0]]) / np.linalg.norm(d)
        assert float(cf.phi0_grad(*x) @ n) == pytest.approx(0.0, abs=1e-12)


@given(plane)
def test_phi0_periodic(p):
    for w in cf.PHI0_PERIODS:
        assert cf.phi0_neumann(p[0] + w[0], p[1] + w[1]) == pytest.approx(cf.phi0_neumann(*p), abs=1e-10)


def _t0_integral(f):
    lo, hi = -SQRT3 / 6, SQRT3 / 3
    width = lambda v: (hi - v) / SQRT3
    val, _ = integrate.dblquad(lambda u, v: f(u, v), lo, hi, lambda v: -width(v), width, epsabs=1e-12)
    return val


def test_phi0_norm_and_mean():
    assert _t0_integral(lambda u, v: cf.phi0_neumann(u, v) ** 2) == pytest.approx(cf.PHI0_NORM_SQ, rel=1e-9)
    assert _t0_integral(lambda u, v: cf.phi0_normalized(u, v) ** 2) == pytest.approx(1.0, rel=1e-9)
    assert _t0_integral(cf.phi0_neumann) == pytest.approx(0.0, abs=1e-10)


def test_phi0_critical_points_in_window():
    pts = cf.find_phi0_critical_points()
    np.testing.assert_allclose(pts, cf.PHI0_CRITICAL_POINTS, atol=1e-10)
    for p in pts:
        np.testing.assert_allclose(cf.phi0_grad(*p), 0, atol=1e-10)


def test_critical_search_rejects_empty_window():
    with pytest.raises(InputError):
        cf.find_phi0_critical_points((0, 0, 0, 1))


# --- registry -------------------------------------------------------------

def test_sample_field_grid():
    rows = cf.sample_field("phi0", 5)
    assert rows.shape == (25, 3)
    np.testing.assert_allclose(rows[:, 2], cf.phi0_neumann(rows[:, 0], rows[:, 1]))
    assert cf.sample_field("f1", 2).shape == (4, 3)


def test_unknown_field():
    with pytest.raises(InputError):
        cf.get_field("nope")


def test_registered_eigenvalues():
    assert cf.FIELDS["phi0"].eigenvalue == pytest.approx(16 * PI ** 2 / 9)
    assert cf.FIELDS["xi1"].eigenvalue == pytest.approx(16 * PI ** 2 / 3)
    assert cf.FIELDS["f0"](0.0, 0.0) == pytest.approx(1.0)
