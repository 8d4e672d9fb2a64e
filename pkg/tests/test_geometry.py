from __future__ import annotations

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecplab import geometry as g
from ecplab.errors import InputError, OutOfRangeT, TooFewSamples
from ecplab.geometry import SQRT3, DomainSpec

PI = math.pi
t_omega = st.floats(0.0, 0.5)
t_level = st.floats(0.005, 0.49)
angles = st.floats(-4 * PI, 4 * PI, allow_nan=False)


def builtin_specs():
    return [DomainSpec.triangle(), DomainSpec.omega(0.0), DomainSpec.omega(0.1),
            DomainSpec.omega(0.3), DomainSpec.omega(0.5), DomainSpec.level_set(0.05),
            DomainSpec.level_set(0.3), DomainSpec.rounded(0.05), DomainSpec.rounded(0.1),
            DomainSpec.rounded(0.25)]


# -- f0 and f0t ------------------------------------------------------------

def test_f0_reference_values():
    assert g.f0_eval(0, 0) == pytest.approx(1.0)
    assert g.f0_eval(-0.5, -SQRT3 / 6) == pytest.approx(0.0, abs=1e-15)
    assert g.f0_eval(0, SQRT3 / 6) == pytest.approx(0.5)


def test_f0_vanishes_on_sides_and_is_positive_inside():
    s = np.linspace(0, 1, 11)
    for p, q in itertools.combinations([g.VERTEX_A, g.VERTEX_B, g.VERTEX_C], 2):
        pts = p + s[:, None] * (q - p)
        assert np.allclose(g.f0_eval(pts[:, 0], pts[:, 1]), 0, atol=1e-14)
    assert g.f0_eval(0.1, 0.05) > 0


@given(st.floats(0, 1.5), angles)
def test_f0_polar_form(rho, theta):
    u, v = rho * math.cos(theta), rho * math.sin(theta)
    expected = 1 - 9 * rho ** 2 - 6 * SQRT3 * rho ** 3 * math.sin(3 * theta)
    assert g.f0_eval(u, v) == pytest.approx(expected, abs=1e-12)


@given(t_omega, st.floats(-1, 1), st.floats(-1, 1))
def test_f0t_is_dilation_of_f0(t, u, v):
    lhs = g.f0t_eval(t, u, v)
    rhs = (1 + t) ** 3 * g.f0_eval(u / (1 + t), v / (1 + t))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_f0t_reference_values():
    assert g.f0t_eval(0.1, *g.VERTEX_A) == pytest.approx(0.031, abs=1e-14)
    vals = [g.f0t_eval(0.2, *p) for p in (g.VERTEX_A, g.VERTEX_B, g.VERTEX_C)]
    assert vals == pytest.approx([g.omega_level(0.2)] * 3, abs=1e-14)
    with pytest.raises(OutOfRangeT):
        g.f0t_eval(-0.1, 0, 0)


# -- boundary evaluation ---------------------------------------------------

def test_triangle_side_inverse_radius():
    assert g.triangle_side_inverse_radius(PI / 6) == pytest.approx(2 * SQRT3)
    assert g.triangle_side_inverse_radius(-PI / 6) == pytest.approx(SQRT3)
    assert g.triangle_side_inverse_radius(PI / 2) == pytest.approx(SQRT3)


def test_omega_zero_reference_roots():
    spec = DomainSpec.omega(0.0)
    r, _ = g.boundary_inverse_radius(spec, np.array([-PI / 6, PI / 6]))
    assert r == pytest.approx([SQRT3, 2 * SQRT3], rel=1e-14)


@given(t_omega, angles)
def test_omega_root_in_bracket(t, theta):
    r, _ = g.boundary_inverse_radius(DomainSpec.omega(t), np.array([theta]))
    r_tri, _ = g.triangle_inverse_radius(np.array([theta]))
    assert r_tri[0] / (1 + t) * (1 - 1e-13) <= r[0] <= r_tri[0] * (1 + 1e-13)


@pytest.mark.parametrize("t", [0.0, 0.01, 0.1, 0.25, 0.5])
def test_omega_cubic_residual(t):
    theta = g.uniform_theta(1024)
    assert np.max(np.abs(g.boundary_cubic_residual(DomainSpec.omega(t), theta))) < 1e-12


@pytest.mark.parametrize("t", [0.01, 0.2, 0.49])
def test_level_set_cubic_residual(t):
    theta = g.uniform_theta(1024)
    assert np.max(np.abs(g.boundary_cubic_residual(DomainSpec.level_set(t), theta))) < 1e-12


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.label())
def test_boundary_lies_on_level_set(spec):
    pts = spec.boundary_points(g.uniform_theta(512))
    assert np.max(np.abs(spec.level_residual(pts))) < 1e-10


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.label())
def test_r_theta_matches_finite_differences(spec):
    theta = g.uniform_theta(97) + 0.013
    d = 1e-6
    r, rt = g.boundary_inverse_radius(spec, theta)
    rp, _ = g.boundary_inverse_radius(spec, theta + d)
    rm, _ = g.boundary_inverse_radius(spec, theta - d)
    assert np.allclose(rt, (rp - rm) / (2 * d), atol=1e-6)


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.label())
def test_g0_invariance_of_radius(spec):
    # offset keeps the grid off the corners, where r_theta jumps
    theta = g.uniform_theta(96) + 0.013
    r, rt = spec.inverse_radius(theta)
    r_rot, rt_rot = spec.inverse_radius(theta + 2 * PI / 3)
    assert np.allclose(r, r_rot, rtol=1e-13) and np.allclose(rt, rt_rot, atol=1e-12)
    # the mirror D_C maps theta to pi - theta and flips r_theta
    r_mir, rt_mir = spec.inverse_radius(PI - theta)
    assert np.allclose(r, r_mir, rtol=1e-13) and np.allclose(rt, -rt_mir, atol=1e-12)


@given(st.floats(0.0, 0.49), st.floats(0.001, 0.5))
def test_omega_nesting(t1, dt):
    t2 = min(0.5, t1 + dt)
    theta = g.uniform_theta(256)
    rho1 = DomainSpec.omega(t1).rho(theta)
    rho2 = DomainSpec.omega(t2).rho(theta)
    assert np.all(rho1 <= rho2 + 1e-12)


@given(t_omega)
def test_omega_sandwich(t):
    theta = g.uniform_theta(256)
    rho0 = DomainSpec.triangle().rho(theta)
    rho = DomainSpec.omega(t).rho(theta)
    assert np.all(rho0 <= rho + 1e-12)
    assert np.all(rho <= (1 + t) * rho0 + 1e-12)


def test_vertices_on_every_omega_boundary():
    for t in (0.0, 0.1, 0.4):
        r, _ = g.boundary_inverse_radius(DomainSpec.omega(t), np.array([-PI / 6, PI / 2, 7 * PI / 6]))
        assert r == pytest.approx([SQRT3] * 3, rel=1e-13)


# -- certificates ----------------------------------------------------------

def test_lipschitz_reference():
    assert g.lipschitz_ratio(DomainSpec.omega(0.1), np.array([PI / 6]))[0] == pytest.approx(0, abs=1e-12)
    grid = g.uniform_theta(64)
    for spec in (DomainSpec.omega(0.2), DomainSpec.level_set(0.3)):
        assert np.all(np.abs(g.lipschitz_ratio(spec, grid)) <= SQRT3 + 1e-9)


@given(t_omega)
def test_lipschitz_bound_omega(t):
    ratio = g.lipschitz_ratio(DomainSpec.omega(t), g.uniform_theta(1024))
    assert np.all(np.abs(ratio) <= SQRT3 + 1e-9)


@given(t_level)
def test_lipschitz_bound_level_set(t):
    ratio = g.lipschitz_ratio(DomainSpec.level_set(t), g.uniform_theta(1024))
    assert np.all(np.abs(ratio) <= SQRT3 + 1e-9)


def test_convexity_certificate_examples():
    theta = g.uniform_theta(256)
    circle = g.PolarBoundary(theta, np.ones_like(theta))
    c = g.convexity_certificate(circle)
    assert c["ok"] and c["min_value"] == pytest.approx(1.0)
    peanut = g.PolarBoundary(theta, 1 + 0.5 * np.cos(2 * theta))
    assert not g.convexity_certificate(peanut)["ok"]
    with pytest.raises(TooFewSamples):
        g.convexity_certificate(g.PolarBoundary(theta[:8], np.ones(8)))


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.label())
def test_builtin_domains_convex(spec):
    assert g.convexity_certificate(g.sample_boundary(spec, 1024))["ok"]


@given(t_omega)
def test_convexity_along_family(t):
    assert g.convexity_certificate(g.sample_boundary(DomainSpec.omega(t), 1024))["ok"]


def test_mollify_circle_constant():
    theta = g.uniform_theta(256)
    out = g.mollify_boundary(g.PolarBoundary(theta, np.ones_like(theta)), 0.1)
    assert np.ptp(out.r) < 1e-12
    assert 1 / 1.15 < out.r[0] < 1 / 1.05


def test_mollify_triangle_sandwich_and_symmetry():
    b = g.sample_boundary(DomainSpec.triangle(), 1024)
    out = g.mollify_boundary(b, 0.05)
    assert np.all(out.r > b.r / 1.075) and np.all(out.r < b.r / 1.025)
    assert g.convexity_certificate(out)["ok"]
    # theta -> pi - theta on the uniform grid is index k -> n/2 - k
    n = len(out.r)
    mirror = out.r[(n // 2 - np.arange(n)) % n]
    assert np.allclose(out.r, mirror, atol=1e-12)


def test_mollify_rejects_bad_eps():
    b = g.sample_boundary(DomainSpec.triangle(), 64)
    with pytest.raises(InputError):
        g.mollify_boundary(b, 0.7)


# -- distances -------------------------------------------------------------

def test_distance_examples():
    T0 = DomainSpec.triangle()
    assert g.dr_distance(T0, T0) == 0
    assert g.dr_distance(T0, DomainSpec.omega(0.0)) < 1e-14
    assert g.hausdorff_distance(T0, T0) == 0
    dr, dh = g.disk_distances(1.0, 2.0)
    assert dr == 1.0 and dh == pytest.approx(1.0)


@given(st.floats(0.001, 0.5))
def test_dr_bounded_by_dilation(t):
    T0 = DomainSpec.triangle()
    assert g.dr_distance(T0, DomainSpec.omega(t)) <= t * g.CIRCUMRADIUS + 1e-12


@pytest.mark.parametrize("t", [0.05, 0.1, 0.3])
def test_hausdorff_below_dr(t):
    out = g.check_distance_ordering(DomainSpec.triangle(), DomainSpec.omega(t))
    assert out["d_H"] <= out["d_r"] + out["tol"]


def test_distance_ordering_violation_raises(monkeypatch):
    monkeypatch.setattr(g, "hausdorff_distance", lambda *a, **k: 10.0)
    with pytest.raises(AssertionError):
        g.check_distance_ordering(DomainSpec.triangle(), DomainSpec.omega(0.1))


def test_ball_sandwich_and_area():
    s = g.ball_sandwich(DomainSpec.triangle())
    assert s["rho_min"] == pytest.approx(g.INRADIUS, rel=1e-12)
    assert s["rho_max"] == pytest.approx(g.CIRCUMRADIUS, rel=1e-12)
    assert g.polar_area(DomainSpec.triangle(), 8192) == pytest.approx(SQRT3 / 4, rel=1e-4)


def test_rounded_triangle_inside_t0():
    theta = g.uniform_theta(512)
    rho0 = DomainSpec.triangle().rho(theta)
    for a in (0.02, 0.1, 0.28):
        assert np.all(DomainSpec.rounded(a).rho(theta) <= rho0 + 1e-12)


# -- specs and group -------------------------------------------------------

@pytest.mark.parametrize("kwargs", [("omega", -0.1), ("omega", 0.6), ("level_set", 0.0),
                                    ("level_set", 0.5), ("rounded", 0.0), ("rounded", 0.3)])
def test_invalid_parameters(kwargs):
    name, val = kwargs
    with pytest.raises(InputError):
        getattr(DomainSpec, name)(val)


@pytest.mark.parametrize("spec", builtin_specs(), ids=lambda s: s.label())
def test_spec_round_trip(spec):
    again = DomainSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again.label() == spec.label()
    theta = g.uniform_theta(64)
    assert np.array_equal(again.rho(theta), spec.rho(theta))


def test_tabulated_reproduces_source():
    theta = g.uniform_theta(512)
    src = DomainSpec.omega(0.2)
    tab = DomainSpec.tabulated(theta, src.rho(theta))
    probe = theta[:-1] + 0.5 * np.diff(theta)
    assert np.allclose(tab.rho(probe), src.rho(probe), rtol=1e-6)


def test_group_table_examples():
    assert g.group_compose("D_A", "D_B") == "R"
    assert g.group_compose("R", "R2") == "I"
    assert np.array_equal(g.group_apply("D_C", np.array([0.3, -0.2])), [-0.3, -0.2])


def test_group_table_matches_matrix_products():
    for a, b in itertools.product(g.GROUP_ELEMENTS, repeat=2):
        prod = g.GROUP_MATRICES[a] @ g.GROUP_MATRICES[b]
        assert g.group_from_matrix(prod) == g.group_compose(a, b)


def test_group_axioms():
    els = g.GROUP_ELEMENTS
    for a, b, c in itertools.product(els, repeat=3):
        assert g.group_compose(g.group_compose(a, b), c) == g.group_compose(a, g.group_compose(b, c))
    for a in els:
        assert sum(g.group_compose(a, b) == "I" for b in els) == 1
    for m in ("D_A", "D_B", "D_C"):
        assert g.group_compose(m, m) == "I"
    assert g.group_compose("R", g.group_compose("R", "R")) == "I"


def test_group_preserves_triangle():
    verts = np.array([g.VERTEX_A, g.VERTEX_B, g.VERTEX_C])
    for e in g.GROUP_ELEMENTS:
        img = g.group_apply(e, verts)
        d = np.linalg.norm(img[:, None] - verts[None], axis=-1)
        assert np.all(d.min(axis=1) < 1e-14)


def test_export_domain_fields():
    d = g.export_domain(DomainSpec.omega(0.1), 64)
    assert set(d) >= {"kind", "params", "theta", "rho"}
    assert len(d["theta"]) == len(d["rho"]) == 64
