from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecplab import deform, fem, nodal
from ecplab.closedform import PHI0_EIGENVALUE
from ecplab.errors import InputError
from ecplab.geometry import INRADIUS, SQRT3

SMALL = deform.DeformConfig(t_grid=(0.1, 0.05), h=0.1, levels=3, n_offsets=100)


@pytest.fixture(scope="module")
def continuity():
    return deform.run_continuity(SMALL)


@pytest.fixture(scope="module")
def ecp():
    return deform.run_ecp(SMALL)


# --- configuration ----------------------------------------------------------

def test_config_defaults_and_exponents():
    cfg = deform.DeformConfig()
    assert cfg.t_grid == (0.3, 0.2, 0.1, 0.05)
    assert cfg.q0 == pytest.approx(0.5) and cfg.p0 == pytest.approx(4.0)
    assert cfg.k_radius < INRADIUS


def test_config_round_trip():
    cfg = deform.DeformConfig(t_grid=[0.05, 0.2], h=0.1)
    assert cfg.t_grid == (0.2, 0.05)
    back = deform.DeformConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg


@pytest.mark.parametrize("kwargs", [{"t_grid": (0.0,)}, {"t_grid": (0.6,)}, {"t_grid": ()},
                                    {"s0": 2.0}, {"k_radius": 0.3}, {"levels": 1}, {"h": 0.5}])
def test_config_rejects(kwargs):
    with pytest.raises(InputError):
        deform.DeformConfig(**kwargs)


def test_config_rejects_unknown_keys():
    with pytest.raises(InputError):
        deform.DeformConfig.from_dict({"tgrid": [0.1]})


def test_thread_budget(monkeypatch):
    monkeypatch.setenv("ECPLAB_THREADS", "3")
    assert deform.thread_budget() == 3
    monkeypatch.setenv("ECPLAB_THREADS", "0")
    assert deform.thread_budget() == 1
    monkeypatch.setenv("ECPLAB_THREADS", "many")
    with pytest.raises(InputError):
        deform.thread_budget()


# --- helpers -------------------------------------------------------------

def test_compact_points_inside_disk():
    pts = deform.compact_points(0.2, 24)
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert r.max() == pytest.approx(0.2) and r.min() == 0.0


@given(st.floats(1e-3, 0.5))
def test_sandwich(t):
    assert deform.sandwich_holds(t, 256)


def test_loglog_exponent():
    x = np.array([0.1, 0.2, 0.4])
    assert deform.loglog_exponent(x, 3 * x ** 1.5) == pytest.approx(1.5)
    assert deform.loglog_exponent([0.1], [1.0]) is None


# --- experiments -----------------------------------------------------------

def test_continuity_rows(continuity):
    zero = continuity.rows[0]
    assert zero["t"] == 0 and zero["d_r"] == 0 and zero["diff_plus"] == 0
    assert zero["nu_plus"] == pytest.approx(PHI0_EIGENVALUE, rel=3e-3)
    assert all(r["split"] < 1e-3 for r in continuity.rows)
    assert continuity.checks["nu+ difference decreases as t decreases"]
    assert continuity.exponent is not None and continuity.exponent > 0


def test_convergence_sign_convention():
    rep = deform.run_convergence(SMALL)
    assert all(r["inner_phi0"] > 0 for r in rep.rows)
    zero = rep.rows[0]
    assert zero["t"] == 0 and zero["sup_dist"] < 0.05
    assert rep.checks["sup distance decreases as t decreases"]


def test_ecp_rows(ecp):
    rows = {r["t"]: r for r in ecp.rows}
    r = rows[0.1]
    assert r["beta0"] == 3 and r["n_negative"] == 2
    assert r["mirror_swap"] and r["eps_stable"] and r["refine_stable"] and r["chord_positive"]
    assert r["beta0_above"] == 1
    assert r["window_overlap"] >= 0.5
    assert ecp.extra["largest_passing_t"] == 0.1
    assert ecp.checks["window found for every t"]


def test_negative_components_hold_corner_probes():
    case = deform.family_case(0.1, SMALL.h, SMALL.levels)
    m, phi = case.finest, case.phi()
    a = nodal.find_three_domain_window(m, phi, n_steps=100).midpoint
    rep = nodal.count_nodal_domains(m, phi, a)
    probes = 0.9 * np.array([[-0.5, -SQRT3 / 6], [0.5, -SQRT3 / 6]])
    ids = [int(np.argmin(np.linalg.norm(m.vertices - p, axis=1))) for p in probes]
    labs = rep.labels[ids]
    assert labs[0] != labs[1]
    assert all(rep.components[k].sign < 0 for k in labs)


def test_report_serialises(ecp):
    json.dumps(ecp.to_dict())
    lines = ecp.summary().splitlines()
    assert sum(ln.startswith(("PASS", "FAIL")) for ln in lines) == len(ecp.checks)
    csv_text = ecp.to_csv()
    assert csv_text.splitlines()[0].startswith("t,")


def test_strict_mode_raises_without_window(monkeypatch):
    from ecplab.errors import WindowNotFound
    empty = nodal.WindowScan(np.zeros(1), np.zeros(1, int), np.zeros(1, int), None)
    monkeypatch.setattr(nodal, "find_three_domain_window", lambda *a, **k: empty)
    with pytest.raises(WindowNotFound):
        deform.run_ecp(SMALL, strict=True)


def test_rounded_triangle():
    out = deform.run_rounded_triangle(0.1, h=0.1, offsets=100)
    assert out["beta0_at_zero"] == 2
    assert out["window"] is not None
    assert out["beta0"] == 3 and out["signature"] == [1, 2] and out["mirror_swap"]


def test_small_corner_radius_approaches_triangle():
    near = deform.run_rounded_triangle(0.01, h=0.1, offsets=20, levels=2)["nu_plus"]
    t0 = fem.nu_plus(deform.DomainSpec.triangle(), 0.05)[0]
    assert near == pytest.approx(t0, rel=5e-3)
