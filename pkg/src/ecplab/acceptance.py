"""Acceptance checks shared by ``ecplab verify`` and the test suite.

Each check returns a :class:`CheckResult` with the measured numbers, so a
failure always comes with its diagnostics.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import closedform as cf
from . import deform, fem, nodal
from .geometry import (
    SQRT3,
    VERTEX_A,
    VERTEX_B,
    VERTEX_C,
    DomainSpec,
    boundary_cubic_residual,
    convexity_certificate,
    lipschitz_ratio,
    sample_boundary,
    uniform_theta,
)
from .mesh import generate, refine

BASE_H = 0.05
FAMILY_T = (0.05, 0.1, 0.2, 0.3)
ECP_T = (0.05, 0.1, 0.2)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.number}] {self.name}"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "details": _plain(self.details)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def _random_interior(rng, n, corners, margin=0.01):
    """Points with all barycentric coordinates at least ``margin``."""
    w = rng.dirichlet(np.ones(3), size=n)
    w = margin + (1 - 3 * margin) * w
    return w @ np.asarray(corners)


# ---------------------------------------------------------------------------

def spectral_oracle(h: float = BASE_H) -> CheckResult:
    t0 = time.perf_counter()
    T = DomainSpec.triangle()
    nu = fem.extrapolated_eigenvalue(T, h, 2, "neumann")
    t_nu = time.perf_counter() - t0
    delta = fem.extrapolated_eigenvalue(T, h, 1, "dirichlet")
    t_delta = time.perf_counter() - t0 - t_nu
    err_nu = abs(nu["extrapolated"] - cf.PHI0_EIGENVALUE) / cf.PHI0_EIGENVALUE
    err_de = abs(delta["extrapolated"] - cf.XI1_EIGENVALUE) / cf.XI1_EIGENVALUE
    n_tri = refine(refine(generate(T, h))).n_triangles
    ok = err_nu < 5e-4 and err_de < 5e-4 and t_nu <= 120 and t_delta <= 120 and n_tri <= 100_000
    return CheckResult(1, "closed-form spectral oracle", ok, {
        "nu2": nu, "nu2_rel_err": err_nu, "delta1": delta, "delta1_rel_err": err_de,
        "seconds_nu2": t_nu, "seconds_delta1": t_delta, "finest_triangles": n_tri})


def _extrapolated_pair(spec, h):
    m = generate(spec, h)
    lam2, lam3 = [], []
    for lvl in range(3):
        if lvl:
            m = refine(m)
        ev = fem.solve_mesh(m, 3).eigenvalues
        lam2.append(ev[1])
        lam3.append(ev[2])
    return fem.richardson(lam2)["extrapolated"], fem.richardson(lam3)["extrapolated"]


def degeneracy_split(h: float = BASE_H, ts=FAMILY_T) -> CheckResult:
    rows = []
    for t in (0.0,) + tuple(ts):
        spec = DomainSpec.triangle() if t == 0 else DomainSpec.omega(t)
        n2, n3 = _extrapolated_pair(spec, h)
        case = deform.family_case(t, h, 3)
        npl, nmi = case.nu_plus["extrapolated"], case.nu_minus["extrapolated"]
        rows.append({"t": t, "nu2": n2, "nu3": n3, "gap23": abs(n2 - n3) / n2,
                     "nu_plus": npl, "nu_minus": nmi, "split": abs(npl - nmi) / npl})
    ok = all(r["gap23"] < 1e-3 and r["split"] < 1e-3 for r in rows)
    return CheckResult(2, "degeneracy and symmetry split", ok, {"rows": rows})


def ecp_counterexample(h: float = BASE_H, ts=ECP_T) -> CheckResult:
    cfg = deform.DeformConfig(t_grid=ts, h=h)
    rows = []
    for t in ts:
        r = deform.ecp_row(deform.family_case(t, h, cfg.levels), cfg)
        rows.append({k: r.get(k) for k in ("t", "window", "a", "beta0", "n_positive", "n_negative",
                                           "mirror_swap", "eps_stable", "refine_stable", "window_overlap")})
    ok = all(r["window"] is not None and r["beta0"] == 3 and r["n_positive"] == 1
             and r["n_negative"] == 2 and r["mirror_swap"] and r["eps_stable"] and r["refine_stable"]
             for r in rows)
    return CheckResult(3, "three nodal domains on Omega_t", ok, {"rows": rows})


def rounded_triangle(h: float = BASE_H) -> CheckResult:
    r = deform.run_rounded_triangle(0.1, h)
    r.pop("scan", None)
    ok = r["window"] is not None and r.get("signature") == [1, 2]
    return CheckResult(4, "rounded-triangle three-domain window", ok, r)


def geometry_certificates(n: int = 1024) -> CheckResult:
    theta = uniform_theta(n)
    omega_t = [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
    level_t = [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.49]
    bound = SQRT3 + 1e-9
    lip, conv, res = {}, {}, {}
    for kind, ts, make in (("omega", omega_t, DomainSpec.omega), ("level_set", level_t, DomainSpec.level_set)):
        for t in ts:
            spec = make(t)
            key = f"{kind}({t})"
            lip[key] = float(np.max(np.abs(lipschitz_ratio(spec, theta))))
            conv[key] = convexity_certificate(sample_boundary(spec, n))["min_value"]
            res[key] = float(np.max(np.abs(boundary_cubic_residual(spec, theta))))
    # the vertices of T0 lie on every boundary, so allow roundoff there
    rho = np.array([sample_boundary(DomainSpec.omega(t), n).rho for t in omega_t])
    nested = bool(np.all(np.diff(rho, axis=0) >= -1e-12))
    rho_l = np.array([sample_boundary(DomainSpec.level_set(t), n).rho for t in level_t])
    nested_level = bool(np.all(np.diff(rho_l, axis=0) <= 1e-12))
    ok = (max(lip.values()) <= bound and min(conv.values()) >= -1e-8 and nested
          and max(res.values()) < 1e-12)
    return CheckResult(5, "geometry certificates", ok, {
        "max_lipschitz_ratio": max(lip.values()), "lipschitz": lip,
        "min_convexity": min(conv.values()), "max_cubic_residual": max(res.values()),
        "omega_nested_increasing": nested, "level_set_nested_decreasing": nested_level})


def closed_form_identities(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    x, y = rng.uniform(-2, 2, 10_000), rng.uniform(-2, 2, 10_000)
    sum_prod = float(np.max(np.abs(cf.xi1_dirichlet(x, y) - cf.xi1_dirichlet_product(x, y))))
    te = _random_interior(rng, 1000, [[0, 0], [1, 0], [0.5, SQRT3 / 2]])
    t0 = _random_interior(rng, 1000, [VERTEX_A, VERTEX_B, VERTEX_C])
    xi_cf = cf.log_hessian_det_xi(te[:, 0], te[:, 1])
    xi_ex = cf.log_hessian_det_xi_exact(te[:, 0], te[:, 1])
    f_cf = cf.log_hessian_det_f0(t0[:, 0], t0[:, 1])
    f_ex = cf.log_hessian_det_f0_exact(t0[:, 0], t0[:, 1])
    xi_rel = float(np.max(np.abs(xi_cf - xi_ex) / np.abs(xi_ex)))
    f_rel = float(np.max(np.abs(f_cf - f_ex) / np.abs(f_ex)))
    lap = cf.torsion_laplacian_check(0)
    pts = rng.uniform(-3, 3, (1000, 2))
    eig_res = float(np.max(np.abs(cf.phi0_eigen_residual(pts[:, 0], pts[:, 1]))))
    crit = cf.find_phi0_critical_points()
    expected = cf.PHI0_CRITICAL_POINTS
    crit_ok = crit.shape == expected.shape and all(
        np.min(np.hypot(*(crit - p).T)) < 1e-8 for p in expected)
    ok = (sum_prod < 1e-12 and xi_rel < 1e-8 and f_rel < 1e-8 and np.all(xi_cf > 0)
          and np.all(f_cf > 0) and lap == -36 and eig_res < 1e-10 and crit_ok)
    return CheckResult(6, "closed-form identity suite", ok, {
        "xi_sum_vs_product": sum_prod, "xi_log_hessian_rel": xi_rel, "f0_log_hessian_rel": f_rel,
        "laplacian_f0": lap, "phi0_eigen_residual": eig_res, "critical_points": crit})


def _tested_domains():
    return [DomainSpec.triangle()] + [DomainSpec.omega(t) for t in FAMILY_T] + [
        DomainSpec.rounded(0.1), DomainSpec.level_set(0.3)]


def courant_gladwell_zhu(h: float = BASE_H) -> CheckResult:
    courant = {}
    for spec in (DomainSpec.triangle(), DomainSpec.omega(0.1)):
        m = refine(generate(spec, h))
        rows = nodal.courant_check(fem.solve_mesh(m, 10))
        courant[spec.label()] = [(r["beta0"], r["kappa"]) for r in rows]
        courant[spec.label() + "_pass"] = all(r["pass"] for r in rows)
    gz = {}
    for spec in _tested_domains():
        m = refine(generate(spec, h))
        res = fem.solve_mesh(m, 2)
        sym = fem.nu_plus_on(m).extended(+1)
        for name, phi in (("symmetric", sym), ("solver", res.vectors[:, 1])):
            grid = np.linspace(0, 1.5 * np.max(np.abs(phi)), 52)[1:-1]
            out = nodal.gladwell_zhu_check(m, phi, 2, grid)
            gz[f"{spec.label()}:{name}"] = {"pass": out["pass"], "max_positive": max(out["positive_counts"])}
    ok = all(v for k, v in courant.items() if k.endswith("_pass")) and all(v["pass"] for v in gz.values())
    return CheckResult(7, "Courant and Gladwell-Zhu", ok, {"courant": courant, "gladwell_zhu": gz})


def continuity_convergence(h: float = BASE_H) -> CheckResult:
    cfg = deform.DeformConfig(t_grid=FAMILY_T, h=h)
    cont = deform.run_continuity(cfg)
    conv = deform.run_convergence(cfg)
    checks = {**cont.checks, **conv.checks}
    ok = all(checks.values())
    return CheckResult(8, "continuity and convergence along the family", ok, {
        "checks": checks, "exponent": cont.exponent,
        "continuity": cont.rows, "convergence": conv.rows})


def polya(h: float = BASE_H) -> CheckResult:
    rows = []
    for spec in _tested_domains():
        m = refine(generate(spec, h))
        nu2 = float(fem.solve_mesh(m, 2).eigenvalues[1])
        d1 = float(fem.solve_mesh(m, 1, "dirichlet").eigenvalues[0])
        rows.append({"domain": spec.label(), "nu2": nu2, "delta1": d1, "holds": nu2 < d1})
    return CheckResult(9, "Polya inequality nu2 < delta1", all(r["holds"] for r in rows), {"rows": rows})


CRITERIA: dict = {
    1: spectral_oracle,
    2: degeneracy_split,
    3: ecp_counterexample,
    4: rounded_triangle,
    5: geometry_certificates,
    6: closed_form_identities,
    7: courant_gladwell_zhu,
    8: continuity_convergence,
    9: polya,
}
PROFILES = {"quick": (1, 5, 6, 9), "full": tuple(CRITERIA)}


def run_criterion(number: int) -> CheckResult:
    fn: Callable = CRITERIA[number]
    t0 = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - t0
    return res


def run_profile(profile: str = "full") -> list:
    return [run_criterion(k) for k in PROFILES[profile]]
