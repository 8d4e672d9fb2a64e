"""Mesh convergence of nu2(T0) and delta1(T0) against their closed forms.

Prints one row per refinement level with the observed order, followed by the
Richardson extrapolation of the three finest levels.
"""
from __future__ import annotations

import argparse
import math

import numpy as np

from ecplab import fem
from ecplab.closedform import PHI0_EIGENVALUE, XI1_EIGENVALUE
from ecplab.geometry import DomainSpec
from ecplab.mesh import generate, refine


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--h", type=float, default=0.1)
    p.add_argument("--levels", type=int, default=4)
    args = p.parse_args()

    m = generate(DomainSpec.triangle(), args.h)
    nu2, delta1 = [], []
    print(f"{'h':>9} {'vertices':>9} {'nu2':>14} {'err':>10} {'delta1':>14} {'err':>10}")
    for lvl in range(args.levels):
        if lvl:
            m = refine(m)
        nu2.append(fem.solve_mesh(m, 2).eigenvalues[1])
        delta1.append(fem.solve_mesh(m, 1, "dirichlet").eigenvalues[0])
        print(f"{m.h:9.5f} {m.n_vertices:9d} {nu2[-1]:14.8f} {nu2[-1] - PHI0_EIGENVALUE:10.2e} "
              f"{delta1[-1]:14.8f} {delta1[-1] - XI1_EIGENVALUE:10.2e}")
    for name, vals, exact in (("nu2", nu2, PHI0_EIGENVALUE), ("delta1", delta1, XI1_EIGENVALUE)):
        err = np.abs(np.asarray(vals) - exact)
        orders = np.log2(err[:-1] / err[1:])
        r = fem.richardson(vals[-3:])
        print(f"{name}: orders {np.round(orders, 3).tolist()}, extrapolated {r['extrapolated']:.8f} "
              f"(exact {exact:.8f}, rel err {abs(r['extrapolated'] - exact) / exact:.1e})")
    assert math.isfinite(nu2[-1])


if __name__ == "__main__":
    main()
