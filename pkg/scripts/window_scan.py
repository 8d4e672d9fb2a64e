"""Three-nodal-domain offset windows of the symmetric eigenfunction per domain.

For T0 the scan is run both on the closed-form eigenfunction and on the FEM
vector; for each Omega_t and the rounded triangle only the FEM vector is used.
"""
from __future__ import annotations

import argparse

from ecplab import fem, nodal
from ecplab.closedform import phi0_normalized
from ecplab.geometry import DomainSpec
from ecplab.mesh import generate, refine


def scan(label, m, phi, n_steps):
    s = nodal.find_three_domain_window(m, phi, n_steps=n_steps)
    if s.window is None:
        print(f"{label:>22}: no window")
        return
    rep = nodal.count_nodal_domains(m, phi, s.midpoint)
    print(f"{label:>22}: window ({s.window[0]:.4f}, {s.window[1]:.4f}) width {s.width:.4f} "
          f"signature {rep.signature} mirror swap {nodal.negative_components_swapped(m, rep)}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=200)
    args = p.parse_args()

    specs = [DomainSpec.triangle()] + [DomainSpec.omega(t) for t in (0.05, 0.1, 0.2, 0.3)]
    specs.append(DomainSpec.rounded(0.1))
    for spec in specs:
        m = refine(generate(spec, args.h))
        if spec.kind == "TriangleT0":
            scan("T0 closed form", m, phi0_normalized(m.vertices[:, 0], m.vertices[:, 1]), args.steps)
        scan(spec.label(), m, fem.nu_plus_on(m).extended(+1), args.steps)


if __name__ == "__main__":
    main()
