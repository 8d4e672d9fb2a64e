"""Figure data: boundary curves and level sets as CSV polylines plus SVG line art."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import fem, nodal
from .errors import UnknownFigure
from .geometry import DomainSpec, sample_boundary
from .mesh import generate, refine

FIGURES = ("fig1_rounded", "fig5_levels", "fig3_domains", "fig_nodal_t")
PALETTE = ("#1f4e79", "#b03a2e", "#1e8449", "#7d3c98", "#b9770e", "#2e4053")


@dataclass
class Layer:
    label: str
    lines: list  # of nodal.Polyline
    color: str = "#000000"
    width: float = 1.0


@dataclass
class Figure:
    name: str
    layers: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def bounds(self):
        pts = np.vstack([ln.points for layer in self.layers for ln in layer.lines])
        return pts.min(axis=0), pts.max(axis=0)

    def to_csv(self, manifest_hash: Optional[str] = None) -> str:
        out = []
        if manifest_hash:
            out.append(f"# manifest_hash={manifest_hash}")
        out.append("layer,curve,closed,x,y")
        for layer in self.layers:
            for k, ln in enumerate(layer.lines):
                for x, y in ln.points:
                    out.append(f"{layer.label},{k},{int(ln.closed)},{x:.12g},{y:.12g}")
        return "\n".join(out) + "\n"

    def to_svg(self, size: int = 480, manifest_hash: Optional[str] = None) -> str:
        lo, hi = self.bounds()
        pad = 0.05 * float(np.max(hi - lo))
        lo, hi = lo - pad, hi + pad
        scale = size / float(np.max(hi - lo))
        w, h = (hi - lo) * scale

        def path(p):
            x = (p[:, 0] - lo[0]) * scale
            y = (hi[1] - p[:, 1]) * scale
            return "M " + " L ".join(f"{a:.3f} {b:.3f}" for a, b in zip(x, y))

        out = ['<?xml version="1.0" encoding="UTF-8"?>']
        if manifest_hash:
            out.append(f"<!-- manifest_hash={manifest_hash} -->")
        out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
                   f'viewBox="0 0 {w:.3f} {h:.3f}">')
        for layer in self.layers:
            out.append(f'<g id="{layer.label}" fill="none" stroke="{layer.color}" '
                       f'stroke-width="{layer.width}">')
            for ln in layer.lines:
                out.append(f'<path d="{path(ln.points)}{" Z" if ln.closed else ""}"/>')
            out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def write(self, out_dir, manifest_hash: Optional[str] = None) -> list:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{self.name}.csv"
        svg_path = out_dir / f"{self.name}.svg"
        csv_path.write_text(self.to_csv(manifest_hash))
        svg_path.write_text(self.to_svg(manifest_hash=manifest_hash))
        return [csv_path, svg_path]


def boundary_layer(spec: DomainSpec, color: str = "#000000", n: int = 512, width: float = 1.5) -> Layer:
    pts = sample_boundary(spec, n).points()
    return Layer(spec.label(), [nodal.Polyline(np.vstack([pts, pts[:1]]), True)], color, width)


def _symmetric_phi(spec: DomainSpec, h: float):
    m = refine(generate(spec, h))
    return m, fem.nu_plus_on(m).extended(+1)


def fig3_domains(h: float = 0.05) -> Figure:
    specs = [DomainSpec.triangle()] + [DomainSpec.omega(t) for t in (0.1, 0.2, 0.3)]
    return Figure("fig3_domains", [boundary_layer(s, PALETTE[i]) for i, s in enumerate(specs)])


def fig5_levels(h: float = 0.05, n_levels: int = 10) -> Figure:
    spec = DomainSpec.triangle()
    m, phi = _symmetric_phi(spec, h)
    levels = np.linspace(phi.min(), phi.max(), n_levels + 2)[1:-1]
    fig = Figure("fig5_levels", [boundary_layer(spec)], {"levels": levels.tolist()})
    for i, c in enumerate(levels):
        fig.layers.append(Layer(f"level_{i}", nodal.extract_level_set(m, phi, float(c)),
                                PALETTE[i % len(PALETTE)]))
    return fig


def fig1_rounded(h: float = 0.05, corner: float = 0.1) -> Figure:
    spec = DomainSpec.rounded(corner)
    m, phi = _symmetric_phi(spec, h)
    scan = nodal.find_three_domain_window(m, phi)
    offsets = [0.5 * scan.window[0], scan.midpoint] if scan.window else [0.0, 0.5 * float(phi.max())]
    fig = Figure("fig1_rounded", [boundary_layer(spec)],
                 {"offsets": offsets, "window": scan.window})
    for i, a in enumerate(offsets):
        beta = nodal.count_nodal_domains(m, phi, a).beta0
        fig.layers.append(Layer(f"a={a:.4f}_beta0={beta}", nodal.extract_level_set(m, phi, -a),
                                PALETTE[i + 1]))
    return fig


def fig_nodal_t(h: float = 0.05, ts=(0.05, 0.1, 0.2)) -> Figure:
    fig = Figure("fig_nodal_t", meta={"t": list(ts), "offsets": []})
    for i, t in enumerate(ts):
        spec = DomainSpec.omega(t)
        m, phi = _symmetric_phi(spec, h)
        scan = nodal.find_three_domain_window(m, phi)
        fig.layers.append(boundary_layer(spec, PALETTE[i], width=1.0))
        if scan.window is None:
            fig.meta["offsets"].append(None)
            continue
        a = scan.midpoint
        fig.meta["offsets"].append(a)
        fig.layers.append(Layer(f"t={t:g}_a={a:.4f}", nodal.extract_level_set(m, phi, -a),
                                PALETTE[i], 2.0))
    return fig


BUILDERS = {"fig1_rounded": fig1_rounded, "fig5_levels": fig5_levels,
            "fig3_domains": fig3_domains, "fig_nodal_t": fig_nodal_t}


def build(name: str, h: float = 0.05) -> Figure:
    if name not in BUILDERS:
        raise UnknownFigure(f"unknown figure {name!r}; choose from {list(BUILDERS)}")
    return BUILDERS[name](h=h)
