"""Deterministic SVG diagrams of surface complexes.

One panel per plane of the window, drawn in chart-image coordinates.  Glued
slits share a color per gluing cycle, open stubs and the truncation frontier
are dashed grey, polygon surgeries are outlined with tick marks pairing
opposite sides, and cone points carry their angle in units of pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from .exact import Vec, add, mat_vec, scale
from .flatgeom import Geometry, audit_cone_angles
from .surface_complex import ComplexError, SurfaceComplex

__all__ = ["Window", "RenderError", "render_svg", "parse_window"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
           "#17becf", "#bcbd22", "#7f7f7f")
PANEL = 320
PAD = 24
COLUMNS = 3
RAY_LEN = Fraction(10 ** 6)


class RenderError(ComplexError):
    pass


@dataclass(frozen=True)
class Window:
    """Planes to draw (all when ``planes`` is None) and an optional x/y box."""

    planes: Optional[Tuple[str, ...]] = None
    x: Optional[Tuple[Fraction, Fraction]] = None
    y: Optional[Tuple[Fraction, Fraction]] = None


def _range(text: str, what: str) -> Tuple[Fraction, Fraction]:
    try:
        a, b = text.split("..")
        lo, hi = Fraction(a), Fraction(b)
    except ValueError:
        raise RenderError(f"bad {what} range {text!r}, expected LO..HI") from None
    if lo >= hi:
        raise RenderError(f"empty {what} range {text!r}")
    return lo, hi


def parse_window(planes: Optional[str] = None, x: Optional[str] = None,
                 y: Optional[str] = None) -> Window:
    pl = tuple(p for p in planes.split(",") if p) if planes else None
    return Window(pl, _range(x, "x") if x else None, _range(y, "y") if y else None)


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _clip(a: Vec, b: Vec, box) -> Optional[Tuple[Vec, Vec]]:
    """Liang-Barsky clip of segment ab to box, exact."""
    (x0, x1), (y0, y1) = box
    t0, t1 = Fraction(0), Fraction(1)
    d = (b[0] - a[0], b[1] - a[1])
    for p, qq in ((-d[0], a[0] - x0), (d[0], x1 - a[0]), (-d[1], a[1] - y0), (d[1], y1 - a[1])):
        if p == 0:
            if qq < 0:
                return None
            continue
        r = Fraction(qq) / p
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
        if t0 > t1:
            return None
    return add(a, scale(t0, d)), add(a, scale(t1, d))


class _Panel:
    def __init__(self, pid: str, box, ox: int, oy: int):
        self.pid, self.box, self.ox, self.oy = pid, box, ox, oy
        (x0, x1), (y0, y1) = box
        self.s = Fraction(PANEL - 2 * PAD) / max(x1 - x0, y1 - y0)
        self.items: List[str] = []

    def pt(self, p: Vec) -> Tuple[str, str]:
        (x0, _), (_, y1) = self.box
        return (_fmt(float(self.ox + PAD + (p[0] - x0) * self.s)),
                _fmt(float(self.oy + PAD + (y1 - p[1]) * self.s)))

    def seg(self, a: Vec, b: Vec, style: str, label: str = "") -> None:
        cl = _clip(a, b, self.box)
        if cl is None:
            return
        (ax, ay), (bx, by) = self.pt(cl[0]), self.pt(cl[1])
        self.items.append(f'<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" {style}/>')
        if label:
            self.items.append(f'<text x="{ax}" y="{ay}" dy="-3" font-size="8">{escape(label)}</text>')

    def dot(self, p: Vec, label: str) -> None:
        (x0, x1), (y0, y1) = self.box
        if not (x0 <= p[0] <= x1 and y0 <= p[1] <= y1):
            return
        x, y = self.pt(p)
        self.items.append(f'<circle cx="{x}" cy="{y}" r="2.5" fill="black"/>')
        self.items.append(f'<text x="{x}" y="{y}" dx="3" dy="10" font-size="8">{escape(label)}</text>')


def _auto_box(c: SurfaceComplex, g: Geometry, pid: str, window: Window):
    xs: List[Fraction] = []
    ys: List[Fraction] = []
    for f in g.features.get(pid, []):
        pts = [f.A] if f.is_ray else [f.A, f.B]
        for p in pts:
            xs.append(p[0])
            ys.append(p[1])
    for fr in c.frontiers:
        if fr.plane == pid:
            p = c.image_point(pid, fr.base)
            xs.append(p[0])
            ys.append(p[1])
    if not xs:
        xs, ys = [Fraction(0)], [Fraction(0)]
    bx = window.x or (min(xs) - 1, max(xs) + 1)
    by = window.y or (min(ys) - 1, max(ys) + 1)
    return bx, by


def render_svg(c: SurfaceComplex, window: Window = Window(), geom: Optional[Geometry] = None) -> str:
    """SVG text for the planes of ``window``; a pure function of its inputs."""
    order = [p.id for p in c.planes]
    if window.planes is not None:
        unknown = [p for p in window.planes if p not in c.plane_index]
        if unknown:
            raise RenderError(f"unknown plane(s) in window: {', '.join(unknown)}")
        chosen = [p for p in order if p in set(window.planes)]
    else:
        chosen = order
    if not chosen:
        raise RenderError("empty window: no planes to draw")
    g = geom or Geometry(c)
    color: Dict[str, str] = {}
    for i, gl in enumerate(c.gluings):
        for sid in gl.slits:
            color[sid] = PALETTE[i % len(PALETTE)]
    cones: Dict[str, List[Tuple[Vec, str]]] = {}
    for cp in audit_cone_angles(c, g):
        lab = "?" if cp.angle_pi is None else f"{cp.angle_pi}π"
        for pid, p in cp.copies:
            cones.setdefault(pid, []).append((p, lab))

    panels = []
    for k, pid in enumerate(chosen):
        ox, oy = (k % COLUMNS) * PANEL, (k // COLUMNS) * PANEL
        pn = _Panel(pid, _auto_box(c, g, pid, window), ox, oy)
        chart = c.plane(pid).chart
        for s in c.slits:
            if s.plane != pid:
                continue
            A = c.image_point(pid, s.base)
            w = mat_vec(chart, s.holonomy)
            B = add(A, scale(RAY_LEN, w)) if s.is_ray else add(A, w)
            if s.id in color:
                style = f'stroke="{color[s.id]}" stroke-width="2.5"'
            elif s.id in c.stub_of:
                style = 'stroke="#999999" stroke-width="2" stroke-dasharray="4,2"'
            else:
                continue
            pn.seg(A, B, style, s.label or s.id)
        for fr in c.frontiers:
            if fr.plane == pid:
                A = c.image_point(pid, fr.base)
                pn.seg(A, add(A, scale(RAY_LEN, mat_vec(chart, fr.direction))),
                       'stroke="#999999" stroke-width="1" stroke-dasharray="2,3"', "frontier")
        for poly in c.polygons():
            if poly.plane != pid:
                continue
            vs = [c.image_point(pid, v) for v in poly.vertices]
            n, m = len(vs), poly.m
            for j in range(n):
                a, b = vs[j], vs[(j + 1) % n]
                pn.seg(a, b, 'stroke="black" stroke-width="1.5"')
                mid = scale(Fraction(1, 2), add(a, b))
                if pn.box[0][0] <= mid[0] <= pn.box[0][1] and pn.box[1][0] <= mid[1] <= pn.box[1][1]:
                    x, y = pn.pt(mid)
                    pn.items.append(f'<text x="{x}" y="{y}" font-size="7" fill="#555555">{j % m}</text>')
        for p, lab in sorted(cones.get(pid, []), key=lambda t: (t[0], t[1])):
            pn.dot(p, lab)
        panels.append(pn)

    rows = (len(panels) + COLUMNS - 1) // COLUMNS
    width, height = min(len(panels), COLUMNS) * PANEL, rows * PANEL
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    for pn in panels:
        out.append(f'<g id="{escape(pn.pid)}">')
        out.append(f'<rect x="{pn.ox + 2}" y="{pn.oy + 2}" width="{PANEL - 4}" height="{PANEL - 4}" '
                   f'fill="white" stroke="#cccccc"/>')
        out.append(f'<text x="{pn.ox + 8}" y="{pn.oy + 16}" font-size="11">{escape(pn.pid)}</text>')
        out.extend(pn.items)
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
