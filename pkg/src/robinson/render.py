"""SVG and ASCII pictures of patches."""
from __future__ import annotations

import xml.etree.ElementTree as ET

from .alphabet import DIR_VEC, CornerTile, Decoration, Marker, Tile, quad_vec
from .patchwork import Patch

GREY = "#d0d0d0"
INK = "#000000"


def _pt(x: float, y: float) -> str:
    return f"{x:.2f},{y:.2f}"


class _Canvas:
    def __init__(self, w: int, h: int, cell: int):
        self.cell = cell
        self.h = h
        self.root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                               width=str(w * cell), height=str(h * cell),
                               viewBox=f"0 0 {w * cell} {h * cell}")

    def xy(self, i: int, j: int, u: float, v: float) -> tuple[float, float]:
        """Cell (i, j), local coordinates u, v in [0, 1] measured from its lower-left corner."""
        return (i + u) * self.cell, (self.h - 1 - j + 1 - v) * self.cell

    def add(self, tag: str, **attrs) -> ET.Element:
        return ET.SubElement(self.root, tag, {k.replace("_", "-"): str(v) for k, v in attrs.items()})

    def poly(self, pts, **attrs):
        return self.add("polygon", points=" ".join(_pt(*p) for p in pts), **attrs)

    def line(self, a, b, **attrs):
        return self.add("line", x1=f"{a[0]:.2f}", y1=f"{a[1]:.2f}", x2=f"{b[0]:.2f}", y2=f"{b[1]:.2f}",
                        stroke=INK, **attrs)

    def text(self) -> str:
        ET.indent(self.root)
        return ET.tostring(self.root, encoding="unicode") + "\n"


def _arrowhead(cv: _Canvas, i, j, tip, direction, size=0.12, fill=INK):
    dx, dy = DIR_VEC[direction]
    px, py = -dy, dx
    base = (tip[0] - dx * size, tip[1] - dy * size)
    pts = [cv.xy(i, j, *tip),
           cv.xy(i, j, base[0] + px * size * 0.6, base[1] + py * size * 0.6),
           cv.xy(i, j, base[0] - px * size * 0.6, base[1] - py * size * 0.6)]
    cv.poly(pts, fill=fill, stroke=INK, stroke_width=1)


def _draw_robinson(cv: _Canvas, i, j, t: Tile):
    for side in ("N", "E", "S", "W"):
        ln = t.line(side)
        if ln is None:
            continue
        dx, dy = DIR_VEC[side]
        mid = (0.5 + dx * 0.5, 0.5 + dy * 0.5)
        width = 2.5 if ln.kind == "double" else 1.2
        cv.line(cv.xy(i, j, 0.5, 0.5), cv.xy(i, j, *mid), stroke_width=width)
        if ln.companion:
            cx, cy = DIR_VEC[ln.companion]
            off = 0.18
            a = (0.5 + cx * off, 0.5 + cy * off)
            cv.line(cv.xy(i, j, *a), cv.xy(i, j, mid[0] + cx * off, mid[1] + cy * off), stroke_width=1)
        if ln.direction == side:
            _arrowhead(cv, i, j, (0.5 + dx * 0.45, 0.5 + dy * 0.45), side)


def _draw_marker(cv: _Canvas, i, j, m: Marker, box=(0.0, 0.0, 1.0)):
    if not m.is_cross:
        return
    x0, y0, s = box
    qx, qy = quad_vec(m.quadrant)
    cx, cy = x0 + s / 2, y0 + s / 2
    corner = (cx + qx * s * 0.35, cy + qy * s * 0.35)
    pts = [cv.xy(i, j, *corner), cv.xy(i, j, cx - qx * s * 0.15, corner[1]),
           cv.xy(i, j, corner[0], cy - qy * s * 0.15)]
    cv.poly(pts, fill=INK if m.letter == "F" else "none", stroke=INK, stroke_width=1)


_QBOX = {"sw": (0.0, 0.0), "se": (0.5, 0.0), "nw": (0.0, 0.5), "ne": (0.5, 0.5)}


def _draw_corner(cv: _Canvas, i, j, c: CornerTile):
    cv.line(cv.xy(i, j, 0.5, 0), cv.xy(i, j, 0.5, 1), stroke_width=0.5, stroke_dasharray="2,2")
    cv.line(cv.xy(i, j, 0, 0.5), cv.xy(i, j, 1, 0.5), stroke_width=0.5, stroke_dasharray="2,2")
    for q, (u, v) in _QBOX.items():
        _draw_marker(cv, i, j, c.quarter(q), (u, v, 0.5))


def _draw_decoration(cv: _Canvas, i, j, d: Decoration):
    _draw_corner(cv, i, j, d.base)
    e = d.base.e_quarter
    for a in (d.h_arrow, d.v_arrow):
        if a is None:
            continue
        ex, ey = quad_vec(e)
        dx, dy = DIR_VEC[a.direction]
        if a.axis == "h":
            v = 0.25 if ey > 0 else 0.75
            p0, p1 = (0.5 - dx * 0.3, v), (0.5 + dx * 0.3, v)
        else:
            u = 0.25 if ex > 0 else 0.75
            p0, p1 = (u, 0.5 - dy * 0.3), (u, 0.5 + dy * 0.3)
        dash = {"stroke_dasharray": "1,2"} if a.kind == "black-dotted" else {}
        cv.line(cv.xy(i, j, *p0), cv.xy(i, j, *p1), stroke_width=1.5, **dash)
        _arrowhead(cv, i, j, p1, a.direction, fill="white" if a.kind == "white" else INK)


def render_svg(p: Patch, cell: int = 40, grey: bool = True) -> str:
    """SVG picture of a patch; crosses obeying the alternating rule get a grey background."""
    if p.width == 0 or p.height == 0:
        raise ValueError("cannot render an empty patch")
    cv = _Canvas(p.width, p.height, cell)
    marks = {}
    if grey and p.alphabet.name == "A" and p.complete and (p.width > 1 or p.height > 1):
        from .derivation import mark_alternating

        marks = mark_alternating(p)
    for i, j, t in p.cells():
        x, y = cv.xy(i, j, 0, 1)
        fill = GREY if marks.get((i, j)) else "white"
        cv.add("rect", x=f"{x:.2f}", y=f"{y:.2f}", width=cell, height=cell, fill=fill,
               stroke="#808080", stroke_width=0.5)
        if t is None:
            continue
        if isinstance(t, Tile):
            _draw_robinson(cv, i, j, t)
        elif isinstance(t, Decoration):
            _draw_decoration(cv, i, j, t)
        elif isinstance(t, CornerTile):
            _draw_corner(cv, i, j, t)
        elif isinstance(t, Marker):
            _draw_marker(cv, i, j, t)
    return cv.text()


def render_ascii(p: Patch) -> str:
    return p.ascii()
