"""SVG pictures of configurations, arrangements, bushes and unit circles.

Coordinates are printed as decimals with 12 significant digits. The pictures
are for looking at; exact values live in the JSON and CSV reports.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .geometry import Line, Point2

PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7")
NOTE = "decimal coordinates at 12 significant digits, render-only precision"


def num(x) -> str:
    return format(float(x), ".12g")


class Canvas:
    def __init__(self, xs: Sequence[Fraction], ys: Sequence[Fraction], size: int = 600, pad=Fraction(1)):
        xs = list(xs) or [Fraction(0)]
        ys = list(ys) or [Fraction(0)]
        self.x0, self.x1 = min(xs) - pad, max(xs) + pad
        self.y0, self.y1 = min(ys) - pad, max(ys) + pad
        span = max(self.x1 - self.x0, self.y1 - self.y0)
        self.scale = Fraction(size) / span
        self.size = size
        self.items: list[str] = []

    def tx(self, p) -> tuple[str, str]:
        return num((p[0] - self.x0) * self.scale), num((self.y1 - p[1]) * self.scale)

    def clip(self, l: Line) -> tuple[Point2, Point2] | None:
        """The segment of l inside the viewport (Liang-Barsky on exact values)."""
        P, d = l.anchor(), l.direction
        lo, hi = None, None
        for k, (a, b) in enumerate(((self.x0, self.x1), (self.y0, self.y1))):
            if d[k] == 0:
                if not a <= P[k] <= b:
                    return None
                continue
            t1, t2 = sorted(((a - P[k]) / d[k], (b - P[k]) / d[k]))
            lo = t1 if lo is None else max(lo, t1)
            hi = t2 if hi is None else min(hi, t2)
        if lo is None or lo >= hi:
            return None
        return (Point2(P[0] + lo * d[0], P[1] + lo * d[1]), Point2(P[0] + hi * d[0], P[1] + hi * d[1]))

    def line(self, l: Line, color="#999", width="1"):
        seg = self.clip(l)
        if seg:
            (x1, y1), (x2, y2) = self.tx(seg[0]), self.tx(seg[1])
            self.items.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{color}" '
                              f'stroke-width="{width}"/>')

    def dot(self, p, color="#000", r="2.5"):
        x, y = self.tx(p)
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{r}" fill="{color}"/>')

    def ring(self, c, radius, color="#999"):
        x, y = self.tx(c)
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{num(radius * self.scale)}" fill="none" '
                          f'stroke="{color}" stroke-width="0.7"/>')

    def polygon(self, pts: Iterable, color: str, opacity="0.35"):
        s = " ".join(",".join(self.tx(p)) for p in pts)
        self.items.append(f'<polygon points="{s}" fill="{color}" fill-opacity="{opacity}" stroke="none"/>')

    def render(self, title: str) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
                f'viewBox="0 0 {self.size} {self.size}">\n<title>{title}</title>\n<desc>{NOTE}</desc>\n')
        return head + "\n".join(self.items) + "\n</svg>\n"


def configuration_svg(config, highlight: Iterable[int] = ()) -> str:
    c = Canvas([p[0] for p in config.points], [p[1] for p in config.points])
    hl = set(highlight)
    for i, l in enumerate(config.lines):
        c.line(l, PALETTE[2] if i in hl else "#bbb", "1.5" if i in hl else "0.6")
    for p in config.points:
        c.dot(p)
    return c.render("configuration")


def arrangement_svg(arr, points: Sequence = ()) -> str:
    vs = list(arr.vertices) + list(points)
    c = Canvas([v[0] for v in vs], [v[1] for v in vs])
    for f, face in enumerate(arr.faces):
        if face.bounded:
            c.polygon(arr.face_polygon(f), PALETTE[f % len(PALETTE)])
    for l in arr.lines:
        c.line(l, "#333", "0.8")
    for p in points:
        c.dot(p, r="1.8")
    return c.render("arrangement")


def bush_svg(config, bush, sector_of_point: dict[int, int]) -> str:
    c = Canvas([p[0] for p in config.points], [p[1] for p in config.points])
    for l in bush.lines:
        c.line(config.lines[l], "#333", "1.2")
    for i, p in enumerate(config.points):
        j = sector_of_point.get(i)
        c.dot(p, "#000" if j is None else PALETTE[j % len(PALETTE)])
    return c.render("bush sectors")


def circles_svg(cfg, parity: dict[int, int] | None = None) -> str:
    c = Canvas([p[0] for p in cfg.points], [p[1] for p in cfg.points], pad=Fraction(3, 2))
    for p in cfg.points:
        c.ring(p, 1)
    for i, p in enumerate(cfg.points):
        k = None if parity is None else parity.get(i)
        c.dot(p, "#000" if k is None else PALETTE[k % 2])
    return c.render("unit circles")
