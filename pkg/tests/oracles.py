"""Slow reference computations used only by the tests.

Nothing here imports the package's geometry code, so agreement with the
package is evidence rather than tautology.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import comb


def on_line(line, p) -> bool:
    a, b, c = (Fraction(v) for v in line)
    x, y = (Fraction(v) for v in p)
    den = a.denominator * b.denominator * c.denominator * x.denominator * y.denominator
    return (a * x + b * y + c) * den == 0


def brute_incidences(lines, points) -> set[tuple[int, int]]:
    return {(i, j) for i, l in enumerate(lines) for j, p in enumerate(points) if on_line(l, p)}


def grid_counts(k: int) -> tuple[int, int, int]:
    """(lines, points, incidences) of the grid, by enumerating the defining sets."""
    pts = {(x, y) for x in range(k) for y in range(2 * k * k - 1)}
    lines = [(m, b) for m in range(k) for b in range(k * k)]
    inc = sum(1 for m, b in lines for x in range(k) if (x, m * x + b) in pts)
    return len(lines), len(pts), inc


def turn(p, q, r) -> int:
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (v > 0) - (v < 0)


def open_segments_cross(a, b, c, d) -> bool:
    """Solve a + t(b-a) = c + u(d-c) for t, u strictly inside (0, 1)."""
    rx, ry = b[0] - a[0], b[1] - a[1]
    sx, sy = d[0] - c[0], d[1] - c[1]
    den = rx * sy - ry * sx
    if den == 0:
        return False
    qx, qy = c[0] - a[0], c[1] - a[1]
    t = Fraction(qx * sy - qy * sx) / den
    u = Fraction(qx * ry - qy * rx) / den
    return 0 < t < 1 and 0 < u < 1


def brute_crossings(vertices, edges) -> int:
    n = 0
    for (u1, v1, _), (u2, v2, _) in combinations(edges, 2):
        if open_segments_cross(vertices[u1], vertices[v1], vertices[u2], vertices[v2]):
            n += 1
    return n


def brute_crossings_int(vertices, edges) -> int:
    """Proper crossings for integer coordinates: each segment strictly separates the other's ends."""
    pts = {k: (int(p[0]), int(p[1])) for k, p in vertices.items()}
    segs = [(pts[u], pts[v]) for u, v, _ in edges]
    n = 0
    for i in range(len(segs)):
        a, b = segs[i]
        for j in range(i + 1, len(segs)):
            c, d = segs[j]
            if turn(a, b, c) * turn(a, b, d) < 0 and turn(c, d, a) * turn(c, d, b) < 0:
                n += 1
    return n


def line_meet(l1, l2):
    a1, b1, c1 = l1
    a2, b2, c2 = l2
    den = a1 * b2 - a2 * b1
    if den == 0:
        return None
    return (Fraction(b1 * c2 - b2 * c1) / den, Fraction(c1 * a2 - c2 * a1) / den)


def arrangement_counts(lines) -> tuple[int, int, int]:
    """(V, E, F) of an arrangement of distinct lines by vertex multiplicities.

    Adding lines one at a time, a line crossing the previous ones at k
    distinct points adds k + 1 faces; summing gives F = 1 + n + sum(t_v - 1)
    over vertices with t_v lines. E = n + sum(t_v).
    """
    through: dict = {}
    for i, j in combinations(range(len(lines)), 2):
        x = line_meet(lines[i], lines[j])
        if x is not None:
            through.setdefault(x, set()).update((i, j))
    n = len(lines)
    V = len(through)
    E = n + sum(len(s) for s in through.values())
    F = 1 + n + sum(len(s) - 1 for s in through.values())
    return V, E, F


def generic_counts(r: int) -> tuple[int, int, int]:
    return comb(r, 2), r * r, 1 + r + comb(r, 2)


# --- circles ---------------------------------------------------------------------------

def unit_pairs_brute(points) -> int:
    return sum(1 for p, q in combinations(points, 2) if (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 == 1)


def _arc_samples(center, start, end, steps):
    """Exact points along the counterclockwise arc from start to end (shorter than a half circle)."""
    ux, uy = start[0] - center[0], start[1] - center[1]
    vx, vy = end[0] - center[0], end[1] - center[1]
    if ux * vy - uy * vx <= 0:
        raise ValueError("sampling needs an arc shorter than a half circle")
    cv = ux * vx + uy * vy
    sv = ux * vy - uy * vx
    T = Fraction(sv) / (1 + cv)  # tan of half the arc angle
    out = []
    for i in range(steps + 1):
        t = T * i / steps
        den = 1 + t * t
        c, s = (1 - t * t) / den, 2 * t / den
        out.append((center[0] + ux * c - uy * s, center[1] + uy * c + ux * s))
    return out


def sampled_circle_hits(p, center, start, end, steps: int = 10_000) -> int:
    """Sign changes of |x - p|^2 - 1 along the arc plus exact zeros."""
    vals = []
    for x in _arc_samples(center, start, end, steps):
        v = (x[0] - p[0]) ** 2 + (x[1] - p[1]) ** 2 - 1
        vals.append((v > 0) - (v < 0))
    hits = vals.count(0)
    nz = [v for v in vals if v]
    return hits + sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def _in_ccw_arc(center, start, end, x) -> bool:
    """x (a point of the circle, approximately) within the counterclockwise arc start -> end (< pi)."""
    u = (start[0] - center[0], start[1] - center[1])
    v = (end[0] - center[0], end[1] - center[1])
    w = (x[0] - center[0], x[1] - center[1])
    return u[0] * w[1] - u[1] * w[0] >= 0 and w[0] * v[1] - w[1] * v[0] >= 0


def sampled_arc_arc_hits(arc1, arc2, steps: int = 4000) -> int:
    """Common points of two arcs (< pi each): sign changes along arc1 of the circle of arc2,
    kept when the bracketing samples fall inside arc2."""
    c1, s1, e1 = arc1
    c2, s2, e2 = arc2
    xs = _arc_samples(c1, s1, e1, steps)
    vals = [(x[0] - c2[0]) ** 2 + (x[1] - c2[1]) ** 2 - 1 for x in xs]
    hits = 0
    for i, v in enumerate(vals):
        if v == 0 and _in_ccw_arc(c2, s2, e2, xs[i]):
            hits += 1
    for i in range(len(vals) - 1):
        a, b = vals[i], vals[i + 1]
        if a * b < 0 and (_in_ccw_arc(c2, s2, e2, xs[i]) or _in_ccw_arc(c2, s2, e2, xs[i + 1])):
            hits += 1
    return hits
