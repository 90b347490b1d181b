"""Crossing counts for straight-line multigraphs and convex unions of cells."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .arrangement import Arrangement
from .configuration import Configuration, IncidenceSet
from .geometry import Line, Point2, dot, line_interval, meet_point, orient
from .params import SlackParams


class NonConsecutiveCells(ValueError):
    pass


@dataclass
class SegmentGraph:
    """Vertices with coordinates and a multiset of edges (u, v, source line id)."""

    vertices: dict[int, Point2]
    edges: list[tuple[int, int, int]] = field(default_factory=list)

    def __post_init__(self):
        for u, v, _ in self.edges:
            if u == v:
                raise ValueError("edge endpoints must differ")
            if u not in self.vertices or v not in self.vertices:
                raise ValueError("edge endpoint is not a vertex")

    @property
    def v(self) -> int:
        return len(self.vertices)

    @property
    def e(self) -> int:
        return len(self.edges)

    def to_json(self) -> dict:
        return {"vertices": {str(k): p.to_json() for k, p in sorted(self.vertices.items())},
                "edges": [list(e) for e in self.edges]}


def segments_cross(a, b, c, d) -> bool:
    """Whether open segments ab and cd meet in exactly one point."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    if o1 * o2 >= 0:
        return False
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o3 * o4 < 0


def segments_overlap(a, b, c, d) -> bool:
    """Collinear segments sharing more than one point."""
    if orient(a, b, c) != 0 or orient(a, b, d) != 0:
        return False
    u = (b[0] - a[0], b[1] - a[1])
    s = sorted((dot(a, u), dot(b, u)))
    t = sorted((dot(c, u), dot(d, u)))
    return max(s[0], t[0]) < min(s[1], t[1])


def _sweep_pairs(g: SegmentGraph):
    """Edge pairs whose bounding boxes overlap, by a sweep over x."""
    boxes = []
    for k, (u, v, _) in enumerate(g.edges):
        p, r = g.vertices[u], g.vertices[v]
        boxes.append((min(p[0], r[0]), max(p[0], r[0]), min(p[1], r[1]), max(p[1], r[1]), k))
    boxes.sort()
    active: list[tuple] = []
    for box in boxes:
        x0 = box[0]
        active = [a for a in active if a[1] >= x0]
        for a in active:
            if a[2] <= box[3] and box[2] <= a[3]:
                yield (a[4], box[4]) if a[4] < box[4] else (box[4], a[4])
        active.append(box)


def count_crossings(g: SegmentGraph) -> int:
    """Unordered edge pairs whose open segments meet in exactly one point."""
    n = 0
    V, E = g.vertices, g.edges
    for i, j in _sweep_pairs(g):
        (a, b, _), (c, d, _) = E[i], E[j]
        if segments_cross(V[a], V[b], V[c], V[d]):
            n += 1
    return n


def collinear_overlaps(g: SegmentGraph) -> int:
    n = 0
    V, E = g.vertices, g.edges
    for i, j in _sweep_pairs(g):
        (a, b, _), (c, d, _) = E[i], E[j]
        if segments_overlap(V[a], V[b], V[c], V[d]):
            n += 1
    return n


def crossing_lb_margin(g: SegmentGraph, params: SlackParams) -> Fraction | None:
    """crossings / (c_cross * e^3 / v^2), or None when e < 10 v."""
    if g.e < 10 * g.v or g.e == 0:
        return None
    bound = params.c_cross * Fraction(g.e ** 3, g.v ** 2)
    return Fraction(count_crossings(g)) / bound


def convex_position_graph(n: int) -> SegmentGraph:
    """K_n on n points of the parabola y = x^2 (convex position, no three collinear)."""
    verts = {i: Point2(Fraction(i), Fraction(i * i)) for i in range(n)}
    edges = [(i, j, -1) for i in range(n) for j in range(i + 1, n)]
    return SegmentGraph(verts, edges)


def cell_graph(config: Configuration, members: Iterable[int], J: IncidenceSet, M: int) -> SegmentGraph:
    """For each line with at least M+1 J-incidences among the members, M consecutive-pair edges."""
    mem = set(members)
    verts = {p: config.points[p] for p in sorted(mem)}
    edges = []
    for l in sorted(J.by_line):
        pts = [p for p in J.by_line[l] if p in mem]
        if len(pts) < M + 1:
            continue
        d = config.lines[l].direction
        pts.sort(key=lambda p: dot(config.points[p], d))
        for a, b in zip(pts[:M], pts[1:M + 1]):
            edges.append((a, b, l))
    return SegmentGraph(verts, edges)


# --- convex regions -------------------------------------------------------------

@dataclass
class ConvexRegion:
    """Intersection of half-planes side(line, p) == s."""

    halfplanes: list[tuple[Line, int]]

    def constraints(self) -> list[tuple]:
        return [(s * l.a, s * l.b, s * l.c) for l, s in self.halfplanes]

    def contains(self, p, strict: bool = True) -> bool:
        for l, s in self.halfplanes:
            v = s * l.side(p)
            if v < 0 or (strict and v == 0):
                return False
        return True

    def to_json(self) -> list:
        return [{"line": l.to_json(), "side": s} for l, s in self.halfplanes]


def zone_sequence(arr: Arrangement, l: Line) -> tuple[list[int], list[Fraction], list[set[int]]]:
    """Faces met by the open pieces of l in order, the crossing parameters between them, and
    the arrangement lines crossing l at each of those parameters."""
    d = l.direction
    P = l.anchor()
    at: dict[Fraction, set[int]] = {}
    for i, m in enumerate(arr.lines):
        if m == l:
            raise ValueError("line belongs to the arrangement")
        x = meet_point(l, m)
        if x is not None:
            at.setdefault(dot((x[0] - P[0], x[1] - P[1]), d) / dot(d, d), set()).add(i)
    ts = sorted(at)
    if not ts:
        samples = [Fraction(0)]
    else:
        samples = [ts[0] - 1] + [(a + b) / 2 for a, b in zip(ts, ts[1:])] + [ts[-1] + 1]
    faces = [arr.locate(Point2(P[0] + s * d[0], P[1] + s * d[1])).id for s in samples]
    return faces, ts, [at[t] for t in ts]


def consecutive_union(arr: Arrangement, l: Line, faces: Sequence[int]) -> ConvexRegion:
    """Merge faces met consecutively by l into the face of the arrangement without the lines
    separating them."""
    seq, ts, crossing = zone_sequence(arr, l)
    k = len(faces)
    start = None
    for i in range(len(seq) - k + 1):
        if list(seq[i:i + k]) == list(faces):
            start = i
            break
        if list(seq[i:i + k]) == list(reversed(faces)):
            start = i
            break
    if start is None:
        raise NonConsecutiveCells("faces are not met consecutively by the line")
    separators = set()
    for j in range(start, start + k - 1):
        separators |= crossing[j]
    d, P = l.direction, l.anchor()
    if not ts:
        s = Fraction(0)
    elif start == 0:
        s = ts[0] - 1
    elif start == len(ts):
        s = ts[-1] + 1
    else:
        s = (ts[start - 1] + ts[start]) / 2
    q = Point2(P[0] + s * d[0], P[1] + s * d[1])
    hp = [(m, m.side(q)) for i, m in enumerate(arr.lines) if i not in separators]
    return ConvexRegion(hp)


def crossings_in_region(lines: Sequence[Line], region: ConvexRegion) -> int:
    """Pairs of lines whose meet lies strictly inside the region.

    Each line is reduced once to its open parameter interval inside the region;
    a pair then needs only the meet parameter on the first line.
    """
    cons = region.constraints()
    inside = []
    for l in lines:
        iv = line_interval(l, cons)
        if iv is not None:
            inside.append((l, iv))
    n = 0
    for i in range(len(inside)):
        l, (lo, hi) = inside[i]
        P, d = l.anchor(), l.direction
        dd = dot(d, d)
        for j in range(i + 1, len(inside)):
            x = meet_point(l, inside[j][0])
            if x is None:
                continue
            t = dot((x[0] - P[0], x[1] - P[1]), d) / dd
            if (lo is None or t > lo) and (hi is None or t < hi):
                n += 1
    return n


def region_from_face(arr: Arrangement, f: int) -> ConvexRegion:
    return ConvexRegion(arr.face_halfplanes(f))
