"""Unit-distance incidences and exact predicates on unit-circle arcs.

Circle intersections are irrational in general, so they are never turned into
coordinates. A point on a circle is kept as base + sqrt(s) * direction with
rational parts, and every decision reduces to the sign of an expression
a + b*sqrt(s) + c*sqrt(t) + d*sqrt(s*t).
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import floor
from typing import Iterable, Sequence

from .configuration import DuplicateInput, IncidenceSet
from .geometry import Point2, fmt, q, sign, sort_by_angle
from .params import SlackParams, power_approx
from .refinement import find_structuring_points

class IdenticalCenters(ValueError):
    pass


class DegenerateArc(ValueError):
    pass


class TooFewBushCircles(ValueError):
    pass


@dataclass(frozen=True)
class CircleConfig:
    points: tuple[Point2, ...]
    N: int | None = None

    def __post_init__(self):
        pts = tuple(Point2(q(p[0]), q(p[1])) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(set(pts)) != len(pts):
            raise DuplicateInput("duplicate centers")
        if self.N is None:
            object.__setattr__(self, "N", len(pts))

    def to_json(self) -> dict:
        return {"N": self.N, "points": [p.to_json() for p in self.points]}

    @classmethod
    def from_json(cls, d: dict) -> "CircleConfig":
        return cls(tuple(Point2(q(x), q(y)) for x, y in d["points"]), int(d["N"]))


def grid_points(n: int) -> CircleConfig:
    return CircleConfig(tuple(Point2(Fraction(x), Fraction(y)) for x in range(n) for y in range(n)))


def d2(p, r) -> Fraction:
    return (p[0] - r[0]) ** 2 + (p[1] - r[1]) ** 2


def unit_pairs(points: Sequence[Point2]) -> list[tuple[int, int]]:
    """Index pairs (i < j) at distance exactly 1, using unit buckets."""
    buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
    for i, p in enumerate(points):
        buckets[(floor(p[0]), floor(p[1]))].append(i)
    out = []
    for (bx, by), ids in buckets.items():
        near = [j for dx in (-1, 0, 1) for dy in (-1, 0, 1) for j in buckets.get((bx + dx, by + dy), ())]
        for i in ids:
            for j in near:
                if i < j and d2(points[i], points[j]) == 1:
                    out.append((i, j))
    return sorted(out)


def unit_distance_count(points: Iterable) -> int:
    return len(unit_pairs([Point2(q(p[0]), q(p[1])) for p in points]))


def circle_incidences(cfg: CircleConfig) -> IncidenceSet:
    """(circle id, point id) with the point on the unit circle centred at cfg.points[circle id]."""
    pairs = []
    for i, j in unit_pairs(cfg.points):
        pairs.append((i, j))
        pairs.append((j, i))
    return IncidenceSet(pairs, len(cfg.points), len(cfg.points))


class PairKind(Enum):
    Disjoint = "Disjoint"
    Tangent = "Tangent"
    TwoPoints = "TwoPoints"


def circle_pair_kind(c1, c2) -> PairKind:
    D = d2(c1, c2)
    if D == 0:
        raise IdenticalCenters("circles coincide")
    if D < 4:
        return PairKind.TwoPoints
    return PairKind.Tangent if D == 4 else PairKind.Disjoint


class Disk(Enum):
    Inside = -1
    On = 0
    Outside = 1


def disk_membership(p, center) -> Disk:
    return Disk(sign(d2(p, center) - 1))


class SectorSide(Enum):
    In = "In"
    Out = "Out"
    Boundary = "Boundary"


def sector_membership_geometric(p, qi, qj) -> SectorSide:
    """In iff p is strictly inside exactly one of the two unit disks; Boundary if on either circle."""
    a, b = disk_membership(p, qi), disk_membership(p, qj)
    if a is Disk.On or b is Disk.On:
        return SectorSide.Boundary
    return SectorSide.In if a != b else SectorSide.Out


# --- exact signs with square roots -------------------------------------------------

def sign_sqrt1(a, b, s) -> int:
    """sign(a + b*sqrt(s)), s >= 0."""
    sa, sb = sign(a), sign(b) if s else 0
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    return sa * sign(a * a - b * b * s)


def sign_sqrt2(a, b, c, d, s, t) -> int:
    """sign(a + b*sqrt(s) + c*sqrt(t) + d*sqrt(s*t)), s, t >= 0."""
    sx = sign_sqrt1(a, b, s)
    sy = sign_sqrt1(c, d, s) if t else 0
    if sy == 0:
        return sx
    if sx == 0 or sx == sy:
        return sy
    # |X| vs sqrt(t)|Y| with X = a + b sqrt(s), Y = c + d sqrt(s)
    diff = sign_sqrt1(a * a + b * b * s - t * (c * c + d * d * s), 2 * (a * b - t * c * d), s)
    return sx * diff


@dataclass(frozen=True)
class CirclePoint:
    """center + base + sqrt(s) * dirn, a point on the unit circle at center.

    Rational points have s = 0. ``tag`` records the origin of a symbolic
    point: (centre id or point, other centre, branch).
    """

    center: Point2
    base: tuple[Fraction, Fraction]
    s: Fraction = Fraction(0)
    dirn: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    tag: tuple = ()

    @classmethod
    def rational(cls, center, p) -> "CirclePoint":
        c, p = Point2(q(center[0]), q(center[1])), Point2(q(p[0]), q(p[1]))
        if d2(c, p) != 1:
            raise ValueError("point is not on the unit circle")
        return cls(c, (p[0] - c[0], p[1] - c[1]))

    @property
    def is_rational(self) -> bool:
        return self.s == 0

    def point(self) -> Point2:
        if not self.is_rational:
            raise ValueError("irrational point")
        return Point2(self.center[0] + self.base[0], self.center[1] + self.base[1])

    def vector(self, o) -> tuple:
        """Components of self - o as ((x0, x1), (y0, y1), s) meaning x0 + x1*sqrt(s)."""
        return ((self.center[0] + self.base[0] - o[0], self.dirn[0]),
                (self.center[1] + self.base[1] - o[1], self.dirn[1]), self.s)

    def to_json(self):
        if self.is_rational:
            return self.point().to_json()
        return {"center": self.center.to_json(), "base": [fmt(x) for x in self.base],
                "sqrt": fmt(self.s), "dir": [fmt(x) for x in self.dirn]}


def circle_intersections(c1, c2) -> list[CirclePoint]:
    """Common points of the unit circles at c1 and c2, as points of circle c1.

    Branch 0 (listed first) lies left of the directed segment c1 -> c2.
    """
    c1, c2 = Point2(q(c1[0]), q(c1[1])), Point2(q(c2[0]), q(c2[1]))
    kind = circle_pair_kind(c1, c2)
    if kind is PairKind.Disjoint:
        return []
    d = (c2[0] - c1[0], c2[1] - c1[1])
    half = (d[0] / 2, d[1] / 2)
    if kind is PairKind.Tangent:
        return [CirclePoint(c1, half, tag=(c2, 0))]
    D = d[0] ** 2 + d[1] ** 2
    s = (4 - D) / (4 * D)
    perp = (-d[1], d[0])
    return [CirclePoint(c1, half, s, perp, (c2, 0)),
            CirclePoint(c1, half, s, (-perp[0], -perp[1]), (c2, 1))]


def _cross_sign(u: CirclePoint | tuple, w: CirclePoint | tuple, o) -> int:
    """sign of cross(u - o, w - o) for points given symbolically or as plain vectors."""
    ux, uy, su = u.vector(o) if isinstance(u, CirclePoint) else ((u[0] - o[0], 0), (u[1] - o[1], 0), Fraction(0))
    wx, wy, sw = w.vector(o) if isinstance(w, CirclePoint) else ((w[0] - o[0], 0), (w[1] - o[1], 0), Fraction(0))
    # (ux0 + ux1 a)(wy0 + wy1 b) - (uy0 + uy1 a)(wx0 + wx1 b), a = sqrt(su), b = sqrt(sw)
    c0 = ux[0] * wy[0] - uy[0] * wx[0]
    ca = ux[1] * wy[0] - uy[1] * wx[0]
    cb = ux[0] * wy[1] - uy[0] * wx[1]
    cab = ux[1] * wy[1] - uy[1] * wx[1]
    if su == sw:
        return sign_sqrt1(c0 + cab * su, ca + cb, su)
    return sign_sqrt2(c0, ca, cb, cab, su, sw)


def _coord_sign(u: CirclePoint, w: CirclePoint, k: int) -> int:
    ux, uy, su = u.vector((0, 0))
    wx, wy, sw = w.vector((0, 0))
    a, b = (ux, uy)[k], (wx, wy)[k]
    if su == sw:
        return sign_sqrt1(a[0] - b[0], a[1] - b[1], su)
    return sign_sqrt2(a[0] - b[0], a[1], -b[1], 0, su, sw)


def same_point(u: CirclePoint, w: CirclePoint) -> bool:
    return _coord_sign(u, w, 0) == 0 and _coord_sign(u, w, 1) == 0


@dataclass(frozen=True)
class Arc:
    """Closed counterclockwise arc of the unit circle at center, from start to end."""

    center: Point2
    start: CirclePoint
    end: CirclePoint
    circle: int | None = None

    def __post_init__(self):
        c = Point2(q(self.center[0]), q(self.center[1]))
        object.__setattr__(self, "center", c)
        for e in (self.start, self.end):
            if e.center != c:
                raise ValueError("arc endpoint is not on the arc's circle")
        if same_point(self.start, self.end):
            raise DegenerateArc("arc endpoints coincide")

    @classmethod
    def between(cls, center, a, b, circle: int | None = None) -> "Arc":
        return cls(Point2(q(center[0]), q(center[1])), CirclePoint.rational(center, a),
                   CirclePoint.rational(center, b), circle)

    def contains(self, w: CirclePoint | tuple) -> bool:
        """Membership of a point of the circle (or of a direction given as a plain vector)."""
        o = self.center
        if not isinstance(w, CirclePoint):
            w = (o[0] + w[0], o[1] + w[1])
        uv = _cross_sign(self.start, self.end, o)
        uw = _cross_sign(self.start, w, o)
        wv = -_cross_sign(self.end, w, o)
        if uv > 0:
            return uw >= 0 and wv >= 0
        if uv < 0:
            vw = -wv
            wu = -uw
            return not (vw > 0 and wu > 0)
        return uw >= 0

    def to_json(self) -> dict:
        return {"circle": self.circle, "center": self.center.to_json(),
                "start": self.start.to_json(), "end": self.end.to_json()}


# --- crossings between a unit circle and an arc -------------------------------------

def _count_symbolic(p, arc: Arc) -> int:
    """Common points of the circle at p and the arc, from the symbolic intersection points."""
    if d2(p, arc.center) == 0:
        raise IdenticalCenters("circle coincides with the arc's circle")
    return sum(1 for x in circle_intersections(arc.center, p) if arc.contains(x))


def _count_by_endpoints(p, arc: Arc) -> int:
    """The same count from endpoint disk membership, the duality identity read backwards."""
    o = arc.center
    D = d2(p, o)
    if D == 0:
        raise IdenticalCenters("circle coincides with the arc's circle")
    s, e = arc.start.point(), arc.end.point()
    ms, me = disk_membership(s, p), disk_membership(e, p)
    on = [x for x, m in ((s, ms), (e, me)) if m is Disk.On]
    if len(on) == 2:
        return 2
    if len(on) == 1:
        x = on[0]
        # the other common point is the mirror image of x in the line through o and p
        d = (p[0] - o[0], p[1] - o[1])
        v = (x[0] - o[0], x[1] - o[1])
        t = (v[0] * d[0] + v[1] * d[1]) / D
        y = Point2(o[0] + 2 * t * d[0] - v[0], o[1] + 2 * t * d[1] - v[1])
        if y == x:
            return 1
        return 1 + int(arc.contains(CirclePoint.rational(o, y)))
    inside = (ms is Disk.Inside) + (me is Disk.Inside)
    if inside == 1:
        return 1
    d = (p[0] - o[0], p[1] - o[1])
    if inside == 0:
        # nearest approach of the circle at o to p is in direction d, at distance |sqrt(D) - 1|
        if not arc.contains(d):
            return 0
        return 2 if D < 4 else (1 if D == 4 else 0)
    # both inside: the arc leaves the disk iff it reaches the far point in direction -d
    return 2 if arc.contains((-d[0], -d[1])) else 0


def arc_crossing_count(p, arc: Arc) -> int:
    """Number of common points of the unit circle at p with the arc (0, 1 or 2)."""
    p = Point2(q(p[0]), q(p[1]))
    n = _count_symbolic(p, arc)
    if arc.start.is_rational and arc.end.is_rational:
        m = _count_by_endpoints(p, arc)
        assert n == m, f"arc crossing routes disagree: {n} vs {m}"
    return n


class CrossKind(Enum):
    None_ = "None"
    Simple = "Simple"
    Double = "Double"


def common_points(arc1: Arc, arc2: Arc) -> list[CirclePoint]:
    if arc1.center == arc2.center:
        raise IdenticalCenters("arcs lie on the same circle")
    return [x for x in circle_intersections(arc1.center, arc2.center)
            if arc1.contains(x) and arc2.contains(_rebase(x, arc2.center))]


def _rebase(x: CirclePoint, center: Point2) -> CirclePoint:
    """The same point expressed on the circle at center."""
    shift = (x.center[0] - center[0], x.center[1] - center[1])
    return CirclePoint(center, (x.base[0] + shift[0], x.base[1] + shift[1]), x.s, x.dirn, x.tag)


def simple_double_classify(arc1: Arc, arc2: Arc) -> CrossKind:
    n = len(common_points(arc1, arc2))
    return (CrossKind.None_, CrossKind.Simple, CrossKind.Double)[n]


# --- graphs, structured sets and bushes ------------------------------------------------

def circle_order(cfg: CircleConfig, c: int, members: Iterable[int]) -> list[int]:
    """Members on circle c in counterclockwise angular order around its centre."""
    o = cfg.points[c]
    return sort_by_angle(list(members), key=lambda p: (cfg.points[p][0] - o[0], cfg.points[p][1] - o[1]))


def circle_arcs(cfg: CircleConfig, subset: Iterable[int] | None = None,
                inc: IncidenceSet | None = None) -> list[tuple[Arc, int, int]]:
    """Arcs between angularly consecutive incident points, one graph edge each.

    A circle with m >= 3 incident points gives m arcs around the whole circle;
    with m = 2 it gives the single counterclockwise arc from the first point in
    angular order to the second.
    """
    inc = inc or circle_incidences(cfg)
    sub = set(range(len(cfg.points))) if subset is None else set(subset)
    arcs = []
    for c in sorted(inc.by_line):
        pts = circle_order(cfg, c, [p for p in inc.by_line[c] if p in sub])
        if len(pts) < 2:
            continue
        pairs = list(zip(pts, pts[1:])) + ([(pts[-1], pts[0])] if len(pts) >= 3 else [])
        for u, v in pairs:
            arcs.append((Arc.between(cfg.points[c], cfg.points[u], cfg.points[v], c), u, v))
    return arcs


@dataclass
class CircleCrossingReport:
    vertices: int
    edges: int
    crossings: int
    simple: int
    double: int
    margin: Fraction | None

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "edges": self.edges, "crossings": self.crossings,
                "simple_pairs": self.simple, "double_pairs": self.double,
                "margin": None if self.margin is None else fmt(self.margin)}


def circle_crossing_graph(cfg: CircleConfig, subset: Iterable[int] | None, params: SlackParams,
                          inc: IncidenceSet | None = None) -> CircleCrossingReport:
    """Crossings among incidence arcs; a shared graph vertex is not a crossing."""
    sub = sorted(set(range(len(cfg.points))) if subset is None else set(subset))
    arcs = circle_arcs(cfg, sub, inc)
    total = simple = double = 0
    for i in range(len(arcs)):
        a1, u1, v1 = arcs[i]
        for j in range(i + 1, len(arcs)):
            a2, u2, v2 = arcs[j]
            if a1.center == a2.center or d2(a1.center, a2.center) > 4:
                continue
            shared = [CirclePoint.rational(a1.center, cfg.points[x]) for x in {u1, v1} & {u2, v2}]
            pts = [x for x in common_points(a1, a2) if not any(same_point(x, y) for y in shared)]
            total += len(pts)
            simple += len(pts) == 1
            double += len(pts) == 2
    v, e = len(sub), len(arcs)
    margin = None
    if e >= 10 * v and e:
        margin = Fraction(total) / (params.c_cross * Fraction(e ** 3, v ** 2))
    return CircleCrossingReport(v, e, total, simple, double, margin)


def circle_structured_sets(cfg: CircleConfig, circles: Sequence[int], candidates: Sequence[int], cap: int,
                           inc: IncidenceSet | None = None) -> list[int]:
    """Greedy structuring points for the circles; raises CapExceeded."""
    inc = inc or circle_incidences(cfg)
    return find_structuring_points(list(circles), list(candidates), cap,
                                   point_lines={p: inc.lines_through(p) for p in candidates})


def flower(k: int) -> tuple[CircleConfig, list[Arc]]:
    """k unit circles through the origin with rational centres.

    On circle i the arc starts at the origin and turns counterclockwise by the
    angle with cosine -3/5, which keeps every arc shorter than a half circle.
    """
    centres = []
    for t in range(1, k + 1):
        u = Fraction(t, k + 1)
        centres.append(Point2((1 - u * u) / (1 + u * u), 2 * u / (1 + u * u)))
    origin = Point2(Fraction(0), Fraction(0))
    cs, sn = Fraction(-3, 5), Fraction(4, 5)
    arcs = []
    for i, c in enumerate(centres):
        v = (-c[0], -c[1])
        end = Point2(c[0] + cs * v[0] - sn * v[1], c[1] + sn * v[0] + cs * v[1])
        arcs.append(Arc.between(c, origin, end, i))
    return CircleConfig(tuple(centres)), arcs


def _slope_of(dx, dy) -> tuple[int, Fraction]:
    if dx == 0:
        return (1, Fraction(0))
    return (0, Fraction(dy) / dx)


@dataclass
class CircleBush:
    center: int
    circles: tuple[int, ...]

    @property
    def M(self) -> int:
        return len(self.circles)


def circle_bush(cfg: CircleConfig, p: int, inc: IncidenceSet | None = None) -> CircleBush:
    inc = inc or circle_incidences(cfg)
    cs = sorted(inc.lines_through(p), key=lambda c: (_slope_of(*_tangent_dir(cfg.points[p], cfg.points[c])), c))
    if len(cs) < 2:
        raise TooFewBushCircles(f"point {p} lies on {len(cs)} circles")
    return CircleBush(p, tuple(cs))


def _tangent_dir(p, center):
    return (-(center[1] - p[1]), center[0] - p[0])


def circle_sectors_of(cfg: CircleConfig, bush: CircleBush, x) -> tuple[list[int], bool]:
    """Sectors (i between bush circles i and i+1, cyclically) containing x, and whether x is boundary."""
    cs = bush.circles
    inside = []
    for c in cs:
        m = disk_membership(x, cfg.points[c])
        if m is Disk.On:
            return [], True
        inside.append(m is Disk.Inside)
    M = len(cs)
    hits = [i for i in range(M) if inside[i] != inside[(i + 1) % M]]
    return hits, False


def entering_sector(cfg: CircleConfig, bush: CircleBush, x) -> int | None:
    """First sector i with x outside disk i and inside disk i+1, or None."""
    cs = bush.circles
    M = len(cs)
    inside = [disk_membership(x, cfg.points[c]) is Disk.Inside for c in cs]
    for i in range(M):
        if not inside[i] and inside[(i + 1) % M]:
            return i
    return None


@dataclass
class CircleDoubleBush:
    bushes: tuple[CircleBush, CircleBush]
    cells: dict[tuple[int, int], list[int]]
    boundary: list[int]
    unassigned: list[int]
    raw_memberships: tuple[int, int]
    multi_covered: tuple[int, int]
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"bushes": [{"center": b.center, "circles": list(b.circles)} for b in self.bushes],
                "cells": {f"{j},{k}": v for (j, k), v in sorted(self.cells.items())},
                "boundary": self.boundary, "unassigned": self.unassigned,
                "raw_memberships": list(self.raw_memberships), "multi_covered": list(self.multi_covered),
                "meta": self.meta}


def circle_double_bush_partition(cfg: CircleConfig, p1: int, p2: int, params: SlackParams,
                                 inc: IncidenceSet | None = None) -> CircleDoubleBush:
    """Assign each point to (sector at p1, sector at p2).

    A point can lie in several symmetric-difference sectors of one bush; it is
    assigned to its first entering sector and the raw membership totals are
    reported next to the deduplicated assignment.
    """
    inc = inc or circle_incidences(cfg)
    b1, b2 = circle_bush(cfg, p1, inc), circle_bush(cfg, p2, inc)
    cells: dict[tuple[int, int], list[int]] = defaultdict(list)
    boundary, unassigned = [], []
    raw = [0, 0]
    multi = [0, 0]
    for i, x in enumerate(cfg.points):
        ks = []
        bd = False
        for t, b in enumerate((b1, b2)):
            hits, on = circle_sectors_of(cfg, b, x)
            if on:
                bd = True
                break
            raw[t] += len(hits)
            multi[t] += len(hits) > 1
            ks.append(entering_sector(cfg, b, x))
        if bd:
            boundary.append(i)
        elif ks[0] is None or ks[1] is None:
            unassigned.append(i)
        else:
            cells[(ks[0], ks[1])].append(i)
    sizes = sorted((len(v) for v in cells.values()), reverse=True)
    N = cfg.N
    cap = power_approx(N, params.exp(Fraction(1, 3), 1))
    hist = Counter(s.bit_length() for s in sizes)
    meta = {"M1": b1.M, "M2": b2.M, "cells_used": len(cells), "max_cell_points": sizes[0] if sizes else 0,
            "cell_margin": fmt(Fraction(sizes[0] if sizes else 0) / cap),
            "cell_size_log2_histogram": {str(k): v for k, v in sorted(hist.items())}}
    return CircleDoubleBush((b1, b2), dict(cells), boundary, unassigned, tuple(raw), tuple(multi), meta)


def rank_circle_points(cfg: CircleConfig, inc: IncidenceSet | None = None, top: int = 10) -> list[int]:
    """Points on the most circles, ties by id."""
    inc = inc or circle_incidences(cfg)
    return sorted(range(len(cfg.points)), key=lambda p: (-len(inc.lines_through(p)), p))[:top]


# --- sampled instances ------------------------------------------------------------------

def rational_on_circle(center, t: Fraction) -> Point2:
    """Point of the unit circle at center with tangent half-angle parameter t."""
    den = 1 + t * t
    return Point2(center[0] + (1 - t * t) / den, center[1] + 2 * t / den)


def random_duality_instance(rng: random.Random, span: int = 40):
    """(p, arc) with the arc between two distinct rational points of a random unit circle."""
    def r(scale=1):
        return Fraction(rng.randint(-span * scale, span * scale), span)
    o = Point2(r(), r())
    while True:
        t1, t2 = r(2), r(2)
        if t1 != t2:
            break
    a, b = rational_on_circle(o, t1), rational_on_circle(o, t2)
    while True:
        p = Point2(o[0] + r(3) * Fraction(3, 4), o[1] + r(3) * Fraction(3, 4))
        if p != o:
            break
    return p, Arc.between(o, a, b)


def duality_check(n: int, seed: int = 0) -> dict:
    """Compare sector membership with single arc crossings on n random instances."""
    rng = random.Random(seed)
    agree = disagree = boundary = 0
    counts = Counter()
    for _ in range(n):
        p, arc = random_duality_instance(rng)
        side = sector_membership_geometric(p, arc.start.point(), arc.end.point())
        c = arc_crossing_count(p, arc)
        counts[c] += 1
        if side is SectorSide.Boundary:
            boundary += 1
        elif (side is SectorSide.In) == (c == 1):
            agree += 1
        else:
            disagree += 1
    return {"instances": n, "agree": agree, "disagree": disagree, "boundary": boundary,
            "crossing_counts": {str(k): v for k, v in sorted(counts.items())}}
