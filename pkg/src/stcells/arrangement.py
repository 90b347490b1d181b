"""Exact line arrangements: vertices, edges, faces, point location, zones, funnels.

Rays are closed off on a large circle so every face, bounded or not, has a
closed boundary walk. The outer face beyond that circle is discarded. Counts
reported as "compactified" add one vertex at infinity, which makes
v - e + f = 2 hold for every arrangement.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .geometry import (Line, Point2, VerticalLine, angle_key, cross, dot, meet_point,
                       safe_shear, shear_line, sign)


class DuplicateLines(ValueError):
    pass


class LineInArrangement(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    """A piece of one line between consecutive vertices; None marks an end at infinity.

    Edges are oriented along the line direction (b, -a).
    """

    line: int
    start: int | None
    end: int | None


@dataclass(frozen=True)
class Face:
    id: int
    half_edges: tuple[int, ...]  # line half-edges in boundary order; half-edge h lies on edge h // 2
    vertices: tuple[int, ...]
    bounded: bool

    @property
    def side_count(self) -> int:
        return len(self.half_edges)

    @property
    def edges(self) -> tuple[int, ...]:
        return tuple(h >> 1 for h in self.half_edges)


@dataclass(frozen=True)
class Location:
    kind: str  # "face", "edge" or "vertex"
    id: int

    @property
    def on_boundary(self) -> bool:
        return self.kind != "face"


@dataclass(frozen=True)
class Trapezoid:
    """The part of a face over the open x-interval (xl, xr); None bounds are infinite."""

    face: int
    xl: Fraction | None
    xr: Fraction | None
    bottom: int | None
    top: int | None

    def side_count(self, lines: Sequence[Line]) -> int:
        n = (self.bottom is not None) + (self.top is not None)
        for x in (self.xl, self.xr):
            if x is None:
                continue
            if self.bottom is None or self.top is None:
                n += 1
            elif lines[self.bottom].y_at(x) < lines[self.top].y_at(x):
                n += 1
        return n

    def contains(self, p, lines: Sequence[Line]) -> bool:
        """Open containment."""
        if self.xl is not None and not p[0] > self.xl:
            return False
        if self.xr is not None and not p[0] < self.xr:
            return False
        if self.bottom is not None and not p[1] > lines[self.bottom].y_at(p[0]):
            return False
        if self.top is not None and not p[1] < lines[self.top].y_at(p[0]):
            return False
        return True

    def half_open_contains(self, p, lines: Sequence[Line]) -> bool:
        """Containment with the right wall and the top included (used for tie-broken assignment)."""
        if self.xl is not None and not p[0] > self.xl:
            return False
        if self.xr is not None and not p[0] <= self.xr:
            return False
        if self.bottom is not None and not p[1] > lines[self.bottom].y_at(p[0]):
            return False
        if self.top is not None and not p[1] <= lines[self.top].y_at(p[0]):
            return False
        return True


class Arrangement:
    """The planar subdivision induced by a finite set of distinct lines."""

    def __init__(self, lines: Iterable[Line]):
        self.lines: tuple[Line, ...] = tuple(lines)
        if len(set(self.lines)) != len(self.lines):
            raise DuplicateLines("duplicate lines in arrangement")
        self._build()

    # --- construction ---------------------------------------------------

    def _build(self):
        lines = self.lines
        r = len(lines)
        # vertices, with every line through each
        vlines: dict[Point2, set[int]] = defaultdict(set)
        for i in range(r):
            li = lines[i]
            for j in range(i + 1, r):
                p = meet_point(li, lines[j])
                if p is not None:
                    vlines[p].add(i)
                    vlines[p].add(j)
        verts = sorted(vlines)
        self.vertices: list[Point2] = verts
        self.vertex_index = {p: k for k, p in enumerate(verts)}
        self.vertex_lines: list[tuple[int, ...]] = [tuple(sorted(vlines[p])) for p in verts]

        # vertices along each line, ordered by the line parameter
        on_line: list[list[int]] = [[] for _ in range(r)]
        for k, ls in enumerate(self.vertex_lines):
            for i in ls:
                on_line[i].append(k)
        self.line_params: list[list[Fraction]] = []
        self.line_vertices: list[list[int]] = []
        edges: list[Edge] = []
        self.line_edges: list[list[int]] = []
        for i, l in enumerate(lines):
            d = l.direction
            vs = sorted(on_line[i], key=lambda k: dot(verts[k], d))
            self.line_vertices.append(vs)
            self.line_params.append([dot(verts[k], d) for k in vs])
            ids = []
            seq: list[int | None] = [None] + vs + [None]
            for a, b in zip(seq, seq[1:]):
                ids.append(len(edges))
                edges.append(Edge(i, a, b))
            self.line_edges.append(ids)
        self.edges: list[Edge] = edges
        self._trace()

    def _trace(self):
        lines, verts, edges = self.lines, self.vertices, self.edges
        nv, ne = len(verts), len(edges)
        H = 2 * ne

        # ends at infinity ordered around a huge circle
        ends = []  # (line, +1 / -1)
        for i, l in enumerate(lines):
            ends.append((i, 1))
            ends.append((i, -1))

        def end_dir(e):
            d = lines[e[0]].direction
            return d if e[1] > 0 else (-d[0], -d[1])

        def end_key(e):
            u = end_dir(e)
            n = (-u[1], u[0])
            return (angle_key(u), dot(lines[e[0]].anchor(), n))

        ends.sort(key=end_key)
        K = len(ends)
        self._ends = ends
        end_node = {e: nv + j for j, e in enumerate(ends)}
        A0 = H

        # origin/destination nodes of line half-edges
        origin = [0] * (H + 2 * K)
        dest = [0] * (H + 2 * K)
        for e, ed in enumerate(edges):
            s = ed.start if ed.start is not None else end_node[(ed.line, -1)]
            t = ed.end if ed.end is not None else end_node[(ed.line, 1)]
            origin[2 * e], dest[2 * e] = s, t
            origin[2 * e + 1], dest[2 * e + 1] = t, s
        for j in range(K):
            a = A0 + 2 * j
            origin[a], dest[a] = nv + j, nv + (j + 1) % K
            origin[a + 1], dest[a + 1] = nv + (j + 1) % K, nv + j

        # counter-clockwise rotation of outgoing half-edges at each node
        out: list[list[int]] = [[] for _ in range(nv)]
        for h in range(H):
            if origin[h] < nv:
                out[origin[h]].append(h)
        dirs = {}
        for h in range(H):
            d = lines[edges[h >> 1].line].direction
            dirs[h] = d if h % 2 == 0 else (-d[0], -d[1])
        for v in range(nv):
            out[v].sort(key=lambda h: angle_key(dirs[h]))
        for j, e in enumerate(ends):
            inward = self.line_edges[e[0]][-1] * 2 + 1 if e[1] > 0 else self.line_edges[e[0]][0] * 2
            out.append([A0 + 2 * j, inward, A0 + 2 * ((j - 1) % K) + 1])
        self._out = out
        pos = {}
        for node_list in out:
            for k, h in enumerate(node_list):
                pos[h] = k

        nxt = [0] * (H + 2 * K)
        for h in range(H + 2 * K):
            lst = out[dest[h]]
            nxt[h] = lst[(pos[h ^ 1] - 1) % len(lst)]

        face_of = [-1] * (H + 2 * K)
        raw = []
        for h0 in range(H + 2 * K):
            if face_of[h0] != -1:
                continue
            cyc = []
            h = h0
            while face_of[h] == -1:
                face_of[h] = len(raw)
                cyc.append(h)
                h = nxt[h]
            raw.append(cyc)

        faces_raw = []
        for k, cyc in enumerate(raw):
            line_h = [h for h in cyc if h < H]
            if not line_h and K > 0:
                continue  # the face outside the circle
            # start the walk at its smallest half-edge for a canonical rotation
            if line_h:
                m = line_h.index(min(line_h))
                line_h = line_h[m:] + line_h[:m]
            vs = tuple(sorted({origin[h] for h in cyc if origin[h] < nv}))
            bounded = all(h < H for h in cyc)
            key = (0 if vs else 1, vs[0] if vs else 0,
                   tuple(sorted((h >> 1, h & 1) for h in line_h)))
            faces_raw.append((key, k, tuple(line_h), vs, bounded))
        faces_raw.sort()
        remap = {}
        faces = []
        for fid, (_, k, hs, vs, bounded) in enumerate(faces_raw):
            remap[k] = fid
            faces.append(Face(fid, hs, vs, bounded))
        self.faces: list[Face] = faces
        self.face_of_half_edge = [remap.get(f, -1) for f in face_of]
        self._origin, self._dest = origin, dest
        self._dirs = dirs
        self._arc_base = A0
        if not lines:
            self.faces = [Face(0, (), (), False)]

    # --- combinatorics ----------------------------------------------------

    def edge_faces(self, e: int) -> tuple[int, int]:
        """(face on the left, face on the right) of edge e along its direction."""
        return self.face_of_half_edge[2 * e], self.face_of_half_edge[2 * e + 1]

    @property
    def counts(self) -> tuple[int, int, int]:
        """(v, e, f) of the compactified arrangement: one extra vertex at infinity."""
        return len(self.vertices) + 1, len(self.edges), len(self.faces)

    def euler_ok(self) -> bool:
        v, e, f = self.counts
        return v - e + f == 2

    def vertex_faces(self, v: int) -> tuple[int, ...]:
        return tuple(sorted({self.face_of_half_edge[h] for h in self._out[v]}))

    def face_lines(self, f: int) -> tuple[int, ...]:
        return tuple(sorted({self.edges[h >> 1].line for h in self.faces[f].half_edges}))

    def half_edge_dir(self, h: int):
        return self._dirs[h]

    def edge_point(self, e: int) -> Point2:
        """A point in the relative interior of an edge."""
        ed = self.edges[e]
        l = self.lines[ed.line]
        d = l.direction
        if ed.start is not None and ed.end is not None:
            p, r = self.vertices[ed.start], self.vertices[ed.end]
            return Point2((p[0] + r[0]) / 2, (p[1] + r[1]) / 2)
        if ed.start is not None:
            p = self.vertices[ed.start]
            return Point2(p[0] + d[0], p[1] + d[1])
        if ed.end is not None:
            p = self.vertices[ed.end]
            return Point2(p[0] - d[0], p[1] - d[1])
        return l.anchor()

    def sign_vector(self, f: int) -> tuple[int, ...]:
        """Side of every line (+1/-1) on which face f lies."""
        face = self.faces[f]
        if not face.half_edges:
            return ()
        h = face.half_edges[0]
        e = h >> 1
        own = self.edges[e].line
        p = self.edge_point(e)
        d = self._dirs[h]
        out = []
        for i, l in enumerate(self.lines):
            if i == own:
                out.append(sign(l.a * -d[1] + l.b * d[0]))
            else:
                out.append(l.side(p))
        return tuple(out)

    @cached_property
    def sign_vectors(self) -> list[tuple[int, ...]]:
        return [self.sign_vector(f) for f in range(len(self.faces))]

    def face_polygon(self, f: int) -> list[Point2]:
        """Vertices of a bounded face in counter-clockwise order."""
        face = self.faces[f]
        if not face.bounded:
            raise ValueError("face is unbounded")
        return [self.vertices[self._origin[h]] for h in face.half_edges]

    def face_halfplanes(self, f: int) -> list[tuple[Line, int]]:
        """The face as an intersection of open half-planes side(l, p) == s over its bounding lines."""
        face = self.faces[f]
        out = []
        for h in face.half_edges:
            l = self.lines[self.edges[h >> 1].line]
            d = self._dirs[h]
            out.append((l, sign(l.a * -d[1] + l.b * d[0])))
        return out

    def face_interior_point(self, f: int) -> Point2:
        """Some point strictly inside face f."""
        face = self.faces[f]
        if face.bounded:
            poly = self.face_polygon(f)
            n = len(poly)
            return Point2(sum(p[0] for p in poly) / n, sum(p[1] for p in poly) / n)
        if not face.half_edges:
            return Point2(Fraction(0), Fraction(0))
        # step off an edge point toward the face side, shorter than the distance to any other line
        h = face.half_edges[0]
        e = h >> 1
        p = self.edge_point(e)
        d = self._dirs[h]
        n = (-d[1], d[0])
        step = Fraction(1)
        own = self.edges[e].line
        for i, l in enumerate(self.lines):
            if i == own:
                continue
            val = l.value(p)
            rate = l.a * n[0] + l.b * n[1]
            if rate != 0 and sign(rate) != sign(val):
                step = min(step, abs(val / rate) / 2)
        return Point2(p[0] + step * n[0], p[1] + step * n[1])

    def projective_faces(self) -> list[int]:
        """Map each face to a representative of its face in the projective plane.

        Unbounded faces that meet the line at infinity in antipodal direction
        intervals are the same projective face.
        """
        parent = list(range(len(self.faces)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ends = self._ends
        K = len(ends)
        if K == 0:
            return [0]
        lines = self.lines

        def end_dir(e):
            d = lines[e[0]].direction
            return d if e[1] > 0 else (-d[0], -d[1])

        gaps = []  # arcs whose endpoints point in different directions
        for j in range(K):
            u, w = end_dir(ends[j]), end_dir(ends[(j + 1) % K])
            same = cross(u, w) == 0 and dot(u, w) > 0
            if not same:
                gaps.append(j)
        m = len(gaps)
        for t in range(m // 2):
            f1 = self.face_of_half_edge[self._arc_base + 2 * gaps[t]]
            f2 = self.face_of_half_edge[self._arc_base + 2 * gaps[t + m // 2]]
            a, b = find(f1), find(f2)
            if a != b:
                parent[max(a, b)] = min(a, b)
        return [find(f) for f in range(len(self.faces))]

    # --- point location ---------------------------------------------------

    @cached_property
    def _slabs(self):
        t = safe_shear(self.lines)
        sl = [shear_line(l, t) for l in self.lines]
        xs = sorted({v[0] + t * v[1] for v in self.vertices})
        return t, sl, xs, {}

    def _slab(self, j: int):
        t, sl, xs, cache = self._slabs
        if j in cache:
            return cache[j]
        if not xs:
            xm = Fraction(0)
        elif j < 0:
            xm = xs[0] - 1
        elif j >= len(xs) - 1:
            xm = xs[-1] + 1
        else:
            xm = (xs[j] + xs[j + 1]) / 2
        order = sorted(range(len(sl)), key=lambda i: sl[i].y_at(xm))
        above, below = [], []
        for i in order:
            y = sl[i].y_at(xm)
            p = Point2(xm - t * y, y)  # back to original coordinates
            s = dot(p, self.lines[i].direction)
            e = self.line_edges[i][bisect_left(self.line_params[i], s)]
            d = self.lines[i].direction
            east = d[0] + t * d[1] > 0
            fl, fr = self.edge_faces(e)
            above.append((fl if east else fr, e))
            below.append(fr if east else fl)
        cache[j] = (order, above, below)
        return cache[j]

    def locate(self, p) -> Location:
        """Face containing p, or the edge/vertex it lies on."""
        if not self.lines:
            return Location("face", 0)
        v = self.vertex_index.get(Point2(p[0], p[1]))
        if v is not None:
            return Location("vertex", v)
        t, sl, xs, _ = self._slabs
        x = p[0] + t * p[1]
        y = p[1]
        j = bisect_right(xs, x) - 1
        order, above, below = self._slab(j)
        lo, hi = 0, len(order)
        while lo < hi:  # first line whose value at x is >= y
            mid = (lo + hi) // 2
            if sl[order[mid]].y_at(x) < y:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(order) and sl[order[lo]].y_at(x) == y:
            i = order[lo]
            s = dot(p, self.lines[i].direction)
            return Location("edge", self.line_edges[i][bisect_left(self.line_params[i], s)])
        if lo == 0:
            return Location("face", below[0])
        return Location("face", above[lo - 1][0])

    def locate_above(self, p) -> int:
        """Face containing p, with boundary points pushed to the face just above and slightly left."""
        loc = self.locate(p)
        if loc.kind == "face":
            return loc.id
        if loc.kind == "edge":
            d = self.lines[self.edges[loc.id].line].direction
            s = sign(d[0]) if d[0] != 0 else sign(d[1])
            fl, fr = self.edge_faces(loc.id)
            return fl if s > 0 else fr
        outs = self._out[loc.id]

        def upto_vertical(w):
            return (w[1] >= 0 and w[0] > 0) or (w[0] == 0 and w[1] > 0)

        cand = [h for h in outs if upto_vertical(self._dirs[h])]
        h = cand[-1] if cand else outs[-1]
        return self.face_of_half_edge[h]

    # --- zones and funnels --------------------------------------------------

    def zone(self, l: Line) -> list[int]:
        """Faces met by the line l, including faces touching l at a vertex only."""
        if l in self.lines:
            raise LineInArrangement("zone of an arrangement line")
        if not self.lines:
            return [0]
        d = l.direction
        P = l.anchor()
        params = set()
        for m in self.lines:
            if m == l:
                continue
            x = meet_point(l, m)
            if x is not None:
                params.add(dot((x[0] - P[0], x[1] - P[1]), d) / dot(d, d))
        ts = sorted(params)
        samples = []
        if not ts:
            samples.append(Fraction(0))
        else:
            samples.append(ts[0] - 1)
            samples.extend((a + b) / 2 for a, b in zip(ts, ts[1:]))
            samples.append(ts[-1] + 1)
        found = set()
        for s in samples:
            loc = self.locate(Point2(P[0] + s * d[0], P[1] + s * d[1]))
            found.add(loc.id)
        for s in ts:
            loc = self.locate(Point2(P[0] + s * d[0], P[1] + s * d[1]))
            if loc.kind == "vertex":
                found.update(self.vertex_faces(loc.id))
            elif loc.kind == "edge":
                found.update(self.edge_faces(loc.id))
        return sorted(found)

    def funnels(self) -> list[Trapezoid]:
        """Split every face into trapezoids by vertical lines through its own vertices."""
        if any(l.is_vertical for l in self.lines):
            raise VerticalLine("funnels need an arrangement without vertical lines")
        out = []
        for f in range(len(self.faces)):
            out.extend(self.face_funnels(f))
        return out

    def face_funnels(self, f: int) -> list[Trapezoid]:
        face = self.faces[f]
        if not face.half_edges:
            return [Trapezoid(f, None, None, None, None)]
        lower, upper = [], []
        left_inf = right_inf = False
        for h in face.half_edges:
            ed = self.edges[h >> 1]
            o, t = self._origin[h], self._dest[h]
            nv = len(self.vertices)
            xo = self.vertices[o][0] if o < nv else None
            xt = self.vertices[t][0] if t < nv else None
            east = self._dirs[h][0] > 0
            if east:
                lower.append((xo, xt, ed.line))
                left_inf |= xo is None
                right_inf |= xt is None
            else:
                upper.append((xt, xo, ed.line))
                left_inf |= xt is None
                right_inf |= xo is None
        xs = sorted({self.vertices[v][0] for v in face.vertices})
        bounds: list[tuple[Fraction | None, Fraction | None]] = []
        if not xs:
            bounds.append((None, None))
        else:
            if left_inf:
                bounds.append((None, xs[0]))
            bounds.extend(zip(xs, xs[1:]))
            if right_inf:
                bounds.append((xs[-1], None))

        def cover(chain, xm):
            for a, b, line in chain:
                if (a is None or a < xm) and (b is None or xm < b):
                    return line
            return None

        out = []
        for xl, xr in bounds:
            if xl is None and xr is None:
                xm = Fraction(0)
            elif xl is None:
                xm = xr - 1
            elif xr is None:
                xm = xl + 1
            else:
                xm = (xl + xr) / 2
            out.append(Trapezoid(f, xl, xr, cover(lower, xm), cover(upper, xm)))
        return out


def complexity_histogram(arr: Arrangement, faces: Iterable[int] | None = None,
                         const: Fraction = Fraction(1)) -> list[dict]:
    """Faces with side count in (s, 2s] for s = 1, 2, 4, ..., against r^2/s^3 (s <= sqrt r) or r/s."""
    r = max(len(arr.lines), 1)
    fs = range(len(arr.faces)) if faces is None else faces
    counts: dict[int, int] = defaultdict(int)
    for f in fs:
        sc = arr.faces[f].side_count
        s = 1
        while not (s < sc <= 2 * s):
            if sc <= 1:
                break
            s *= 2
        counts[s] += 1
    out = []
    for s in sorted(counts):
        bound = Fraction(r * r, s ** 3) if s * s <= r else Fraction(r, s)
        bound *= const
        out.append({"s": s, "count": counts[s], "bound": bound, "margin": Fraction(counts[s]) / bound})
    return out
