"""Exact rational plane geometry: points, lines, projective maps, duality."""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, NamedTuple, Sequence

Number = int | Fraction | str


class GeometryError(ValueError):
    pass


class DegenerateLine(GeometryError):
    pass


class CoincidentLines(GeometryError):
    pass


class CollinearInput(GeometryError):
    pass


class VerticalLine(GeometryError):
    pass


class DegenerateMap(GeometryError):
    pass


class PointAtInfinity(GeometryError):
    pass


class IdenticalPoints(DegenerateLine, CollinearInput):
    pass


def q(v: Number) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to a Fraction. Floats are refused."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"expected an exact rational, got {type(v).__name__}")


def fmt(v: Fraction | int) -> str:
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def sign(v) -> int:
    return (v > 0) - (v < 0)


class Point2(NamedTuple):
    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x: Number, y: Number) -> "Point2":
        return cls(q(x), q(y))

    def __sub__(self, o):  # type: ignore[override]
        return (self.x - o[0], self.y - o[1])

    def homog(self) -> "HPoint":
        return HPoint(self.x, self.y, Fraction(1))

    def to_json(self) -> list[str]:
        return [fmt(self.x), fmt(self.y)]


def pt(x: Number, y: Number) -> Point2:
    return Point2(q(x), q(y))


class HPoint(NamedTuple):
    X: Fraction
    Y: Fraction
    W: Fraction

    @property
    def is_finite(self) -> bool:
        return self.W != 0

    def to_point(self) -> Point2:
        if self.W == 0:
            raise PointAtInfinity("point lies at infinity")
        return Point2(Fraction(self.X) / self.W, Fraction(self.Y) / self.W)

    def same_as(self, o: "HPoint") -> bool:
        return (self.X * o.Y == self.Y * o.X and self.X * o.W == self.W * o.X
                and self.Y * o.W == self.W * o.Y)


class _LineBase(NamedTuple):
    a: Fraction
    b: Fraction
    c: Fraction


class Line(_LineBase):
    """The line a*x + b*y + c = 0, scaled so the first nonzero of (a, b) is 1."""

    __slots__ = ()

    def __new__(cls, a: Number, b: Number, c: Number):
        a, b, c = q(a), q(b), q(c)
        if a != 0:
            if a != 1:
                b, c, a = b / a, c / a, Fraction(1)
        elif b != 0:
            if b != 1:
                c, b = c / b, Fraction(1)
        else:
            raise DegenerateLine("a and b are both zero")
        return super().__new__(cls, a, b, c)

    @property
    def is_vertical(self) -> bool:
        return self.b == 0

    @property
    def direction(self) -> tuple[Fraction, Fraction]:
        return (self.b, -self.a)

    def value(self, p) -> Fraction:
        return self.a * p[0] + self.b * p[1] + self.c

    def side(self, p) -> int:
        return sign(self.a * p[0] + self.b * p[1] + self.c)

    def contains(self, p) -> bool:
        return self.a * p[0] + self.b * p[1] + self.c == 0

    def y_at(self, x: Fraction) -> Fraction:
        if self.b == 0:
            raise VerticalLine("vertical line has no y(x)")
        return -(self.a * x + self.c) / self.b

    def slope(self) -> Fraction:
        if self.b == 0:
            raise VerticalLine("vertical line has no slope")
        return -self.a / self.b

    def anchor(self) -> Point2:
        """Some point on the line."""
        if self.b != 0:
            return Point2(Fraction(0), -self.c / self.b)
        return Point2(-self.c / self.a, Fraction(0))

    def to_json(self) -> list[str]:
        return [fmt(self.a), fmt(self.b), fmt(self.c)]


def orient(p, r, s) -> int:
    """Sign of the turn p -> r -> s (+1 counter-clockwise)."""
    return sign((r[0] - p[0]) * (s[1] - p[1]) - (r[1] - p[1]) * (s[0] - p[0]))


def cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def line_through(p, r) -> Line:
    if p[0] == r[0] and p[1] == r[1]:
        raise IdenticalPoints("identical points")
    return Line(p[1] - r[1], r[0] - p[0], p[0] * r[1] - p[1] * r[0])


def meet(l1: Line, l2: Line) -> HPoint:
    X = l1.b * l2.c - l1.c * l2.b
    Y = l1.c * l2.a - l1.a * l2.c
    W = l1.a * l2.b - l1.b * l2.a
    if X == 0 and Y == 0 and W == 0:
        raise CoincidentLines("lines coincide")
    return HPoint(X, Y, W)


def meet_point(l1: Line, l2: Line) -> Point2 | None:
    """Finite intersection point, or None when the lines are parallel."""
    W = l1.a * l2.b - l1.b * l2.a
    if W == 0:
        if l1 == l2:
            raise CoincidentLines("lines coincide")
        return None
    return Point2((l1.b * l2.c - l1.c * l2.b) / W, (l1.c * l2.a - l1.a * l2.c) / W)


def angle_cmp(u, v) -> int:
    """Compare direction vectors by angle in [0, 2*pi)."""
    hu = 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1
    hv = 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1
    if hu != hv:
        return hu - hv
    return -sign(cross(u, v))


angle_key = cmp_to_key(angle_cmp)


def sort_by_angle(vectors: Iterable, key=None) -> list:
    if key is None:
        return sorted(vectors, key=angle_key)
    return sorted(vectors, key=lambda item: angle_key(key(item)))


# --- projective maps -------------------------------------------------------

Matrix = tuple[tuple[Fraction, Fraction, Fraction], ...]


def _det3(m) -> Fraction:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _inv3(m) -> Matrix:
    d = _det3(m)
    if d == 0:
        raise DegenerateMap("singular matrix")
    c = [[Fraction(0)] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            rows = [r for r in range(3) if r != j]
            cols = [k for k in range(3) if k != i]
            minor = m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]]
            c[i][j] = (minor if (i + j) % 2 == 0 else -minor) / d
    return tuple(tuple(r) for r in c)


class ProjectiveMap:
    """An invertible 3x3 rational matrix acting on homogeneous points."""

    __slots__ = ("m", "_inv")

    def __init__(self, m: Sequence[Sequence[Number]]):
        mm = tuple(tuple(q(v) for v in row) for row in m)
        if len(mm) != 3 or any(len(r) != 3 for r in mm):
            raise ValueError("need a 3x3 matrix")
        if _det3(mm) == 0:
            raise DegenerateMap("determinant is zero")
        self.m = mm
        self._inv: Matrix | None = None

    @classmethod
    def identity(cls) -> "ProjectiveMap":
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)))

    @property
    def det(self) -> Fraction:
        return _det3(self.m)

    def inverse(self) -> "ProjectiveMap":
        if self._inv is None:
            self._inv = _inv3(self.m)
        return ProjectiveMap(self._inv)

    def __matmul__(self, other: "ProjectiveMap") -> "ProjectiveMap":
        a, b = self.m, other.m
        return ProjectiveMap([[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)]
                              for i in range(3)])

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjectiveMap) and self.m == other.m

    def __hash__(self):
        return hash(self.m)

    def apply(self, p) -> HPoint:
        v = (p.X, p.Y, p.W) if isinstance(p, HPoint) else (p[0], p[1], Fraction(1))
        m = self.m
        return HPoint(*(m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] for i in range(3)))

    def apply_point(self, p) -> Point2:
        return self.apply(p).to_point()

    def apply_line(self, l: Line) -> Line:
        # lines transform by the inverse transpose
        if self._inv is None:
            self._inv = _inv3(self.m)
        n = self._inv
        return Line(*(n[0][i] * l.a + n[1][i] * l.b + n[2][i] * l.c for i in range(3)))

    def to_json(self) -> list[list[str]]:
        return [[fmt(v) for v in row] for row in self.m]

    def __repr__(self):
        return f"ProjectiveMap({self.to_json()})"


def send_to_infinity(p1, p2) -> ProjectiveMap:
    """A map taking p1 to the x-direction (1,0,0) and p2 to the y-direction (0,1,0)."""
    if p1[0] == p2[0] and p1[1] == p2[1]:
        raise IdenticalPoints("p1 and p2 coincide")
    u = (q(p1[0]), q(p1[1]), Fraction(1))
    v = (q(p2[0]), q(p2[1]), Fraction(1))
    for w in ((0, 0, 1), (1, 0, 0), (0, 1, 0)):
        cols = ((u[0], v[0], w[0]), (u[1], v[1], w[1]), (u[2], v[2], w[2]))
        if _det3(cols) != 0:
            return ProjectiveMap(_inv3(cols))
    raise CollinearInput("no completing column found")  # unreachable for distinct points


def shear_map(t: Fraction) -> ProjectiveMap:
    """(x, y) -> (x + t*y, y)."""
    return ProjectiveMap(((1, t, 0), (0, 1, 0), (0, 0, 1)))


def _shear_candidates():
    yield Fraction(0)
    n = 1
    while True:
        for d in (1, 2, 3, 5, 7):
            yield Fraction(n, d)
            yield Fraction(-n, d)
        n += 1


def safe_shear(lines: Iterable[Line]) -> Fraction:
    """Smallest-looking shear parameter t that leaves none of the lines vertical."""
    bad = {l.b / l.a for l in lines if l.a != 0}
    for t in _shear_candidates():
        if t not in bad:
            return t
    raise AssertionError("unreachable")


def shear_line(l: Line, t: Fraction) -> Line:
    return Line(l.a, l.b - t * l.a, l.c)


def shear_point(p, t: Fraction) -> Point2:
    return Point2(p[0] + t * p[1], p[1])


# --- point/line duality ----------------------------------------------------

def dualize_point(p) -> Line:
    """(a, b) -> the line y = a*x - b."""
    return Line(p[0], -1, -p[1])


def dualize_line(l: Line) -> Point2:
    """The non-vertical line y = m*x + t -> (m, -t)."""
    if l.b == 0:
        raise VerticalLine("vertical lines have no dual point")
    return Point2(-l.a / l.b, l.c / l.b)


# --- convex polygons (render and area checks) ------------------------------

def clip_polygon(poly: list, a, b, c) -> list:
    """Clip a convex polygon to the closed half-plane a*x + b*y + c >= 0."""
    out = []
    n = len(poly)
    for i in range(n):
        p, r = poly[i], poly[(i + 1) % n]
        vp = a * p[0] + b * p[1] + c
        vr = a * r[0] + b * r[1] + c
        if vp >= 0:
            out.append(p)
        if (vp > 0 > vr) or (vp < 0 < vr):
            s = vp / (vp - vr)
            out.append(Point2(p[0] + s * (r[0] - p[0]), p[1] + s * (r[1] - p[1])))
    return out


def box_polygon(xmin, ymin, xmax, ymax) -> list:
    return [Point2(q(xmin), q(ymin)), Point2(q(xmax), q(ymin)),
            Point2(q(xmax), q(ymax)), Point2(q(xmin), q(ymax))]


def polygon_area(poly: Sequence) -> Fraction:
    """Signed shoelace area (positive for counter-clockwise order)."""
    s = Fraction(0)
    n = len(poly)
    for i in range(n):
        p, r = poly[i], poly[(i + 1) % n]
        s += p[0] * r[1] - p[1] * r[0]
    return s / 2


def line_interval(l: Line, constraints: Iterable[tuple]) -> tuple[Fraction | None, Fraction | None] | None:
    """Open parameter interval of l inside {a*x + b*y + c > 0 for each (a, b, c)}.

    The line is parametrised as anchor + t * direction; None bounds are
    infinite. Returns None when the line misses the region.
    """
    P = l.anchor()
    d = l.direction
    lo: Fraction | None = None
    hi: Fraction | None = None
    for a, b, c in constraints:
        v0 = a * P[0] + b * P[1] + c
        rate = a * d[0] + b * d[1]
        if rate == 0:
            if v0 <= 0:
                return None
            continue
        t = -v0 / rate
        if rate > 0:
            if lo is None or t > lo:
                lo = t
        elif hi is None or t < hi:
            hi = t
    if lo is not None and hi is not None and lo >= hi:
        return None
    return lo, hi
