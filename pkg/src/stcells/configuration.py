"""Point-line configurations, incidence sets and the grid generator."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .geometry import Line, Point2, pt, q
from .params import SlackParams, at_least, at_most, power_approx


class DuplicateInput(ValueError):
    pass


class InvalidConfiguration(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Configuration:
    """Finite sets of points and lines at a declared scale N.

    ``point_origin``/``line_origin`` map ids back to a parent configuration
    when this one was produced by a refinement.
    """

    lines: tuple[Line, ...]
    points: tuple[Point2, ...]
    N: int
    point_origin: tuple[int, ...] | None = None
    line_origin: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "points", tuple(self.points))
        if not isinstance(self.N, int) or self.N < 1:
            raise InvalidConfiguration("N must be a positive integer")
        _check_unique(self.lines, "line")
        _check_unique(self.points, "point")

    def __len__(self):
        return len(self.lines) + len(self.points)

    @cached_property
    def point_index(self) -> dict[Point2, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def line_index(self) -> dict[Line, int]:
        return {l: i for i, l in enumerate(self.lines)}

    @cached_property
    def incidences(self) -> "IncidenceSet":
        return incidences(self)

    def subset(self, line_ids: Iterable[int] | None = None,
               point_ids: Iterable[int] | None = None) -> "Configuration":
        lids = sorted(set(range(len(self.lines)) if line_ids is None else line_ids))
        pids = sorted(set(range(len(self.points)) if point_ids is None else point_ids))
        return Configuration(tuple(self.lines[i] for i in lids), tuple(self.points[i] for i in pids),
                             self.N, tuple(pids), tuple(lids))

    def extremal_margins(self, params: SlackParams) -> dict:
        """How far |lines| and |points| sit inside [N^(1-eps), N]."""
        lo = 1 - params.epsilon
        out = {}
        for name, n in (("lines", len(self.lines)), ("points", len(self.points))):
            out[name] = {
                "count": n,
                "lower_ok": at_least(n, self.N, lo),
                "upper_ok": n <= self.N,
                "lower_margin": Fraction(n) / power_approx(self.N, lo),
            }
        return out

    def to_json(self) -> dict:
        return {"N": self.N,
                "points": [p.to_json() for p in self.points],
                "lines": [l.to_json() for l in self.lines]}

    @classmethod
    def from_json(cls, d: dict) -> "Configuration":
        try:
            N = d["N"]
            points = tuple(pt(x, y) for x, y in d["points"])
            lines = tuple(Line(a, b, c) for a, b, c in d["lines"])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise InvalidConfiguration(f"malformed configuration: {e}") from e
        if isinstance(N, str):
            N = int(N)
        return cls(lines, points, N)


def _check_unique(items: Sequence, what: str):
    seen: dict = {}
    for i, x in enumerate(items):
        if x in seen:
            raise DuplicateInput(f"{what} {i} duplicates {what} {seen[x]}")
        seen[x] = i


class IncidenceSet:
    """Incident (line id, point id) pairs of a configuration."""

    def __init__(self, pairs: Iterable[tuple[int, int]], n_lines: int, n_points: int):
        self.pairs = frozenset(pairs)
        self.n_lines = n_lines
        self.n_points = n_points

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        return pair in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    @cached_property
    def by_line(self) -> dict[int, tuple[int, ...]]:
        d = defaultdict(list)
        for l, p in self.pairs:
            d[l].append(p)
        return {l: tuple(sorted(v)) for l, v in d.items()}

    @cached_property
    def by_point(self) -> dict[int, tuple[int, ...]]:
        d = defaultdict(list)
        for l, p in self.pairs:
            d[p].append(l)
        return {p: tuple(sorted(v)) for p, v in d.items()}

    def points_on(self, line_id: int) -> tuple[int, ...]:
        return self.by_line.get(line_id, ())

    def lines_through(self, point_id: int) -> tuple[int, ...]:
        return self.by_point.get(point_id, ())

    def restrict(self, pairs: Iterable[tuple[int, int]]) -> "PartialIncidenceSet":
        return PartialIncidenceSet(pairs, self)

    def to_json(self) -> list[list[int]]:
        return [list(p) for p in sorted(self.pairs)]


class PartialIncidenceSet(IncidenceSet):
    """A subset J of a parent incidence set I."""

    def __init__(self, pairs: Iterable[tuple[int, int]], parent: IncidenceSet):
        pairs = frozenset(pairs)
        stray = pairs - parent.pairs
        if stray:
            raise InvalidConfiguration(f"{len(stray)} pairs are not incidences of the parent")
        super().__init__(pairs, parent.n_lines, parent.n_points)
        self.parent = parent


def incidences(config: Configuration) -> IncidenceSet:
    """All incident pairs, bucketing points by whichever coordinate has fewer distinct values."""
    idx = config.point_index
    xs = sorted({p.x for p in config.points})
    ys = sorted({p.y for p in config.points})
    by_x = len(xs) <= len(ys)
    buckets: dict[Fraction, list[int]] = defaultdict(list)
    for i, p in enumerate(config.points):
        buckets[p.x if by_x else p.y].append(i)
    pairs = []
    for li, l in enumerate(config.lines):
        if by_x:
            if l.b == 0:
                pairs.extend((li, pi) for pi in buckets.get(-l.c / l.a, ()))
                continue
            for x in xs:
                j = idx.get(Point2(x, -(l.a * x + l.c) / l.b))
                if j is not None:
                    pairs.append((li, j))
        else:
            if l.a == 0:
                pairs.extend((li, pi) for pi in buckets.get(-l.c / l.b, ()))
                continue
            for y in ys:
                j = idx.get(Point2(-(l.b * y + l.c) / l.a, y))
                if j is not None:
                    pairs.append((li, j))
    return IncidenceSet(pairs, len(config.lines), len(config.points))


def incidences_bruteforce(config: Configuration) -> IncidenceSet:
    return IncidenceSet(((li, pi) for li, l in enumerate(config.lines)
                         for pi, p in enumerate(config.points) if l.contains(p)),
                        len(config.lines), len(config.points))


def generate_grid(k: int) -> Configuration:
    """Points {0..k-1} x {0..2k^2-2} with lines y = m*x + b, 0 <= m < k, 0 <= b < k^2; N = 2k^3."""
    if not isinstance(k, int) or k < 1:
        raise InvalidConfiguration("k must be a positive integer")
    points = tuple(Point2(Fraction(x), Fraction(y)) for x in range(k) for y in range(2 * k * k - 1))
    lines = tuple(Line(-m, 1, -b) for m in range(k) for b in range(k * k))
    return Configuration(lines, points, 2 * k ** 3)


def generate_random(n_lines: int, n_points: int, seed: int, coord_range: int = 50,
                    N: int | None = None) -> Configuration:
    """Random integer points and lines through pairs of small integer points."""
    rng = random.Random(seed)
    pts: dict[Point2, None] = {}
    if n_points > (2 * coord_range + 1) ** 2:
        raise InvalidConfiguration("coordinate range too small for that many points")
    while len(pts) < n_points:
        pts[pt(rng.randint(-coord_range, coord_range), rng.randint(-coord_range, coord_range))] = None
    lines: dict[Line, None] = {}
    while len(lines) < n_lines:
        a, b = rng.randint(-coord_range, coord_range), rng.randint(-coord_range, coord_range)
        if a == 0 and b == 0:
            continue
        lines[Line(a, b, rng.randint(-coord_range * coord_range, coord_range * coord_range))] = None
    return Configuration(tuple(lines), tuple(pts), N or max(n_lines, n_points, 1))


@dataclass
class RichnessProfile:
    point_counts: list[int]
    line_counts: list[int]
    point_histogram: dict[int, int] = field(default_factory=dict)
    line_histogram: dict[int, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"point_counts": self.point_counts, "line_counts": self.line_counts,
                "point_histogram": {str(k): v for k, v in sorted(self.point_histogram.items())},
                "line_histogram": {str(k): v for k, v in sorted(self.line_histogram.items())}}


def dyadic_class(n: int) -> int:
    """Largest power of two <= n, or 0 for n == 0."""
    return 0 if n <= 0 else 1 << (n.bit_length() - 1)


def richness(config: Configuration, inc: IncidenceSet | None = None) -> RichnessProfile:
    inc = inc or config.incidences
    pc = [len(inc.lines_through(i)) for i in range(len(config.points))]
    lc = [len(inc.points_on(i)) for i in range(len(config.lines))]
    ph: dict[int, int] = defaultdict(int)
    lh: dict[int, int] = defaultdict(int)
    for c in pc:
        ph[dyadic_class(c)] += 1
    for c in lc:
        lh[dyadic_class(c)] += 1
    return RichnessProfile(pc, lc, dict(ph), dict(lh))


@dataclass
class FilterResult:
    config: Configuration
    incidences: IncidenceSet
    removed_points: list[int]


def filter_rich_points(config: Configuration, inc: IncidenceSet | None, threshold) -> FilterResult:
    """Drop every point lying on fewer than ``threshold`` lines."""
    inc = inc or config.incidences
    t = q(threshold)
    if t < 0:
        raise ValueError("threshold must be non-negative")
    removed = [i for i in range(len(config.points)) if len(inc.lines_through(i)) < t]
    gone = set(removed)
    sub = config.subset(point_ids=[i for i in range(len(config.points)) if i not in gone])
    return FilterResult(sub, incidences(sub), removed)


def st_bound(n: int, m: int, params: SlackParams) -> Fraction:
    return params.C_st * power_approx(n * m, Fraction(2, 3)) + n + m


def st_margin(config: Configuration, inc: IncidenceSet | None, params: SlackParams) -> Fraction:
    """|I| divided by C_st*(n*m)^(2/3) + n + m; at most 1 whenever the incidence bound holds."""
    inc = inc or config.incidences
    bound = st_bound(len(config.lines), len(config.points), params)
    return Fraction(len(inc)) / bound if bound else Fraction(0)


def within_st_bound(config: Configuration, inc: IncidenceSet | None, params: SlackParams) -> bool:
    """Exact check |I| <= C_st*(nm)^(2/3) + n + m."""
    inc = inc or config.incidences
    n, m = len(config.lines), len(config.points)
    rest = Fraction(len(inc)) - n - m
    if rest <= 0:
        return True
    return at_most(rest / params.C_st, n * m, Fraction(2, 3))
