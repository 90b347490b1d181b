"""A grid-of-rectangles recipe for building configurations from O(N^(1/3)) parameters.

Inputs are x-separators a, y-separators b and a family of lines l_s. The
recipe seeds points from crossings of l_s in the first column strip, derives
lines from those points, and structures the lines crossing every other
cell. Each stage can fail; the outcome always carries the per-stage trace.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .bush import Bush, build_bush, interval_crossings, organizing_report, rank_organizing_points
from .cells import CellDecomposition
from .configuration import Configuration, IncidenceSet
from .geometry import (DegenerateLine, Line, Point2, PointAtInfinity, ProjectiveMap, fmt, line_through,
                       meet_point, q, send_to_infinity)
from .params import SlackParams, at_least, at_most, power_approx, power_ceil, power_floor
from .refinement import CapExceeded, find_structuring_points

STAGES = ("StripCrossings", "RowBuckets", "CellLineCounts", "Structuredness")


class InvalidRecipeParams(ValueError):
    pass


class DoubleBushFailed(ValueError):
    pass


class RecipeFailed(ValueError):
    pass


@dataclass(frozen=True)
class RecipeParams:
    a: tuple[Fraction, ...]
    b: tuple[Fraction, ...]
    ls: tuple[Line, ...]
    N: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(q(x) for x in self.a))
        object.__setattr__(self, "b", tuple(q(x) for x in self.b))
        object.__setattr__(self, "ls", tuple(self.ls))
        for name in ("a", "b"):
            v = getattr(self, name)
            if len(v) < 2:
                raise InvalidRecipeParams(f"{name} needs at least two entries")
            if any(x >= y for x, y in zip(v, v[1:])):
                raise InvalidRecipeParams(f"{name} must be strictly increasing")
        if len(set(self.ls)) != len(self.ls):
            raise InvalidRecipeParams("l_s lines must be distinct")
        if not isinstance(self.N, int) or self.N < 1:
            raise InvalidRecipeParams("N must be a positive integer")

    def to_json(self) -> dict:
        return {"N": self.N, "a": [fmt(x) for x in self.a], "b": [fmt(x) for x in self.b],
                "ls": [l.to_json() for l in self.ls]}

    @classmethod
    def from_json(cls, d: dict) -> "RecipeParams":
        try:
            return cls(tuple(q(x) for x in d["a"]), tuple(q(x) for x in d["b"]),
                       tuple(Line(*l) for l in d["ls"]), int(d["N"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise InvalidRecipeParams(f"malformed recipe parameters: {e}") from e


@dataclass
class RecipeOutcome:
    status: str  # "Success" or "Failure"
    stage: str | None
    trace: list[dict]
    output: Configuration | None = None
    first_strip_points: int = 0
    structuring_points: int = 0

    @property
    def success(self) -> bool:
        return self.status == "Success"

    def to_json(self) -> dict:
        out = {"status": self.status, "failed_stage": self.stage, "trace": self.trace,
               "first_strip_points": self.first_strip_points,
               "structuring_points": self.structuring_points}
        if self.output is not None:
            out["output"] = self.output.to_json()
        return out


def crosses_open_rect(l: Line, x0, x1, y0, y1) -> bool:
    """Whether l meets the open rectangle (x0, x1) x (y0, y1), by corner signs."""
    vals = [l.a * x + l.b * y + l.c for x in (x0, x1) for y in (y0, y1)]
    return min(vals) < 0 < max(vals)


def run_recipe(params: RecipeParams, slack: SlackParams) -> RecipeOutcome:
    N = params.N
    a, b = params.a, params.b
    e23 = slack.exp(Fraction(2, 3), -1)
    e13lo = slack.exp(Fraction(1, 3), -1)
    e13hi = slack.exp(Fraction(1, 3), 1)
    e23hi = slack.exp(Fraction(2, 3), 1)
    trace: list[dict] = []

    def fail(stage):
        return RecipeOutcome("Failure", stage, trace)

    # Stage 1: crossings of l_s strictly inside the first strip
    meets: dict[Point2, set[int]] = defaultdict(set)
    pairs = 0
    ls = params.ls
    for i in range(len(ls)):
        for j in range(i + 1, len(ls)):
            x = meet_point(ls[i], ls[j])
            if x is not None and a[0] < x[0] < a[1]:
                meets[x].update((i, j))
                pairs += 1
    n1 = len(meets)
    ok1 = at_least(n1, N, e23)
    trace.append({"stage": STAGES[0], "crossing_points": n1, "crossing_pairs": pairs,
                  "threshold": f"N^({fmt(e23)})", "floor": power_ceil(N, e23),
                  "margin": fmt(Fraction(n1) / power_approx(N, e23)), "passed": ok1})
    if not ok1:
        return fail(STAGES[0])

    # Stage 2: rows [b_k, b_k+1)
    rows: dict[int, list[Point2]] = defaultdict(list)
    for x in sorted(meets):
        k = bisect_right(b, x[1]) - 1
        if 0 <= k < len(b) - 1:
            rows[k].append(x)
    good_rows = [k for k in sorted(rows)
                 if at_least(len(rows[k]), N, e13lo) and at_most(len(rows[k]), N, e13hi)]
    ok2 = at_least(len(good_rows), N, e13lo)
    trace.append({"stage": STAGES[1], "row_counts": {str(k): len(v) for k, v in sorted(rows.items())},
                  "qualifying_rows": good_rows, "band": [f"N^({fmt(e13lo)})", f"N^({fmt(e13hi)})"],
                  "needed_rows": power_ceil(N, e13lo),
                  "margin": fmt(Fraction(len(good_rows)) / power_approx(N, e13lo)), "passed": ok2})
    if not ok2:
        return fail(STAGES[1])
    first = {(0, k): rows[k] for k in good_rows}

    # Stage 3: lines through two points of a first-strip cell, and cells they cross
    derived: dict[Line, None] = {}
    for cell in sorted(first):
        pts = first[cell]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                derived[line_through(pts[i], pts[j])] = None
    L = sorted(derived)
    crossing: dict[tuple[int, int], list[int]] = {}
    for j in range(len(a) - 1):
        for k in range(len(b) - 1):
            crossing[(j, k)] = [i for i, l in enumerate(L) if crosses_open_rect(l, a[j], a[j + 1], b[k], b[k + 1])]
    good_cells = [c for c in sorted(crossing)
                  if at_least(len(crossing[c]), N, e23) and at_most(len(crossing[c]), N, e23hi)]
    ok3 = at_least(len(good_cells), N, e23)
    trace.append({"stage": STAGES[2], "lines": len(L), "cells": len(crossing),
                  "cell_line_counts": {f"{j},{k}": len(v) for (j, k), v in sorted(crossing.items())},
                  "qualifying_cells": len(good_cells), "needed_cells": power_ceil(N, e23),
                  "band": [f"N^({fmt(e23)})", f"N^({fmt(e23hi)})"],
                  "margin": fmt(Fraction(len(good_cells)) / power_approx(N, e23)), "passed": ok3})
    if not ok3:
        return fail(STAGES[2])

    # Stage 4: structure the lines crossing each qualifying cell
    cap = power_floor(N, e13hi)
    structured: dict[tuple[int, int], list[Point2]] = {}
    failed_cells = []
    for c in good_cells:
        if c[0] == 0:
            structured[c] = list(first.get(c, []))  # first-strip points are given, not searched
            continue
        j, k = c
        ids = crossing[c]
        cand: dict[Point2, list[int]] = defaultdict(list)
        for u in range(len(ids)):
            for v in range(u + 1, len(ids)):
                x = meet_point(L[ids[u]], L[ids[v]])
                if x is not None and a[j] < x[0] < a[j + 1] and b[k] < x[1] < b[k + 1]:
                    for w in (ids[u], ids[v]):
                        if w not in cand[x]:
                            cand[x].append(w)
        try:
            structured[c] = find_structuring_points(ids, sorted(cand), cap, point_lines=cand)
        except CapExceeded:
            failed_cells.append(c)
    n4 = len(structured)
    ok4 = at_least(n4, N, e23)
    trace.append({"stage": STAGES[3], "structured_cells": n4, "unstructured_cells": len(failed_cells),
                  "cap": cap, "needed_cells": power_ceil(N, e23),
                  "margin": fmt(Fraction(n4) / power_approx(N, e23)), "passed": ok4})
    if not ok4:
        return fail(STAGES[3])

    pts: dict[Point2, None] = {}
    n_first = 0
    for c in sorted(first):
        for x in first[c]:
            pts[x] = None
            n_first += 1
    n_struct = 0
    for c in sorted(structured):
        if c[0] == 0:
            continue
        for x in structured[c]:
            if x not in pts:
                n_struct += 1
            pts[x] = None
    out = Configuration(tuple(L), tuple(sorted(pts)), N)
    return RecipeOutcome("Success", None, trace, out, n_first, n_struct)


# --- extraction from a configuration ---------------------------------------------

@dataclass
class Extraction:
    map: ProjectiveMap
    params: RecipeParams
    p1: int
    p2: int
    flip: bool
    sector: int
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"map": self.map.to_json(), "params": self.params.to_json(), "p1": self.p1,
                "p2": self.p2, "flip": self.flip, "sector": self.sector, "info": self.info}


def organizing_map(config: Configuration, p1: int, p2: int, flip: bool = False) -> ProjectiveMap:
    """Send p1 to the vertical direction and p2 to the horizontal one (optionally mirroring x)."""
    m = send_to_infinity(config.points[p2], config.points[p1])
    if flip:
        m = ProjectiveMap(((-1, 0, 0), (0, 1, 0), (0, 0, 1))) @ m
    return m


def map_line(m: ProjectiveMap, l: Line) -> Line | None:
    """Image of l, or None when l goes to the line at infinity."""
    try:
        return m.apply_line(l)
    except DegenerateLine:
        return None


def map_point(m: ProjectiveMap, p) -> Point2 | None:
    try:
        return m.apply_point(p)
    except PointAtInfinity:
        return None


def thin(bush: Bush, t: int) -> Bush:
    """Keep every t-th bush line."""
    if t <= 1:
        return bush
    idx = list(range(0, bush.M, t))
    return Bush(bush.center, tuple(bush.lines[i] for i in idx), tuple(bush.keys[i] for i in idx))


def _strip_coords(config: Configuration, m: ProjectiveMap, bush: Bush, vertical: bool) -> list[Fraction]:
    out = []
    for l in bush.lines:
        img = map_line(m, config.lines[l])
        if img is None:
            continue
        if vertical and img.b == 0:
            out.append(-img.c / img.a)
        elif not vertical and img.a == 0:
            out.append(-img.c / img.b)
    return sorted(set(out))


def _pair_score(config: Configuration, J: IncidenceSet, p1: int, p2: int, flip: bool,
                thinning: int) -> tuple | None:
    """(J-incidences inside the finite grid, J-incidences of first-strip lines), or None."""
    m = organizing_map(config, p1, p2, flip)
    b1 = thin(build_bush(config, p1, J), thinning)
    b2 = thin(build_bush(config, p2, J), thinning)
    a = _strip_coords(config, m, b1, True)
    b = _strip_coords(config, m, b2, False)
    if len(a) < 2 or len(b) < 2:
        return None
    inside = 0
    strip_line_pts: dict[int, int] = defaultdict(int)
    for p in range(len(config.points)):
        x = map_point(m, config.points[p])
        if x is None or not (a[0] < x[0] < a[-1] and b[0] < x[1] < b[-1]):
            continue
        if x[0] in a or x[1] in b:
            continue
        ls = J.lines_through(p)
        inside += len(ls)
        if x[0] < a[1]:
            for l in ls:
                strip_line_pts[l] += 1
    strip = sum(n for n in strip_line_pts.values() if n >= 2)
    return (inside, strip), m, a, b


def extract_params(config: Configuration, J: IncidenceSet | None, slack: SlackParams, seed: int = 0,
                   candidates: int = 12, thinning: int = 1, p1: int | None = None,
                   p2: int | None = None) -> Extraction:
    """Recipe parameters read off the double bush of two organizing points.

    Candidate centres come from ``rank_organizing_points``; among ordered
    pairs whose joining line is not a configuration line, and both x
    orientations, the one keeping the most J-incidences inside the finite
    grid (then the most first-strip incidences, then rank order) is used.
    a and b are the exact coordinates of the bush-line images, so every
    double-bush cell not split by the line at infinity is a grid cell. l_s
    are the images of lines with two J-incidences in the first strip.
    ``seed`` only breaks exact ties among equally scored pairs.
    """
    J = J or config.incidences
    ranked = rank_organizing_points(config, J, top=candidates)
    if len(ranked) < 2 and (p1 is None or p2 is None):
        raise DoubleBushFailed("fewer than two points lie on two or more lines")
    pool1 = [p1] if p1 is not None else ranked
    pool2 = [p2] if p2 is not None else ranked
    best = None
    for i1, c1 in enumerate(pool1):
        for i2, c2 in enumerate(pool2):
            if c1 == c2:
                continue
            lpq = line_through(config.points[c1], config.points[c2])
            if lpq in config.line_index:
                continue
            for flip in (False, True):
                try:
                    res = _pair_score(config, J, c1, c2, flip, thinning)
                except Exception:
                    continue
                if res is None:
                    continue
                score, m, a, b = res
                tie = (seed * 7919 + i1 * 31 + i2) % 1009
                key = (score, -i1, -i2, -int(flip), -tie)
                if best is None or key > best[0]:
                    best = (key, c1, c2, flip, m, a, b)
    if best is None:
        raise DoubleBushFailed("no usable pair of organizing points")
    _, c1, c2, flip, m, a, b = best
    # l_s: lines with two J-incidences strictly inside the first strip
    strip_pts: dict[int, int] = defaultdict(int)
    for p in range(len(config.points)):
        x = map_point(m, config.points[p])
        if x is None or not (a[0] < x[0] < a[1]):
            continue
        for l in J.lines_through(p):
            strip_pts[l] += 1
    ls = []
    for l in sorted(strip_pts):
        if strip_pts[l] >= 2:
            img = map_line(m, config.lines[l])
            if img is not None:
                ls.append(img)
    if len(ls) < 1:
        raise DoubleBushFailed("first strip has no structuring lines")
    params = RecipeParams(tuple(a), tuple(b), tuple(ls), config.N)
    b1 = build_bush(config, c1, J)
    return Extraction(m, params, c1, c2, flip, 0,
                      {"M1": b1.M, "M2": build_bush(config, c2, J).M, "score": list(best[0][0]),
                       "thinning": thinning})


@dataclass
class ProtoInverseReport:
    map: ProjectiveMap
    lines: int
    points: int
    incidences: int
    J_incidences: int
    J_size: int
    margins: dict

    @property
    def retention(self) -> Fraction:
        return Fraction(self.J_incidences, self.J_size) if self.J_size else Fraction(0)

    def to_json(self) -> dict:
        return {"map": self.map.to_json(), "lines": self.lines, "points": self.points,
                "incidences": self.incidences, "J_incidences": self.J_incidences, "J_size": self.J_size,
                "retention": fmt(self.retention), "margins": self.margins}


def verify_protoinverse(config: Configuration, m: ProjectiveMap, params: RecipeParams,
                        slack: SlackParams, J: IncidenceSet | None = None,
                        outcome: RecipeOutcome | None = None) -> ProtoInverseReport:
    """Intersect the mapped configuration with the recipe output."""
    J = J or config.incidences
    outcome = outcome or run_recipe(params, slack)
    if not outcome.success:
        raise RecipeFailed(f"recipe failed at {outcome.stage}")
    out = outcome.output
    out_lines = set(out.lines)
    out_pts = set(out.points)
    keep_l = {}
    for i, l in enumerate(config.lines):
        img = map_line(m, l)
        if img is not None and img in out_lines:
            keep_l[i] = img
    keep_p = {}
    for i, p in enumerate(config.points):
        img = map_point(m, p)
        if img is not None and img in out_pts:
            keep_p[i] = img
    inc = sum(1 for l, p in config.incidences.pairs if l in keep_l and p in keep_p)
    jinc = sum(1 for l, p in J.pairs if l in keep_l and p in keep_p)
    N = config.N
    e1 = slack.exp(1, -1)
    e43 = slack.exp(Fraction(4, 3), -1)
    margins = {"lines": fmt(Fraction(len(keep_l)) / power_approx(N, e1)),
               "points": fmt(Fraction(len(keep_p)) / power_approx(N, e1)),
               "incidences": fmt(Fraction(inc) / power_approx(N, e43))}
    return ProtoInverseReport(m, len(keep_l), len(keep_p), inc, jinc, len(J), margins)


def dual_strips_report(config: Configuration, J: IncidenceSet, cells: CellDecomposition,
                       slack: SlackParams, pairs: int = 10, min_cells: int | None = None) -> dict:
    """Strips (lines crossing an organizing line between adjacent J-points) and their intersections."""
    org = organizing_report(config, cells, J, slack, min_cells=min_cells, max_intervals=0)
    lines = [r["line"] for r in org["lines"]]
    N = config.N
    lo, hi = slack.exp(Fraction(2, 3), -1), slack.exp(Fraction(2, 3), 1)
    cap = power_floor(N, slack.exp(Fraction(1, 3), 1))
    point_lines = config.incidences.by_point

    def strips(l):
        from .geometry import dot
        d = config.lines[l].direction
        pts = sorted(J.points_on(l), key=lambda p: dot(config.points[p], d))
        return [set(interval_crossings(config, l, config.points[u], config.points[v]))
                for u, v in zip(pts, pts[1:])]

    hist: dict[int, int] = defaultdict(int)
    in_band = structured = total = 0
    inter_sizes: dict[int, int] = defaultdict(int)
    done = 0
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            if done >= pairs:
                break
            done += 1
            s1, s2 = strips(lines[i]), strips(lines[j])
            for s in s1 + s2:
                total += 1
                hist[len(s).bit_length()] += 1
                if s and at_least(len(s), N, lo) and at_most(len(s), N, hi):
                    in_band += 1
                try:
                    find_structuring_points(sorted(s), list(range(len(config.points))), cap,
                                            point_lines=point_lines)
                    structured += 1
                except CapExceeded:
                    pass
            for u in s1:
                for v in s2:
                    inter_sizes[len(u & v)] += 1
    return {"organizing_lines": len(lines), "pairs": done, "strips": total,
            "strip_size_log2_histogram": {str(k): v for k, v in sorted(hist.items())},
            "strips_in_band": in_band, "strips_structured": structured,
            "intersection_size_histogram": {str(k): v for k, v in sorted(inter_sizes.items())}}
