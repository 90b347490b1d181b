"""Random line samples, their gap audit, and cell decompositions built from them."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .arrangement import Arrangement, Trapezoid
from .configuration import Configuration, IncidenceSet
from .geometry import Line, Point2, dot, meet_point, safe_shear, shear_line, shear_point
from .params import SlackParams, at_least, exceeds, ln_window, power_approx, power_ceil, power_floor


class InvalidRate(ValueError):
    pass


class RichnessPreconditionFailed(ValueError):
    pass


@dataclass(frozen=True)
class Selection:
    """Lines chosen independently with probability rate = r / |lines|."""

    chosen: tuple[int, ...]
    r: int
    rate: Fraction
    seed: int

    def __len__(self):
        return len(self.chosen)

    def to_json(self) -> dict:
        return {"chosen": list(self.chosen), "r": self.r, "rate": str(self.rate), "seed": self.seed}


def sample(config: Configuration, r: int, seed: int) -> Selection:
    n = len(config.lines)
    if not isinstance(r, int) or r < 1 or r > config.N:
        raise InvalidRate(f"need 1 <= r <= N, got r={r}")
    rng = random.Random(seed)
    rate = min(Fraction(r, max(n, 1)), Fraction(1))
    chosen = tuple(i for i in range(n) if rng.randrange(n) < r)
    return Selection(chosen, r, rate, seed)


# --- cell decompositions ----------------------------------------------------

@dataclass
class CellDecomposition:
    """A partition of (most of) the points of a configuration into cells.

    ``boundary`` lists points that belong to no cell. The count tables are
    derived from the incidence set given at construction.
    """

    source: str
    r: int
    cells: dict[Hashable, tuple[int, ...]]
    boundary: tuple[int, ...]
    cell_point_counts: dict[Hashable, int]
    line_cell_counts: dict[int, int]
    cell_line_counts: dict[Hashable, int]
    meta: dict = field(default_factory=dict)

    @property
    def point_cell(self) -> dict[int, Hashable]:
        return {p: c for c, ps in self.cells.items() for p in ps}

    def to_json(self) -> dict:
        return {
            "source": self.source, "r": self.r,
            "cells": {cell_key_str(c): list(ps) for c, ps in self.cells.items()},
            "boundary": list(self.boundary),
            "cell_point_counts": {cell_key_str(c): v for c, v in self.cell_point_counts.items()},
            "line_cell_counts": {str(l): v for l, v in sorted(self.line_cell_counts.items())},
            "cell_line_counts": {cell_key_str(c): v for c, v in self.cell_line_counts.items()},
            "meta": self.meta,
        }


def cell_key_str(c) -> str:
    if isinstance(c, tuple):
        return ",".join(str(x) for x in c)
    return str(c)


def make_decomposition(source: str, r: int, point_cell: dict[int, Hashable], n_points: int,
                       inc: IncidenceSet, meta: dict | None = None) -> CellDecomposition:
    cells: dict[Hashable, list[int]] = {}
    for p in sorted(point_cell):
        cells.setdefault(point_cell[p], []).append(p)
    keys = sorted(cells, key=_sort_key)
    cells_t = {c: tuple(cells[c]) for c in keys}
    boundary = tuple(p for p in range(n_points) if p not in point_cell)
    line_cells: dict[int, set] = {}
    cell_lines: dict[Hashable, set] = {c: set() for c in keys}
    for l, p in inc.pairs:
        c = point_cell.get(p)
        if c is None:
            continue
        line_cells.setdefault(l, set()).add(c)
        cell_lines[c].add(l)
    return CellDecomposition(
        source, r, cells_t, boundary,
        {c: len(v) for c, v in cells_t.items()},
        {l: len(v) for l, v in sorted(line_cells.items())},
        {c: len(cell_lines[c]) for c in keys},
        meta or {})


def _sort_key(c):
    return (0, c) if isinstance(c, int) else (1, tuple(c) if isinstance(c, tuple) else (str(c),))


def restrict_decomposition(dec: CellDecomposition, sub: Configuration, inc: IncidenceSet,
                           source: str | None = None) -> CellDecomposition:
    """Carry a decomposition of a parent configuration over to a point subset of it."""
    if sub.point_origin is None:
        raise ValueError("configuration has no parent mapping")
    parent_cell = dec.point_cell
    pc = {}
    for i, o in enumerate(sub.point_origin):
        if o in parent_cell:
            pc[i] = parent_cell[o]
    return make_decomposition(source or dec.source, dec.r, pc, len(sub.points), inc, dict(dec.meta))


def _shear_if_needed(lines: Sequence[Line]) -> tuple[Fraction, list[Line]]:
    if not any(l.is_vertical for l in lines):
        return Fraction(0), list(lines)
    t = safe_shear(lines)
    return t, [shear_line(l, t) for l in lines]


def provisional_decomposition(config: Configuration, sel: Selection,
                              inc: IncidenceSet | None = None) -> CellDecomposition:
    """Cells are the trapezoids ("funnels") of the arrangement of the chosen lines.

    Points on a chosen line go to the trapezoid just above (see
    ``Arrangement.locate_above``); they are listed in meta["on_chosen_line"].
    When the configuration has vertical lines everything is sheared first.
    """
    inc = inc or config.incidences
    t, all_lines = _shear_if_needed(config.lines)
    pts = [shear_point(p, t) for p in config.points] if t else list(config.points)
    chosen = [all_lines[i] for i in sel.chosen]
    arr = Arrangement(chosen)
    traps = arr.funnels()
    by_face: dict[int, list[int]] = {}
    for k, tr in enumerate(traps):
        by_face.setdefault(tr.face, []).append(k)
    point_cell = {}
    on_line = []
    for i, p in enumerate(pts):
        loc = arr.locate(p)
        if loc.on_boundary:
            on_line.append(i)
        f = arr.locate_above(p)
        point_cell[i] = _trapezoid_for(traps, by_face[f], p)
    slope_form = [(l.slope(), l.y_at(Fraction(0))) for l in all_lines]
    entering = [lines_entering(tr, chosen, slope_form) for tr in traps]
    meta = {"shear": str(t), "trapezoids": len(traps), "on_chosen_line": on_line,
            "lines_entering": entering, "max_lines_entering": max(entering, default=0),
            "chosen": list(sel.chosen)}
    dec = make_decomposition("funnel", sel.r, point_cell, len(pts), inc, meta)
    dec.meta["trapezoid_table"] = [_trap_json(tr) for tr in traps]
    return dec


def _trap_json(tr: Trapezoid) -> dict:
    return {"face": tr.face, "xl": None if tr.xl is None else str(tr.xl),
            "xr": None if tr.xr is None else str(tr.xr), "bottom": tr.bottom, "top": tr.top}


def _trapezoid_for(traps: list[Trapezoid], ids: list[int], p) -> int:
    # the face is already known; pick the x-slice, walls belonging to the slice on their left
    for k in ids:
        tr = traps[k]
        if (tr.xl is None or tr.xl < p[0]) and (tr.xr is None or p[0] <= tr.xr):
            return k
    return ids[-1]


def lines_entering(tr: Trapezoid, chosen: Sequence[Line], slope_form: Sequence[tuple]) -> int:
    """How many lines (given as (slope, intercept)) meet the open trapezoid."""
    bounds = []  # (slope, intercept, +1 line must be above / -1 below)
    if tr.bottom is not None:
        b = chosen[tr.bottom]
        bounds.append((b.slope(), b.y_at(Fraction(0)), 1))
    if tr.top is not None:
        t = chosen[tr.top]
        bounds.append((t.slope(), t.y_at(Fraction(0)), -1))
    count = 0
    for m, c in slope_form:
        lo, hi = tr.xl, tr.xr
        ok = True
        for bm, bc, s in bounds:
            # s * ((m - bm) x + (c - bc)) > 0
            dm, dc = s * (m - bm), s * (c - bc)
            if dm == 0:
                if dc <= 0:
                    ok = False
                    break
                continue
            x0 = -dc / dm
            if dm > 0:
                if lo is None or x0 > lo:
                    lo = x0
            elif hi is None or x0 < hi:
                hi = x0
        if ok and (lo is None or hi is None or lo < hi):
            count += 1
    return count


def _trapezoid_constraints(tr: Trapezoid, lines: Sequence[Line]) -> list[tuple]:
    cons = []
    if tr.xl is not None:
        cons.append((Fraction(1), Fraction(0), -tr.xl))
    if tr.xr is not None:
        cons.append((Fraction(-1), Fraction(0), tr.xr))
    if tr.bottom is not None:  # y above bottom: sign(b) * value > 0
        l = lines[tr.bottom]
        s = 1 if l.b > 0 else -1
        cons.append((s * l.a, s * l.b, s * l.c))
    if tr.top is not None:
        l = lines[tr.top]
        s = -1 if l.b > 0 else 1
        cons.append((s * l.a, s * l.b, s * l.c))
    return cons


def face_decomposition(config: Configuration, sel: Selection,
                       inc: IncidenceSet | None = None) -> tuple[CellDecomposition, Arrangement]:
    """Cells are the faces of the arrangement of the chosen lines (tie rule: face above)."""
    inc = inc or config.incidences
    arr = Arrangement([config.lines[i] for i in sel.chosen])
    point_cell = {}
    on_line = []
    for i, p in enumerate(config.points):
        if arr.locate(p).on_boundary:
            on_line.append(i)
        point_cell[i] = arr.locate_above(p)
    meta = {"faces": len(arr.faces), "on_chosen_line": on_line, "chosen": list(sel.chosen)}
    return make_decomposition("face", sel.r, point_cell, len(config.points), inc, meta), arr


def nice_refine(config: Configuration, sel: Selection, params: SlackParams,
                inc: IncidenceSet | None = None) -> tuple[Configuration, CellDecomposition]:
    """Drop points in faces with more than N^(k*eps) sides.

    Every point must lie on at least N^(1/3 - eps) lines; filter poor points
    first (``filter_rich_points`` with ``richness_floor``).
    """
    inc = inc or config.incidences
    floor = params.exp(Fraction(1, 3), -1)
    for p in range(len(config.points)):
        if not at_least(len(inc.lines_through(p)), config.N, floor):
            raise RichnessPreconditionFailed(f"point {p} lies on only {len(inc.lines_through(p))} lines")
    dec, arr = face_decomposition(config, sel, inc)
    side_cap = params.exp(0, params.k)
    bad = {f for f in range(len(arr.faces)) if exceeds(arr.faces[f].side_count, config.N, side_cap)}
    pc = dec.point_cell
    keep = [p for p in range(len(config.points)) if pc.get(p) not in bad]
    sub = config.subset(point_ids=keep)
    new_dec = restrict_decomposition(dec, sub, sub.incidences, "face")
    new_dec.meta["dropped_faces"] = sorted(bad)
    new_dec.meta["dropped_points"] = len(config.points) - len(keep)
    return sub, new_dec


def richness_floor(N: int, params: SlackParams) -> int:
    """Smallest integer richness that is at least N^(1/3 - eps)."""
    return power_ceil(N, params.exp(Fraction(1, 3), -1))


# --- the gap audit ------------------------------------------------------------

class AuditContext:
    """Per-configuration data shared by audits of many selections."""

    def __init__(self, config: Configuration):
        self.config = config
        self.orders = [_order_along(config.lines, i) for i in range(len(config.lines))]
        self.t = safe_shear(config.lines)
        self.sheared = [shear_line(l, self.t) for l in config.lines]


def _order_along(lines: Sequence[Line], i: int) -> list[int]:
    """Other lines in the order they cross line i; parallels (meeting at infinity) last, by id."""
    l = lines[i]
    d = l.direction
    finite, parallel = [], []
    for j, m in enumerate(lines):
        if j == i:
            continue
        p = meet_point(l, m)
        if p is None:
            parallel.append(j)
        else:
            finite.append((dot(p, d), j))
    finite.sort()
    return [j for _, j in finite] + parallel


def order_along(lines: Sequence[Line], l: Line) -> list[int]:
    """Lines (other than l) in the order they cross l, parallels last."""
    d = l.direction
    finite, parallel = [], []
    for j, m in enumerate(lines):
        if m == l:
            continue
        p = meet_point(l, m)
        if p is None:
            parallel.append(j)
        else:
            finite.append((dot(p, d), j))
    finite.sort()
    return [j for _, j in finite] + parallel


def window_events(order: Sequence[int], chosen: set[int], w: int) -> tuple[int, list[int]]:
    """Check every run of w consecutive lines; returns (runs checked, start indices with no chosen line)."""
    n = len(order)
    if n < w:
        return 0, []
    pref = [0]
    for j in order:
        pref.append(pref[-1] + (j in chosen))
    bad = [s for s in range(n - w + 1) if pref[s + w] == pref[s]]
    return n - w + 1, bad


def gap_audit_along(lines: Sequence[Line], l: Line, chosen: Iterable[int], w: int) -> dict:
    checked, bad = window_events(order_along(lines, l), set(chosen), w)
    return {"window": w, "checked": checked, "violations": len(bad)}


@dataclass
class AuditReport:
    size: dict
    line_events: dict
    vertical_events: dict
    segment_events: dict

    @property
    def ok(self) -> bool:
        return (self.size["within_half_double"] and self.line_events["violations"] == 0
                and self.vertical_events["violations"] == 0 and self.segment_events["violations"] == 0)

    def to_json(self) -> dict:
        return {"ok": self.ok, "size": self.size, "line_events": self.line_events,
                "vertical_events": self.vertical_events, "segment_events": self.segment_events}


def audit(config: Configuration, sel: Selection, params: SlackParams, budget: int = 200,
          seed: int = 0, ctx: AuditContext | None = None) -> AuditReport:
    """Check the sample against the three kinds of gap event.

    Per-line events are exhaustive. Vertical and segment events are sampled
    (``budget`` vertices / vertex pairs, seeded) and say so in the report.
    """
    ctx = ctx or AuditContext(config)
    n = len(config.lines)
    chosen = set(sel.chosen)
    r = sel.r
    size = {"count": len(chosen), "r": r,
            "within_half_double": Fraction(r, 2) <= len(chosen) <= 2 * r,
            "at_most_10r": len(chosen) <= 10 * r}
    w = ln_window(params.C_gap, max(n, 2), r)

    checked = 0
    bad_lines = []
    for i, order in enumerate(ctx.orders):
        c, bad = window_events(order, chosen, w)
        checked += c
        if bad:
            bad_lines.append(i)
    line_events = {"window": w, "checked": checked, "violations": len(bad_lines),
                   "violating_lines": bad_lines[:20], "exhaustive": True}

    rng = random.Random(seed)
    verts = _sample_vertices(config.lines, rng, budget)
    sl = ctx.sheared
    v_checked = v_bad = 0
    for p in verts:
        if n - 1 < w:
            break  # no side of any vertex can hold w lines
        ps = shear_point(p, ctx.t)
        above, below = [], []
        for j, m in enumerate(sl):
            y = m.y_at(ps[0])
            if y > ps[1]:
                above.append((y, j))
            elif y < ps[1]:
                below.append((-y, j))
        for side in (above, below):
            if len(side) < w:
                continue
            side.sort()
            v_checked += 1
            if not any(j in chosen for _, j in side[:w]):
                v_bad += 1
    vertical = {"window": w, "vertices_sampled": len(verts), "checked": v_checked,
                "violations": v_bad, "exhaustive": False}

    s_checked = s_bad = 0
    pairs = 0
    if len(verts) >= 2 and n >= w:
        for _ in range(budget):
            a, b = rng.sample(verts, 2)
            pairs += 1
            crossing = [j for j, m in enumerate(config.lines) if m.side(a) * m.side(b) < 0]
            if len(crossing) < w:
                continue
            s_checked += 1
            if not any(j in chosen for j in crossing):
                s_bad += 1
    segment = {"window": w, "pairs_sampled": pairs, "checked": s_checked, "violations": s_bad,
               "exhaustive": False}
    return AuditReport(size, line_events, vertical, segment)


def _sample_vertices(lines: Sequence[Line], rng: random.Random, budget: int) -> list[Point2]:
    n = len(lines)
    out: dict[Point2, None] = {}
    if n < 2:
        return []
    tries = 0
    while len(out) < budget and tries < 4 * budget:
        tries += 1
        i, j = rng.sample(range(n), 2)
        p = meet_point(lines[i], lines[j])
        if p is not None:
            out[p] = None
    return list(out)


def entering_bound(N: int, r: int, C: Fraction = Fraction(6)) -> Fraction:
    """C * (N / r) * ln N as a rational approximation."""
    import math
    return Fraction(C) * Fraction(N, r) * Fraction(math.log(N)).limit_denominator(10 ** 9)


def line_weighted_margins(config: Configuration, dec: CellDecomposition, params: SlackParams) -> dict:
    """Largest cell and largest line-cell count against N^(1/3 + eps) and N^(1/3 + 2 eps)."""
    N = config.N
    cell_cap = power_approx(N, params.exp(Fraction(1, 3), 1))
    line_cap = power_approx(N, params.exp(Fraction(1, 3), 2))
    mc = max(dec.cell_point_counts.values(), default=0)
    ml = max(dec.line_cell_counts.values(), default=0)
    return {"max_cell_points": mc, "cell_margin": Fraction(mc) / cell_cap,
            "max_line_cells": ml, "line_margin": Fraction(ml) / line_cap,
            "cell_cap_floor": power_floor(N, params.exp(Fraction(1, 3), 1))}
