"""Bushes (all lines through a point), their sectors, and statistics built on them."""

from __future__ import annotations

import random
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable

from .arrangement import Arrangement
from .cells import CellDecomposition, gap_audit_along, make_decomposition
from .configuration import Configuration, IncidenceSet
from .geometry import Line, Point2, dot, fmt, meet_point
from .params import (SlackParams, at_least, epsilon_bracket, exceeds, ln_window, power_approx,
                     power_ceil, power_floor)
from .refinement import CapExceeded, find_structuring_points


class TooFewBushLines(ValueError):
    pass


def slope_key(v) -> tuple[int, Fraction]:
    """Direction of a vector modulo sign: finite slopes by value, vertical last."""
    if v[0] == 0:
        return (1, Fraction(0))
    return (0, Fraction(v[1]) / v[0])


def line_key(l: Line) -> tuple[int, Fraction]:
    return slope_key(l.direction)


def bush_points(config: Configuration, p: int, inc: IncidenceSet | None = None) -> list[int]:
    """Points on some line through point p (p itself included when it is on a line)."""
    inc = inc or config.incidences
    out = set()
    for l in inc.lines_through(p):
        out.update(inc.points_on(l))
    return sorted(out)


@dataclass(frozen=True)
class Bush:
    center: int
    lines: tuple[int, ...]
    keys: tuple[tuple[int, Fraction], ...]

    @property
    def M(self) -> int:
        return len(self.lines)

    def to_json(self) -> dict:
        return {"center": self.center, "lines": list(self.lines), "M": self.M}


def build_bush(config: Configuration, p: int, J: IncidenceSet | None = None) -> Bush:
    """Lines of J through p ordered by slope, vertical last."""
    J = J or config.incidences
    ls = sorted(J.lines_through(p), key=lambda l: (line_key(config.lines[l]), l))
    if len(ls) < 2:
        raise TooFewBushLines(f"point {p} has {len(ls)} lines")
    return Bush(p, tuple(ls), tuple(line_key(config.lines[l]) for l in ls))


def bush_size_margins(config: Configuration, bush: Bush, params: SlackParams) -> dict:
    N = config.N
    return {"M": bush.M,
            "at_least_lower": at_least(bush.M, N, params.exp(Fraction(1, 3), -1)),
            "at_most_upper": not exceeds(bush.M, N, params.exp(Fraction(1, 3), 1))}


def sector_of(center: Point2, bush: Bush, q) -> int | None:
    """Index j of the double wedge between bush lines j and j+1 containing q, None on a bush line."""
    v = (q[0] - center[0], q[1] - center[1])
    if v[0] == 0 and v[1] == 0:
        return None
    k = slope_key(v)
    pos = bisect_left(bush.keys, k)
    if pos < bush.M and bush.keys[pos] == k:
        return None
    return pos - 1 if pos >= 1 else bush.M - 1


@dataclass
class Sector:
    index: int
    bounding: tuple[int, int]
    members: tuple[int, ...]
    structuring: tuple[int, ...]
    incidences: int
    cap: int
    over_cap: bool

    def to_json(self) -> dict:
        return {"index": self.index, "bounding": list(self.bounding), "members": list(self.members),
                "structuring": list(self.structuring), "incidences": self.incidences,
                "cap": self.cap, "over_cap": self.over_cap}


def sectors(config: Configuration, bush: Bush, J: IncidenceSet | None = None,
            params: SlackParams | None = None) -> tuple[list[Sector], list[int]]:
    """Sectors of the bush with their member points; also returns the on-boundary points."""
    J = J or config.incidences
    params = params or SlackParams()
    c = config.points[bush.center]
    members: list[list[int]] = [[] for _ in range(bush.M)]
    boundary = []
    for i, q in enumerate(config.points):
        j = sector_of(c, bush, q)
        if j is None:
            boundary.append(i)
        else:
            members[j].append(i)
    cap = power_floor(config.N, params.exp(Fraction(1, 3), 1))
    out = []
    for j in range(bush.M):
        cnt: dict[int, int] = defaultdict(int)
        for p in members[j]:
            for l in J.lines_through(p):
                cnt[l] += 1
        st = tuple(sorted((l for l, n in cnt.items() if n >= 2), key=lambda l: (-cnt[l], l)))
        out.append(Sector(j, (bush.lines[j], bush.lines[(j + 1) % bush.M]), tuple(members[j]), st,
                          sum(cnt.values()), cap, len(st) > cap))
    return out, boundary


class MeetTable:
    """All pairwise meets of the configuration lines, bucketed by sector of one bush."""

    def __init__(self, config: Configuration, bush: Bush):
        c = config.points[bush.center]
        self.per_line: list[dict[int, int]] = [defaultdict(int) for _ in config.lines]
        self.per_sector = [0] * bush.M
        lines = config.lines
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                x = meet_point(lines[i], lines[j])
                if x is None:
                    continue
                s = sector_of(c, bush, x)
                if s is None:
                    continue
                self.per_line[i][s] += 1
                self.per_line[j][s] += 1
                self.per_sector[s] += 1


def crossings_in_sector(config: Configuration, bush: Bush, j: int, l: int) -> int:
    """Configuration lines meeting line l strictly inside sector j (direct evaluation)."""
    c = config.points[bush.center]
    n = 0
    for i, m in enumerate(config.lines):
        if i == l:
            continue
        x = meet_point(config.lines[l], m)
        if x is not None and sector_of(c, bush, x) == j:
            n += 1
    return n


@dataclass
class FastSlowTable:
    sector: int
    counts: dict[int, int]
    alpha: dict[int, Fraction | None]
    slow: dict[int, bool]
    incidences: dict[int, int] = field(default_factory=dict)

    def fast_share(self) -> Fraction:
        tot = sum(self.incidences.values())
        fast = sum(n for l, n in self.incidences.items() if not self.slow[l])
        return Fraction(fast, tot) if tot else Fraction(0)

    def to_json(self) -> dict:
        return {"sector": self.sector,
                "lines": [{"line": l, "crossings": self.counts[l],
                           "alpha": None if self.alpha[l] is None else fmt(self.alpha[l]),
                           "slow": self.slow[l], "incidences": self.incidences.get(l, 0)}
                          for l in sorted(self.counts)],
                "fast_share": fmt(self.fast_share())}


def classify_fast_slow(config: Configuration, bush: Bush, sector: Sector, params: SlackParams,
                       J: IncidenceSet | None = None, table: MeetTable | None = None) -> FastSlowTable:
    """Crossings inside the sector for each line with a J-incidence there; alpha on the eps grid.

    alpha = j*eps where N^(2/3 + j eps) <= crossings < N^(2/3 + (j+1) eps); a
    line is slow when crossings <= N^(2/3 + k2 eps).
    """
    J = J or config.incidences
    N = config.N
    inc_in: dict[int, int] = defaultdict(int)
    for p in sector.members:
        for l in J.lines_through(p):
            inc_in[l] += 1
    counts, alpha, slow = {}, {}, {}
    base = Fraction(2, 3)
    for l in sorted(inc_in):
        n = table.per_line[l].get(sector.index, 0) if table else crossings_in_sector(config, bush, sector.index, l)
        counts[l] = n
        j = epsilon_bracket(n, N, base, params.epsilon)
        alpha[l] = None if j is None else j * params.epsilon
        slow[l] = not exceeds(n, N, params.exp(base, params.k2))
    return FastSlowTable(sector.index, counts, alpha, slow, dict(inc_in))


def bush_cells(config: Configuration, p: int, K: int, seed: int, params: SlackParams,
               J: IncidenceSet | None = None) -> CellDecomposition:
    """Cells of the projective arrangement of the bush lines plus K random other lines."""
    J = J or config.incidences
    bush = build_bush(config, p, J)
    rng = random.Random(seed)
    others = [l for l in range(len(config.lines)) if l not in set(bush.lines)]
    rand = sorted(rng.sample(others, min(K, len(others))))
    ids = list(bush.lines) + rand
    arr = Arrangement([config.lines[i] for i in ids])
    proj = arr.projective_faces()
    c = config.points[bush.center]
    pc = {}
    for i, q in enumerate(config.points):
        if sector_of(c, bush, q) is None:
            continue
        pc[i] = proj[arr.locate_above(q)]
    secs, _ = sectors(config, bush, J, params)
    N = config.N
    dec = make_decomposition("bush", max(K, 1), pc, len(config.points), J)
    # every cell inside one sector
    cell_sector = {}
    for cell, pts in dec.cells.items():
        ss = {sector_of(c, bush, config.points[i]) for i in pts}
        cell_sector[cell] = sorted(ss)
    cap_cell = power_approx(N, params.exp(Fraction(1, 3), 1))
    per_line_cap = power_ceil(N, params.epsilon)
    worst_line_cell = 0
    audits = []
    w = ln_window(params.C_gap, max(len(config.lines), 2), max(K, 1))
    for s in secs:
        for l in s.structuring:
            per_cell: dict[Hashable, int] = defaultdict(int)
            for q in J.points_on(l):
                if q in pc and q in set(s.members):
                    per_cell[pc[q]] += 1
            worst_line_cell = max([worst_line_cell, *per_cell.values()])
            audits.append(gap_audit_along(config.lines, config.lines[l], rand, w))
    dec.meta.update({
        "bush": bush.to_json(), "random_lines": rand,
        "cells_in_one_sector": all(len(v) == 1 for v in cell_sector.values()),
        "max_cell_points": max(dec.cell_point_counts.values(), default=0),
        "cell_margin": fmt(Fraction(max(dec.cell_point_counts.values(), default=0)) / cap_cell),
        "max_points_per_structuring_line_cell": worst_line_cell,
        "per_line_cap": per_line_cap,
        "gap_audit": {"window": w, "lines": len(audits),
                      "checked": sum(a["checked"] for a in audits),
                      "violations": sum(a["violations"] for a in audits)},
    })
    return dec


def sector_report(config: Configuration, p: int, params: SlackParams, seed: int = 0,
                  J: IncidenceSet | None = None, K: int | None = None) -> dict:
    """Per sector: J-incidences, the share from lines taking few member points, crossing filter."""
    J = J or config.incidences
    N = config.N
    bush = build_bush(config, p, J)
    secs, boundary = sectors(config, bush, J, params)
    table = MeetTable(config, bush)
    K = power_ceil(N, Fraction(1, 3)) if K is None else K
    dec = bush_cells(config, p, K, seed, params, J)
    c = config.points[bush.center]
    cells_per_sector: dict[int, int] = defaultdict(int)
    for cell, pts in dec.cells.items():
        cells_per_sector[sector_of(c, bush, config.points[pts[0]])] += 1
    ek = params.exp(0, params.k)
    ecross = params.exp(Fraction(5, 3), params.k1)
    ecells = params.exp(Fraction(1, 3), params.k1)
    rows = []
    for s in secs:
        taken: dict[int, int] = defaultdict(int)
        for q in s.members:
            for l in J.lines_through(q):
                taken[l] += 1
        total = sum(taken.values())
        light = sum(n for l, n in taken.items() if not at_least(n, N, ek))
        crossings = table.per_sector[s.index]
        flagged = exceeds(crossings, N, ecross) or exceeds(cells_per_sector[s.index], N, ecells)
        rows.append({"sector": s.index, "members": len(s.members), "incidences": total,
                     "light_share": fmt(Fraction(light, total)) if total else None,
                     "crossings": crossings, "cells": cells_per_sector[s.index], "dropped": flagged})
    kept = [r for r in rows if not r["dropped"] and r["light_share"] is not None]
    high = sum(1 for r in kept if Fraction(r["light_share"]) >= Fraction(9, 10))
    return {"bush": bush.to_json(), "boundary_points": len(boundary), "sectors": rows,
            "sectors_kept": len(kept), "sectors_with_share_at_least_0.9": high}


def double_bush(config: Configuration, p1: int, p2: int, J: IncidenceSet | None,
                params: SlackParams) -> CellDecomposition:
    """Cells (j, k): sector j of the bush at p1 and sector k of the bush at p2."""
    J = J or config.incidences
    b1, b2 = build_bush(config, p1, J), build_bush(config, p2, J)
    c1, c2 = config.points[p1], config.points[p2]
    pc = {}
    for i, q in enumerate(config.points):
        j, k = sector_of(c1, b1, q), sector_of(c2, b2, q)
        if j is not None and k is not None:
            pc[i] = (j, k)
    dec = make_decomposition("double-bush", max(b1.M, b2.M), pc, len(config.points), J)
    N = config.N
    lines_per_sector: dict[int, set] = defaultdict(set)
    for (j, _), pts in dec.cells.items():
        for q in pts:
            lines_per_sector[j].update(J.lines_through(q))
    cap = power_approx(N, params.exp(Fraction(1, 3), 1))
    mx = max(dec.cell_point_counts.values(), default=0)
    target = power_approx(N, 1 - params.epsilon)
    dec.meta.update({
        "bushes": [b1.to_json(), b2.to_json()],
        "max_cell_points": mx, "cell_margin": fmt(Fraction(mx) / cap),
        "lines_per_p1_sector": {str(j): len(v) for j, v in sorted(lines_per_sector.items())},
        "lines_per_p1_sector_margin": {str(j): fmt(Fraction(len(v)) / target)
                                       for j, v in sorted(lines_per_sector.items())},
    })
    return dec


def rank_organizing_points(config: Configuration, J: IncidenceSet | None = None, top: int = 10) -> list[int]:
    """Candidate centres by (richness descending, sector imbalance ascending, id)."""
    J = J or config.incidences
    rich = sorted(range(len(config.points)), key=lambda p: (-len(J.lines_through(p)), p))
    rich = [p for p in rich if len(J.lines_through(p)) >= 2][:top]
    scored = []
    for p in rich:
        b = build_bush(config, p, J)
        c = config.points[p]
        cnt = [0] * b.M
        for q in config.points:
            j = sector_of(c, b, q)
            if j is not None:
                cnt[j] += 1
        scored.append(((-b.M, max(cnt) - min(cnt), p), p))
    return [p for _, p in sorted(scored)]


def _cell_line_sets(cells: CellDecomposition, J: IncidenceSet) -> dict[Hashable, set[int]]:
    pc = cells.point_cell
    cnt: dict[tuple, int] = defaultdict(int)
    for l, p in J.pairs:
        if p in pc:
            cnt[(l, pc[p])] += 1
    out: dict[Hashable, set[int]] = defaultdict(set)
    for (l, c), n in cnt.items():
        if n >= 2:
            out[c].add(l)
    return out


def mixing_stats(config: Configuration, cells: CellDecomposition, J: IncidenceSet,
                 params: SlackParams, budget: int = 10_000, seed: int = 0) -> dict:
    """Shared two-incidence lines between pairs of cells (sampled unless few pairs exist)."""
    keys = list(cells.cells)
    sets = _cell_line_sets(cells, J)
    n = len(keys)
    total = n * (n - 1) // 2
    pairs: Iterable[tuple[int, int]]
    if total <= budget:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        exhaustive = True
    else:
        rng = random.Random(seed)
        pairs = []
        for _ in range(budget):
            i, j = rng.sample(range(n), 2)
            pairs.append((min(i, j), max(i, j)))
        exhaustive = False
    hist: dict[int, int] = defaultdict(int)
    meeting = 0
    N = config.N
    e = params.exp(Fraction(1, 3), -1)
    sampled = 0
    for i, j in pairs:
        s = len(sets.get(keys[i], set()) & sets.get(keys[j], set()))
        hist[s] += 1
        sampled += 1
        if s > 0 and at_least(s, N, e):
            meeting += 1
    target = power_approx(N, params.exp(Fraction(4, 3), -1)) / total if total else None
    return {"cells": n, "total_pairs": total, "sampled_pairs": sampled, "exhaustive": exhaustive,
            "histogram": {str(k): v for k, v in sorted(hist.items())},
            "meeting_fraction": fmt(Fraction(meeting, sampled)) if sampled else None,
            "target_fraction": fmt(target) if target is not None else None}


def interval_crossings(config: Configuration, l: int, a: Point2, b: Point2) -> list[int]:
    """Configuration lines meeting line l strictly between points a and b of l."""
    line = config.lines[l]
    d = line.direction
    ta, tb = sorted((dot(a, d), dot(b, d)))
    out = []
    for i, m in enumerate(config.lines):
        if i == l:
            continue
        x = meet_point(line, m)
        if x is not None and ta < dot(x, d) < tb:
            out.append(i)
    return out


def organizing_report(config: Configuration, cells: CellDecomposition, J: IncidenceSet,
                      params: SlackParams, min_cells: int | None = None,
                      max_intervals: int | None = 200) -> dict:
    """Lines with two J-incidences in many cells, with crossing data on their incidence gaps."""
    N = config.N
    sets = _cell_line_sets(cells, J)
    per_line: dict[int, int] = defaultdict(int)
    for c, ls in sets.items():
        for l in ls:
            per_line[l] += 1
    need = power_ceil(N, params.exp(Fraction(1, 3), -1)) if min_cells is None else min_cells
    org = sorted(l for l, n in per_line.items() if n >= need)
    cap = power_floor(N, params.exp(Fraction(1, 3), 1))
    pl = {p: ls for p, ls in config.incidences.by_point.items()}
    rows = []
    done = 0
    thr = params.exp(Fraction(2, 3), -1)
    for l in org:
        d = config.lines[l].direction
        pts = sorted(J.points_on(l), key=lambda p: dot(config.points[p], d))
        ivs = []
        for a, b in zip(pts, pts[1:]):
            if max_intervals is not None and done >= max_intervals:
                break
            done += 1
            cr = interval_crossings(config, l, config.points[a], config.points[b])
            try:
                find_structuring_points(cr, list(range(len(config.points))), cap, point_lines=pl)
                ok = True
            except CapExceeded:
                ok = False
            ivs.append({"from": a, "to": b, "crossings": len(cr),
                        "at_least_target": len(cr) > 0 and at_least(len(cr), N, thr),
                        "structured": ok})
        rows.append({"line": l, "cells": per_line[l], "intervals": ivs})
    return {"threshold_cells": need, "organizing_lines": len(org),
            "margin": fmt(Fraction(len(org)) / power_approx(N, 1 - params.epsilon)),
            "lines": rows}
