"""Refinements of a cell decomposition down to a two-sided incidence subset J."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

from .cells import CellDecomposition, cell_key_str, provisional_decomposition, restrict_decomposition, sample
from .configuration import Configuration, IncidenceSet, PartialIncidenceSet
from .geometry import fmt, line_through
from .params import SlackParams, at_least, exceeds, power_approx, power_ceil, power_floor


@dataclass
class Stage:
    name: str
    threshold: str
    incidences_before: int
    incidences_after: int
    removed_points: list[int] = field(default_factory=list)
    removed_lines: list[int] = field(default_factory=list)
    removed_pairs: int = 0
    removed_cells: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "threshold": self.threshold,
                "incidences_before": self.incidences_before, "incidences_after": self.incidences_after,
                "removed_points": self.removed_points, "removed_lines": self.removed_lines,
                "removed_pairs": self.removed_pairs,
                "removed_cells": [cell_key_str(c) for c in self.removed_cells], "notes": self.notes}


@dataclass
class RefinementTrace:
    stages: list[Stage] = field(default_factory=list)

    def add(self, stage: Stage):
        if self.stages and stage.incidences_before > self.stages[-1].incidences_after:
            raise AssertionError("incidence counts must not increase along a trace")
        self.stages.append(stage)

    def to_json(self) -> dict:
        return {"stages": [s.to_json() for s in self.stages]}


def refine1(config: Configuration, cells: CellDecomposition, params: SlackParams,
            inc: IncidenceSet | None = None) -> tuple[Configuration, RefinementTrace]:
    """Remove every point of a cell holding more than N^(1/3 + 10 eps) points."""
    inc = inc or config.incidences
    N = config.N
    e = params.exp(Fraction(1, 3), 10)
    big = [c for c, n in cells.cell_point_counts.items() if exceeds(n, N, e)]
    gone = sorted(p for c in big for p in cells.cells[c])
    gone_set = set(gone)
    sub = config.subset(point_ids=[p for p in range(len(config.points)) if p not in gone_set])
    after = len(sub.incidences)
    trace = RefinementTrace()
    target = power_approx(N, params.exp(Fraction(4, 3), -1))
    trace.add(Stage("refine1", f"N^({fmt(e)})", len(inc), after, removed_points=gone,
                    removed_cells=big,
                    notes={"retained_fraction": fmt(Fraction(after, max(len(inc), 1))),
                           "target_margin": fmt(Fraction(after) / target)}))
    return sub, trace


def refine2(config: Configuration, cells: CellDecomposition, params: SlackParams,
            inc: IncidenceSet | None = None) -> tuple[list[int], RefinementTrace]:
    """Keep the lines that have an incidence in at least r^(1 - 20 eps) cells."""
    inc = inc or config.incidences
    r = cells.r
    e = 1 - 20 * params.epsilon
    keep, gone = [], []
    for l in range(len(config.lines)):
        visits = cells.line_cell_counts.get(l, 0)
        (keep if at_least(visits, r, e) else gone).append(l)
    keep_set = set(keep)
    after = sum(1 for l, _ in inc.pairs if l in keep_set)
    trace = RefinementTrace()
    target = power_approx(config.N, params.exp(Fraction(4, 3), -1))
    trace.add(Stage("refine2", f"r^({fmt(e)})", len(inc), after, removed_lines=gone,
                    notes={"retained_fraction": fmt(Fraction(after, max(len(inc), 1))),
                           "target_margin": fmt(Fraction(after) / target)}))
    return keep, trace


def refine3_preconditions(config: Configuration, cells: CellDecomposition, params: SlackParams,
                          inc: IncidenceSet) -> dict:
    r = cells.r
    lo_ok = at_least(r, config.N, params.exp(Fraction(1, 3), -5))
    hi_ok = 100 * len(config.lines) * r <= len(inc)
    return {"r": r, "lower_ok": lo_ok, "upper_ok": hi_ok, "ok": lo_ok and hi_ok}


def refine3(config: Configuration, cells: CellDecomposition, params: SlackParams,
            inc: IncidenceSet | None = None, lines: Iterable[int] | None = None,
            cell_filter_slack: int | None = None) -> tuple[PartialIncidenceSet, RefinementTrace]:
    """Select J so that every line meets every cell in 0 or between 2 and N^(k eps) J-incidences.

    Removals, in order: (a) incidences at points on more than N^(1/3 + 10 eps)
    lines; (b) (line, cell) pairs with a single incidence; (c) (line, cell)
    pairs with more than N^(k eps) incidences, then cells left with fewer than
    N^(-s*eps)|C|^2 incidences, where s = ``cell_filter_slack`` (default k).

    ``lines`` restricts to a line subset (e.g. the output of refine2).
    """
    inc = inc or config.incidences
    N = config.N
    trace = RefinementTrace()
    pre = refine3_preconditions(config, cells, params, inc)
    allowed = set(range(len(config.lines)) if lines is None else lines)
    pairs = {(l, p) for l, p in inc.pairs if l in allowed}
    if len(pairs) != len(inc):
        trace.add(Stage("line-subset", "given", len(inc), len(pairs),
                        removed_lines=sorted(set(range(len(config.lines))) - allowed)))
    before = len(pairs)

    # (a) rich points
    ea = params.exp(Fraction(1, 3), 10)
    deg: dict[int, int] = defaultdict(int)
    for _, p in pairs:
        deg[p] += 1
    rich = sorted(p for p, d in deg.items() if exceeds(d, N, ea))
    rich_set = set(rich)
    pairs = {(l, p) for l, p in pairs if p not in rich_set}
    trace.add(Stage("rich-points", f"N^({fmt(ea)})", before, len(pairs), removed_points=rich,
                    notes={"preconditions": pre}))

    # (b) single incidences of a line in a cell
    pc = cells.point_cell
    before = len(pairs)
    pairs = {pr for pr in pairs if pr[1] in pc}
    mult = _multiplicities(pairs, pc)
    pairs = {(l, p) for l, p in pairs if mult[(l, pc[p])] >= 2}
    trace.add(Stage("single-incidence", "2", before, len(pairs),
                    removed_pairs=before - len(pairs)))

    # (c) rich lines within a cell, then incidence-poor cells
    before = len(pairs)
    ek = params.exp(0, params.k)
    mult = _multiplicities(pairs, pc)
    hist: dict[int, int] = defaultdict(int)
    for m in mult.values():
        hist[m] += 1
    pairs = {(l, p) for l, p in pairs if not exceeds(mult[(l, pc[p])], N, ek)}
    trace.add(Stage("rich-lines-in-cell", f"N^({fmt(ek)})", before, len(pairs),
                    removed_pairs=before - len(pairs),
                    notes={"multiplicity_histogram": {str(k): v for k, v in sorted(hist.items())}}))

    before = len(pairs)
    per_cell: dict[Hashable, int] = defaultdict(int)
    for _, p in pairs:
        per_cell[pc[p]] += 1
    slack = params.k if cell_filter_slack is None else cell_filter_slack
    ec = -slack * params.epsilon
    poor = []
    for c, n in per_cell.items():
        size = cells.cell_point_counts[c]
        # keep iff n >= N^ec * size^2, i.e. n / size^2 >= N^ec
        if not at_least(Fraction(n, size * size), N, ec):
            poor.append(c)
    poor_set = set(poor)
    pairs = {(l, p) for l, p in pairs if pc[p] not in poor_set}
    trace.add(Stage("incidence-poor-cells", f"N^({fmt(ec)})*|C|^2", before, len(pairs),
                    removed_cells=sorted(poor, key=cell_key_str)))
    J = PartialIncidenceSet(pairs, inc)
    target = power_approx(N, params.exp(Fraction(4, 3), -1))
    trace.stages[-1].notes["J_margin"] = fmt(Fraction(len(J)) / target)
    return J, trace


def _multiplicities(pairs, pc) -> dict:
    mult: dict = defaultdict(int)
    for l, p in pairs:
        mult[(l, pc[p])] += 1
    return mult


def multiplicity_table(J: IncidenceSet, cells: CellDecomposition) -> dict:
    """(line, cell) -> number of J-incidences, for pairs with at least one."""
    return dict(_multiplicities(J.pairs, cells.point_cell))


def multiplicity_cap(N: int, params: SlackParams) -> int:
    return power_ceil(N, params.exp(0, params.k))


@dataclass
class PipelineResult:
    """refine1, refine2 and refine3 chained; J and cells use the original point ids."""

    J: PartialIncidenceSet
    cells: CellDecomposition
    trace: RefinementTrace
    refined: Configuration


def run_pipeline(config: Configuration, r: int, seed: int, params: SlackParams,
                 cell_filter_slack: int | None = None) -> PipelineResult:
    inc = config.incidences
    dec = provisional_decomposition(config, sample(config, r, seed), inc)
    sub, tr1 = refine1(config, dec, params, inc)
    dec1 = restrict_decomposition(dec, sub, sub.incidences)
    keep, tr2 = refine2(sub, dec1, params)
    J_sub, tr3 = refine3(sub, dec1, params, lines=keep, cell_filter_slack=cell_filter_slack)
    trace = RefinementTrace()
    for st in tr1.stages + tr2.stages:
        trace.add(st)
    for st in tr3.stages:
        if st.name != "line-subset":  # already recorded by refine2
            trace.add(st)
    origin = sub.point_origin
    J = PartialIncidenceSet(((l, origin[p]) for l, p in J_sub.pairs), inc)
    # dropped points sat in dropped cells, so the parent decomposition serves J as is
    return PipelineResult(J, dec, trace, sub)


# --- structuring points -------------------------------------------------------

class CapExceeded(Exception):
    """The greedy cover needed more than ``cap`` points or could not cover some line.

    This says nothing about whether a structuring set exists.
    """

    def __init__(self, msg, chosen, uncovered):
        super().__init__(msg)
        self.chosen = chosen
        self.uncovered = uncovered


def find_structuring_points(lines: Sequence[Hashable], candidates: Sequence[Hashable], cap: int,
                            incident: Callable[[Hashable, Hashable], bool] | None = None,
                            point_lines: dict | None = None) -> list:
    """Greedily pick candidates until every line holds at least two picked points.

    Incidence comes either from ``point_lines`` (candidate -> lines through it)
    or from the predicate ``incident(line, point)``. Ties go to the earlier
    candidate.
    """
    line_set = set(lines)
    if point_lines is None:
        if incident is None:
            raise ValueError("need incident or point_lines")
        point_lines = {c: [l for l in lines if incident(l, c)] for c in candidates}
    through = {c: [l for l in point_lines.get(c, ()) if l in line_set] for c in candidates}
    avail: dict[Hashable, int] = defaultdict(int)
    for c in candidates:
        for l in through[c]:
            avail[l] += 1
    short = [l for l in lines if avail[l] < 2]
    if short:
        raise CapExceeded("some line has fewer than two candidate points", [], short)
    need = {l: 2 for l in lines}
    chosen: list = []
    used = set()
    remaining = len(line_set)
    order = list(candidates)
    while remaining:
        if len(chosen) >= cap:
            raise CapExceeded("cap reached", chosen, [l for l in lines if need[l] > 0])
        best, best_score = None, 0
        for c in order:
            if c in used:
                continue
            s = sum(1 for l in through[c] if need[l] > 0)
            if s > best_score:
                best, best_score = c, s
        if best is None:
            raise CapExceeded("no candidate helps", chosen, [l for l in lines if need[l] > 0])
        used.add(best)
        chosen.append(best)
        for l in through[best]:
            if need[l] > 0:
                need[l] -= 1
                if need[l] == 0:
                    remaining -= 1
    return chosen


def structures(lines: Iterable, points: Iterable, point_lines: dict) -> bool:
    """Whether every line holds at least two of the points."""
    cnt: dict = defaultdict(int)
    for p in points:
        for l in point_lines.get(p, ()):
            cnt[l] += 1
    return all(cnt[l] >= 2 for l in lines)


@dataclass
class StructuredCell:
    cell: Hashable
    members: tuple[int, ...]
    lines: tuple[int, ...]
    structuring: tuple[int, ...] | None
    density: Fraction

    @property
    def structured(self) -> bool:
        return self.structuring is not None

    def to_json(self) -> dict:
        return {"cell": cell_key_str(self.cell), "size": len(self.members), "lines": list(self.lines),
                "structuring": None if self.structuring is None else list(self.structuring),
                "density": fmt(self.density)}


def structured_cells(config: Configuration, cells: CellDecomposition, J: IncidenceSet,
                     params: SlackParams) -> list[StructuredCell]:
    """Cells with at least one line holding two J-incidences, with their structuring points."""
    pc = cells.point_cell
    by_cell: dict[Hashable, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
    for l, p in J.pairs:
        if p in pc:
            by_cell[pc[p]][l].append(p)
    cap = power_floor(config.N, params.exp(Fraction(1, 3), 1))
    out = []
    for c in sorted(by_cell, key=cell_key_str):
        Lc = sorted(l for l, ps in by_cell[c].items() if len(ps) >= 2)
        if not Lc:
            continue
        members = cells.cells[c]
        point_lines: dict[int, list[int]] = defaultdict(list)
        for l in Lc:
            for p in by_cell[c][l]:
                point_lines[p].append(l)
        try:
            sp = tuple(find_structuring_points(Lc, list(members), cap, point_lines=point_lines))
        except CapExceeded:
            sp = None
        out.append(StructuredCell(c, members, tuple(Lc), sp,
                                  Fraction(len(Lc), max(distinct_lines(config, members), 1))))
    return out


def distinct_lines(config: Configuration, members: Sequence[int]) -> int:
    """Number of distinct lines through two of the given points."""
    seen = set()
    pts = [config.points[i] for i in members]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            seen.add(line_through(pts[i], pts[j]))
    return len(seen)


def structured_sets(config: Configuration, cells: CellDecomposition, J: IncidenceSet,
                    params: SlackParams) -> dict:
    """Summary of structured cells: how many qualify, how many the greedy cover structures."""
    sc = structured_cells(config, cells, J, params)
    r = max(cells.r, 1)
    target = power_approx(r, 2 - params.epsilon)
    return {"qualifying": len(sc), "structured": sum(1 for s in sc if s.structured),
            "target_margin": fmt(Fraction(len(sc)) / target),
            "cells": [s.to_json() for s in sc]}
