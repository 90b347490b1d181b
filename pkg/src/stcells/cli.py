"""Command-line entry point: ``stcells <group> <action> [input] [options]``.

Exit codes: 0 success, 1 input or usage error, 2 a stage of the requested
construction failed (the report is still written).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import bush as bushmod
from . import circles as circ
from . import io
from . import svg
from .arrangement import Arrangement, complexity_histogram
from .cells import (AuditContext, audit, face_decomposition, line_weighted_margins, nice_refine, richness_floor,
                    provisional_decomposition, sample)
from .configuration import (Configuration, IncidenceSet, filter_rich_points, generate_grid, generate_random,
                            richness, st_bound, st_margin)
from .crossings import (SegmentGraph, consecutive_union, convex_position_graph, count_crossings,
                        crossing_lb_margin, crossings_in_region, zone_sequence)
from .geometry import Point2, q
from .params import DESCRIPTIONS, InvalidParams, SlackParams, power_ceil
from .recipe import (DoubleBushFailed, InvalidRecipeParams, RecipeFailed, RecipeParams, dual_strips_report,
                     extract_params, run_recipe, verify_protoinverse)
from .refinement import (multiplicity_cap, multiplicity_table, refine1, refine2, refine3, run_pipeline,
                         structured_sets)


class InputError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class Result:
    report: Any
    schema: str = "report.json"
    failed: bool = False
    table: tuple[list[str], list[list]] | None = None
    text: str | None = None  # emitted as-is (SVG)
    bare: bool = False  # report is a file format of its own; manifest goes in a "manifest" key
    inputs: list[str] = field(default_factory=list)


# --- loading ----------------------------------------------------------------------

def load_config(path: str, args) -> Configuration:
    d = io.read_json(path)
    d.pop("manifest", None)
    c = Configuration.from_json(d)
    if args.n is not None:
        c = Configuration(c.lines, c.points, args.n)
    return c


def load_circles(path: str, args) -> circ.CircleConfig:
    d = io.read_json(path)
    d.pop("manifest", None)
    try:
        c = circ.CircleConfig.from_json(d)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InputError(f"malformed circle configuration: {e}") from e
    if args.n is not None:
        c = circ.CircleConfig(c.points, args.n)
    return c


def default_r(config: Configuration, args) -> int:
    return args.r if args.r is not None else power_ceil(config.N, Fraction(1, 3))


def pick_J(config: Configuration, args, params: SlackParams) -> IncidenceSet:
    """All incidences, or the J of the sample-and-refine pipeline."""
    if getattr(args, "J", "all") == "all":
        return config.incidences
    return run_pipeline(config, default_r(config, args), args.seed, params).J


def point_arg(config: Configuration, v: str | None, what: str) -> int:
    if v is None:
        raise InputError(f"--{what} is required")
    try:
        i = int(v)
    except ValueError:
        raise InputError(f"--{what} must be a point index") from None
    if not 0 <= i < len(config.points):
        raise InputError(f"--{what} {i} is out of range (0..{len(config.points) - 1})")
    return i


# --- handlers ---------------------------------------------------------------------

def h_generate(args, params) -> Result:
    if args.action == "grid":
        c = generate_grid(args.k)
    elif args.action == "random":
        c = generate_random(args.lines, args.points, args.seed, args.coord_range)
    else:
        cc = circ.grid_points(args.k)
        return Result(cc.to_json(), "circle_config.json", bare=True,
                      table=(["point_id", "x", "y"], [[i, *p.to_json()] for i, p in enumerate(cc.points)]))
    if args.n is not None:
        c = Configuration(c.lines, c.points, args.n)
    return Result(c.to_json(), "configuration.json", bare=True,
                  table=(["kind", "id", "a", "b", "c"],
                         [["point", i, *p.to_json(), ""] for i, p in enumerate(c.points)]
                         + [["line", i, *l.to_json()] for i, l in enumerate(c.lines)]))


def h_incidence(args, params) -> Result:
    c = load_config(args.input, args)
    inc = c.incidences
    if args.action == "count":
        rep = {"incidences": len(inc), "lines": len(c.lines), "points": len(c.points), "N": c.N}
        return Result(rep, "incidence_count.json", table=(["incidences"], [[len(inc)]]))
    if args.action == "richness":
        rp = richness(c, inc)
        rows = [["point", i, n] for i, n in enumerate(rp.point_counts)] + \
               [["line", i, n] for i, n in enumerate(rp.line_counts)]
        return Result(rp.to_json(), "richness.json", table=(["kind", "id", "count"], rows))
    m = st_margin(c, inc, params)
    rep = {"incidences": len(inc), "bound": st_bound(len(c.lines), len(c.points), params), "margin": m,
           "within_bound": m <= 1}
    return Result(rep, "st_margin.json")


def _arrangement_lines(c: Configuration, args) -> tuple[list[int], Arrangement]:
    if args.r is not None:
        ids = list(sample(c, args.r, args.seed).chosen)
    else:
        ids = list(range(len(c.lines)))
    return ids, Arrangement([c.lines[i] for i in ids])


def h_arrange(args, params) -> Result:
    c = load_config(args.input, args)
    ids, arr = _arrangement_lines(c, args)
    if args.action == "build":
        V, E, F = arr.counts
        rep = {"lines": ids, "vertices": V, "edges": E, "faces": F, "euler_ok": arr.euler_ok(),
               "bounded_faces": sum(1 for f in arr.faces if f.bounded),
               "face_sides": [f.side_count for f in arr.faces]}
        return Result(rep, "arrangement.json",
                      table=(["face", "sides", "bounded"],
                             [[f.id, f.side_count, f.bounded] for f in arr.faces]))
    if args.action == "zone":
        if args.line is None:
            raise InputError("--line is required for zone")
        l = c.lines[args.line]
        if args.line in ids:
            raise InputError("the zone line must not belong to the arrangement (use --r to sample)")
        faces = arr.zone(l)
        seq, ts, _ = zone_sequence(arr, l)
        rep = {"line": args.line, "zone": faces, "sequence": seq, "crossings": ts,
               "complexity": sum(arr.faces[f].side_count for f in faces)}
        return Result(rep, table=(["face", "sides"], [[f, arr.faces[f].side_count] for f in faces]))
    if args.action == "funnels":
        traps = arr.funnels()
        rows = [[k, t.face, t.xl, t.xr, t.bottom, t.top, t.side_count(arr.lines)] for k, t in enumerate(traps)]
        rep = {"trapezoids": [dict(zip(["id", "face", "xl", "xr", "bottom", "top", "sides"], r)) for r in rows],
               "max_sides": max((r[-1] for r in rows), default=0)}
        return Result(rep, table=(["id", "face", "xl", "xr", "bottom", "top", "sides"], rows))
    hist = complexity_histogram(arr)
    return Result({"histogram": hist}, table=(["s", "count", "bound", "margin"],
                                              [[h["s"], h["count"], h["bound"], h["margin"]] for h in hist]))


def h_cells(args, params) -> Result:
    c = load_config(args.input, args)
    r = default_r(c, args)
    sel = sample(c, r, args.seed)
    if args.action == "sample":
        rep = sel.to_json()
        rep["count"] = len(sel)
        return Result(rep, "selection.json", table=(["line_id"], [[i] for i in sel.chosen]))
    if args.action == "audit":
        rep = audit(c, sel, params, budget=args.budget, seed=args.seed, ctx=AuditContext(c))
        return Result(rep.to_json(), "audit.json")
    if args.action == "decompose":
        dec = provisional_decomposition(c, sel) if args.kind == "funnel" else face_decomposition(c, sel)[0]
        rep = dec.to_json()
        rep["margins"] = line_weighted_margins(c, dec, params)
        return Result(rep, "decomposition.json", table=_cell_table(dec))
    rich = filter_rich_points(c, None, richness_floor(c.N, params))
    sub, dec = nice_refine(rich.config, sel, params, rich.incidences)
    rep = {"configuration": sub.to_json(), "decomposition": dec.to_json(),
           "poor_points_removed": len(rich.removed_points)}
    return Result(rep, table=_cell_table(dec))


def _cell_table(dec):
    from .cells import cell_key_str
    return (["cell", "points", "lines"],
            [[cell_key_str(k), dec.cell_point_counts[k], dec.cell_line_counts[k]] for k in dec.cells])


def h_refine(args, params) -> Result:
    c = load_config(args.input, args)
    r = default_r(c, args)
    if args.action == "structured":
        pipe = run_pipeline(c, r, args.seed, params, args.cell_filter_slack)
        rep = structured_sets(c, pipe.cells, pipe.J, params)
        rep["trace"] = pipe.trace.to_json()
        return Result(rep, table=(["cell", "size", "lines", "structuring", "density"],
                                  [[s["cell"], s["size"], len(s["lines"]),
                                    "" if s["structuring"] is None else len(s["structuring"]), s["density"]]
                                   for s in rep["cells"]]))
    dec = provisional_decomposition(c, sample(c, r, args.seed))
    if args.action == "r1":
        sub, tr = refine1(c, dec, params)
        return Result({"trace": tr.to_json(), "points_kept": len(sub.points)}, "trace.json")
    if args.action == "r2":
        keep, tr = refine2(c, dec, params)
        return Result({"trace": tr.to_json(), "lines_kept": keep}, "trace.json")
    J, tr = refine3(c, dec, params, cell_filter_slack=args.cell_filter_slack)
    mult = multiplicity_table(J, dec)
    return Result({"trace": tr.to_json(), "J": J.to_json(), "J_size": len(J),
                   "multiplicity_cap": multiplicity_cap(c.N, params),
                   "multiplicities": {f"{l}|{k}": v for (l, k), v in sorted(
                       ((l, str(k)), v) for (l, k), v in mult.items())}}, "trace.json")


def load_graph(path: str) -> SegmentGraph:
    d = io.read_json(path)
    try:
        verts = {int(k): Point2(q(x), q(y)) for k, (x, y) in d["vertices"].items()}
        edges = [(int(u), int(v), int(l)) for u, v, l in d["edges"]]
        return SegmentGraph(verts, edges)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise InputError(f"malformed graph: {e}") from e


def h_cross(args, params) -> Result:
    if args.action in ("count", "lb-margin"):
        if args.convex is not None:
            g = convex_position_graph(args.convex)
        elif args.input:
            g = load_graph(args.input)
        else:
            raise InputError("give a graph file or --convex n")
        rep = {"vertices": g.v, "edges": g.e, "crossings": count_crossings(g)}
        if args.action == "lb-margin":
            m = crossing_lb_margin(g, params)
            rep["margin"] = m
            rep["applicable"] = m is not None
        return Result(rep, "crossings.json")
    if not args.input:
        raise InputError("region needs a configuration file")
    c = load_config(args.input, args)
    if args.line is None:
        raise InputError("--line is required for region")
    r = default_r(c, args)
    sel = sample(c, r, args.seed)
    ids = [i for i in sel.chosen if i != args.line]
    arr = Arrangement([c.lines[i] for i in ids])
    seq, _, _ = zone_sequence(arr, c.lines[args.line])
    k = min(args.count, len(seq))
    region = consecutive_union(arr, c.lines[args.line], seq[:k])
    others = [l for i, l in enumerate(c.lines) if i not in set(ids)]
    rep = {"line": args.line, "faces": seq[:k], "region": region.to_json(),
           "crossings": crossings_in_region(others, region)}
    return Result(rep)


def h_bush(args, params) -> Result:
    c = load_config(args.input, args)
    J = pick_J(c, args, params)
    if args.action == "organizing":
        ranked = bushmod.rank_organizing_points(c, J, top=args.top)
        dec = provisional_decomposition(c, sample(c, default_r(c, args), args.seed))
        rep = {"ranked_points": ranked,
               "lines": bushmod.organizing_report(c, dec, J, params, max_intervals=args.budget)}
        return Result(rep)
    p = point_arg(c, args.p if args.p is not None else str(bushmod.rank_organizing_points(c, J, 1)[0]), "p")
    if args.action == "build":
        b = bushmod.build_bush(c, p, J)
        rep = {"bush": b.to_json(), "margins": bushmod.bush_size_margins(c, b, params)}
        return Result(rep, table=(["position", "line_id"], [[i, l] for i, l in enumerate(b.lines)]))
    if args.action == "sectors":
        rep = bushmod.sector_report(c, p, params, seed=args.seed, J=J)
        return Result(rep, "sectors.json",
                      table=(["sector", "members", "incidences", "light_share", "crossings", "cells", "dropped"],
                             [[s[k] for k in ("sector", "members", "incidences", "light_share", "crossings",
                                              "cells", "dropped")] for s in rep["sectors"]]))
    if args.action == "fastslow":
        b = bushmod.build_bush(c, p, J)
        secs, _ = bushmod.sectors(c, b, J, params)
        table = bushmod.MeetTable(c, b)
        reps = [bushmod.classify_fast_slow(c, b, s, params, J, table).to_json() for s in secs]
        rows = [[t["sector"], x["line"], x["crossings"], x["alpha"], x["slow"]] for t in reps for x in t["lines"]]
        return Result({"sectors": reps}, table=(["sector", "line", "crossings", "alpha", "slow"], rows))
    if args.action == "double":
        p2 = point_arg(c, args.p2, "p2")
        dec = bushmod.double_bush(c, p, p2, J, params)
        return Result(dec.to_json(), "decomposition.json", table=_cell_table(dec))
    K = args.K if args.K is not None else power_ceil(c.N, Fraction(1, 3))
    dec = bushmod.bush_cells(c, p, K, args.seed, params, J)
    rep = bushmod.mixing_stats(c, dec, J, params, budget=args.budget * 50, seed=args.seed)
    return Result(rep)


def h_recipe(args, params) -> Result:
    if args.action == "run":
        try:
            rp = RecipeParams.from_json({k: v for k, v in io.read_json(args.input).items() if k != "manifest"})
        except InvalidRecipeParams as e:
            raise InputError(str(e)) from e
        out = run_recipe(rp, params)
        return Result(out.to_json(), "recipe_outcome.json", failed=not out.success,
                      table=(["stage", "passed"], [[t["stage"], t["passed"]] for t in out.trace]))
    c = load_config(args.input, args)
    J = pick_J(c, args, params)
    if args.action == "dual-strips":
        dec = provisional_decomposition(c, sample(c, default_r(c, args), args.seed))
        return Result(dual_strips_report(c, J, dec, params))
    try:
        ex = extract_params(c, J, params, seed=args.seed, thinning=args.thinning)
    except DoubleBushFailed as e:
        return Result({"status": "Failure", "failed_stage": "DoubleBush", "reason": str(e)},
                      "recipe_outcome.json", failed=True)
    if args.action == "extract":
        rep = ex.to_json()
        return Result(rep["params"] | {"extraction": {k: v for k, v in rep.items() if k != "params"}},
                      "recipe_params.json", bare=True)
    out = run_recipe(ex.params, params)
    if not out.success:
        rep = out.to_json()
        rep["extraction"] = ex.to_json()
        return Result(rep, "recipe_outcome.json", failed=True)
    try:
        v = verify_protoinverse(c, ex.map, ex.params, params, J, out)
    except RecipeFailed as e:  # pragma: no cover - run_recipe already succeeded
        return Result({"status": "Failure", "reason": str(e)}, failed=True)
    rep = out.to_json()
    rep["extraction"] = ex.to_json()
    rep["protoinverse"] = v.to_json()
    return Result(rep, "recipe_outcome.json")


def h_circles(args, params) -> Result:
    cfg = load_circles(args.input, args)
    inc = circ.circle_incidences(cfg)
    if args.action == "distances":
        n = len(inc) // 2
        return Result({"unit_distances": n, "incidences": len(inc), "points": len(cfg.points)},
                      table=(["unit_distances", "incidences"], [[n, len(inc)]]))
    if args.action == "crossings":
        rep = circ.circle_crossing_graph(cfg, None, params, inc)
        return Result(rep.to_json())
    ranked = circ.rank_circle_points(cfg, inc, top=2)
    p1 = int(args.p) if args.p is not None else ranked[0]
    if args.action == "sectors":
        b = circ.circle_bush(cfg, p1, inc)
        rows = []
        for i, x in enumerate(cfg.points):
            hits, on = circ.circle_sectors_of(cfg, b, x)
            rows.append([i, "boundary" if on else " ".join(map(str, hits)), circ.entering_sector(cfg, b, x)])
        rep = {"bush": {"center": b.center, "circles": list(b.circles)},
               "points": [{"point": r[0], "sectors": r[1], "assigned": r[2]} for r in rows]}
        return Result(rep, table=(["point", "sectors", "assigned"], rows))
    p2 = int(args.p2) if args.p2 is not None else ranked[1]
    dbp = circ.circle_double_bush_partition(cfg, p1, p2, params, inc)
    return Result(dbp.to_json(), table=(["cell", "points"],
                                        [[f"{j},{k}", len(v)] for (j, k), v in sorted(dbp.cells.items())]))


def h_render(args, params) -> Result:
    d = io.read_json(args.input)
    d.pop("manifest", None)
    kind = args.kind or ("configuration" if "lines" in d else "circles")
    if kind == "circles":
        cfg = load_circles(args.input, args)
        return Result(None, text=svg.circles_svg(cfg))
    c = load_config(args.input, args)
    if kind == "configuration":
        return Result(None, text=svg.configuration_svg(c))
    if kind == "arrangement":
        _, arr = _arrangement_lines(c, args)
        return Result(None, text=svg.arrangement_svg(arr, c.points))
    b = bushmod.build_bush(c, point_arg(c, args.p, "p"))
    ctr = c.points[b.center]
    secs = {i: bushmod.sector_of(ctr, b, x) for i, x in enumerate(c.points)}
    return Result(None, text=svg.bush_svg(c, b, {i: j for i, j in secs.items() if j is not None}))


GROUPS: dict[str, tuple[tuple[str, ...], Callable]] = {
    "generate": (("grid", "random", "circle-grid"), h_generate),
    "incidence": (("count", "richness", "st-margin"), h_incidence),
    "arrange": (("build", "zone", "funnels", "complexity"), h_arrange),
    "cells": (("sample", "audit", "decompose", "nice-refine"), h_cells),
    "refine": (("r1", "r2", "r3", "structured"), h_refine),
    "cross": (("count", "lb-margin", "region"), h_cross),
    "bush": (("build", "sectors", "fastslow", "double", "mixing", "organizing"), h_bush),
    "recipe": (("run", "extract", "verify", "dual-strips"), h_recipe),
    "circles": (("distances", "crossings", "sectors", "double-bush"), h_circles),
    "render": (("svg",), h_render),
}


def constants_help() -> str:
    d = SlackParams().to_json()
    return "SlackParams constants (default value: meaning):\n" + "\n".join(
        f"  {k} = {d[k]}: {DESCRIPTIONS[k]}" for k in DESCRIPTIONS)


def build_parser() -> Parser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--epsilon", type=Fraction, default=None, help="slack exponent (default 1/20)")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--n", type=int, default=None, help="override the declared scale N")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--out", default=None, help="output file (default stdout)")
    g.add_argument("--params", default=None, help="JSON file of SlackParams overrides")
    g.add_argument("--timing", action="store_true", help="record wall-clock time in the manifest")

    p = Parser(prog="stcells", description="Exact incidence-geometry workbench.",
               epilog=constants_help(), formatter_class=argparse.RawDescriptionHelpFormatter,
               parents=[common])
    sub = p.add_subparsers(dest="group", required=True, parser_class=Parser)
    for name, (actions, _) in GROUPS.items():
        sp = sub.add_parser(name, parents=[common], epilog=constants_help(),
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("action", choices=actions)
        sp.add_argument("input", nargs="?", default=None, help="input JSON file")
        if name == "generate":
            sp.add_argument("--k", type=int, default=6)
            sp.add_argument("--lines", type=int, default=20)
            sp.add_argument("--points", type=int, default=20)
            sp.add_argument("--coord-range", type=int, default=50)
        if name in ("arrange", "cells", "refine", "cross", "bush", "recipe", "render"):
            sp.add_argument("--r", type=int, default=None, help="sample size parameter")
        if name in ("arrange", "cross"):
            sp.add_argument("--line", type=int, default=None)
        if name == "cross":
            sp.add_argument("--convex", type=int, default=None, help="use K_n in convex position")
            sp.add_argument("--count", type=int, default=2, help="consecutive faces to merge")
        if name == "cells":
            sp.add_argument("--kind", choices=("funnel", "face"), default="funnel")
        if name in ("cells", "bush"):
            sp.add_argument("--budget", type=int, default=200)
        if name == "refine":
            sp.add_argument("--cell-filter-slack", type=int, default=None)
        if name in ("bush", "circles", "render"):
            sp.add_argument("--p", default=None, help="bush centre (point index)")
            sp.add_argument("--p2", default=None, help="second bush centre")
        if name == "bush":
            sp.add_argument("--K", type=int, default=None, help="random lines added to the bush")
            sp.add_argument("--top", type=int, default=10)
        if name in ("bush", "recipe"):
            sp.add_argument("--J", choices=("all", "pipeline"), default="all",
                            help="incidence subset: all incidences or the refined J")
        if name == "recipe":
            sp.add_argument("--thinning", type=int, default=1, help="keep every t-th bush line")
        if name == "render":
            sp.add_argument("--kind", choices=("configuration", "arrangement", "bush", "circles"), default=None)
    return p


def slack_from(args) -> SlackParams:
    params = SlackParams()
    if args.params:
        params = SlackParams.from_json(io.read_json(args.params))
    if args.epsilon is not None:
        params = params.replace(epsilon=args.epsilon)
    return params


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.group != "generate" and args.group != "cross" and args.input is None:
        parser.error(f"{args.group} {args.action} needs an input file")
    t0 = time.perf_counter()
    try:
        params = slack_from(args)
        res = GROUPS[args.group][1](args, params)
    except (InputError, InvalidParams, OSError, ValueError, KeyError) as e:
        print(f"stcells: error: {e}", file=sys.stderr)
        return 1
    inputs = [x for x in (args.input, args.params) if x]
    wall = f"{time.perf_counter() - t0:.3f}s" if args.timing else None
    man = io.manifest(["stcells", *argv], params, [args.seed], inputs, wall)
    man["report_schema"] = res.schema if res.text is None else "svg"
    if res.text is not None:
        out = res.text.replace("</desc>", f"</desc>\n<metadata><![CDATA[{io.dumps(man).strip()}]]></metadata>", 1)
    elif args.format == "csv":
        header, rows = res.table if res.table else (["key", "value"], io.flat_rows(res.report))
        out = io.table_csv(header, rows)
    elif res.bare:
        out = io.dumps({**io.jsonable(res.report), "manifest": man})
    else:
        out = io.dumps({"manifest": man, "report": res.report})
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            f.write(out)
        if args.format == "csv" and res.text is None:
            with open(args.out + ".manifest.json", "w", encoding="utf-8") as f:
                f.write(io.dumps(man))
    else:
        sys.stdout.write(out)
    return 2 if res.failed else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
