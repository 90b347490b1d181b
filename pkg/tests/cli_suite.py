"""Input files and the list of CLI invocations shared by the CLI and acceptance tests."""

from __future__ import annotations

import json
import os
import subprocess
import sys
from fractions import Fraction as F
from pathlib import Path

from stcells.configuration import generate_grid
from stcells.geometry import Line
from stcells.recipe import RecipeParams


def parallel_params() -> RecipeParams:
    return RecipeParams((0, 1, 2, 3), (0, 1, 2, 3), tuple(Line(1, -1, k) for k in range(4)), 64)


def one_row_pencil() -> RecipeParams:
    # 128 = ceil(N^(1/3)) lines whose 8128 meets all lie in the first strip and in row [0, 1)
    ls = tuple(Line(F(k, 60), -1, F(1, 2) - F(k, 60) * (F(1, 2) + F(k, 600))) for k in range(128))
    return RecipeParams((0, 1, 2, 3), (0, 1, 2, 3), ls, 2 ** 21)


def write_inputs(d: Path) -> dict[str, str]:
    files = {
        "g2": generate_grid(2).to_json(),
        "g4": generate_grid(4).to_json(),
        "parallel": parallel_params().to_json(),
        "pencil": one_row_pencil().to_json(),
        "circles": {"N": 16, "points": [[str(x), str(y)] for x in range(4) for y in range(4)]},
        "graph": {"vertices": {"0": ["0", "0"], "1": ["2", "2"], "2": ["0", "2"], "3": ["2", "0"]},
                  "edges": [[0, 1, 0], [2, 3, 1]]},
        "slack": {"epsilon": "1/10"},
    }
    out = {}
    for name, data in files.items():
        p = d / f"{name}.json"
        p.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        out[name] = p.name
    return out


# (argv with {file} placeholders, expected exit code)
COMMANDS = [
    ("generate grid --k 3", 0),
    ("generate random --lines 8 --points 12 --seed 4 --coord-range 5", 0),
    ("generate circle-grid --k 3", 0),
    ("incidence count {g2}", 0),
    ("incidence richness {g2}", 0),
    ("incidence st-margin {g4}", 0),
    ("incidence count {g4} --format csv", 0),
    ("arrange build {g2}", 0),
    ("arrange zone {g4} --r 5 --line 0 --seed 1", 0),
    ("arrange funnels {g2} --r 3 --seed 2", 0),
    ("arrange complexity {g4} --r 6", 0),
    ("cells sample {g4} --seed 3", 0),
    ("cells audit {g4} --seed 3 --budget 30", 0),
    ("cells decompose {g4} --seed 3", 0),
    ("cells decompose {g4} --seed 3 --kind face", 0),
    ("cells nice-refine {g4} --seed 3 --epsilon 1/10", 0),
    ("refine r1 {g4} --seed 1", 0),
    ("refine r2 {g4} --seed 1", 0),
    ("refine r3 {g4} --seed 1", 0),
    ("refine structured {g4} --seed 1", 0),
    ("cross count {graph}", 0),
    ("cross lb-margin --convex 21", 0),
    ("cross region {g4} --line 3 --seed 2", 0),
    ("bush build {g4} --p 5", 0),
    ("bush sectors {g4}", 0),
    ("bush fastslow {g4}", 0),
    ("bush double {g4} --p2 5", 0),
    ("bush mixing {g4} --seed 2", 0),
    ("bush organizing {g4} --budget 20", 0),
    ("recipe run {parallel}", 2),
    ("recipe run {pencil}", 2),
    ("recipe extract {g4}", 0),
    ("recipe dual-strips {g4}", 0),
    ("recipe verify {g4} --params {slack}", 2),
    ("circles distances {circles}", 0),
    ("circles crossings {circles}", 0),
    ("circles sectors {circles}", 0),
    ("circles double-bush {circles}", 0),
    ("render svg {g2}", 0),
    ("render svg {circles}", 0),
]


def argv_for(template: str, files: dict[str, str]) -> list[str]:
    return template.format(**files).split()


def run_cli(argv: list[str], cwd: Path) -> subprocess.CompletedProcess:
    """Run the CLI in a fresh interpreter so hash seeds and caches differ between runs."""
    env = dict(os.environ)
    env.pop("PYTHONHASHSEED", None)
    return subprocess.run([sys.executable, "-m", "stcells.cli", *argv], cwd=cwd, capture_output=True, env=env)
