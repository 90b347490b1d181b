"""Serialization helpers: exact JSON, CSV tables, run manifests and shipped schemas."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from enum import Enum
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from . import __version__
from .geometry import fmt
from .params import SlackParams


def jsonable(x: Any) -> Any:
    """Plain JSON values; rationals become "p/q" strings, enums their value."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, float):
        raise TypeError("floats are not emitted; convert to an exact value first")
    if isinstance(x, Enum):
        return x.value
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in items]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=1) + "\n"


def digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command: list[str], params: SlackParams, seeds: Iterable[int], inputs: Iterable[str],
             wall_clock: str | None = None) -> dict:
    """Run record embedded in every artifact. wall_clock stays null unless timing was requested."""
    return {"command": list(command), "slack": params.to_json(), "seeds": list(seeds),
            "inputs": {str(p): digest(p) for p in inputs}, "tool_version": __version__,
            "wall_clock": wall_clock}


def read_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as f:
        d = json.load(f)
    if not isinstance(d, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return d


def table_csv(header: list[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([jsonable(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def flat_rows(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    """key,value rows for a nested report (dotted keys)."""
    obj = jsonable(obj)
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out.extend(flat_rows(obj[k], f"{prefix}.{k}" if prefix else k))
        return out
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            out.extend(flat_rows(v, f"{prefix}.{i}" if prefix else str(i)))
        return out
    return [(prefix, "" if obj is None else obj)]


def schema(name: str) -> dict:
    return json.loads(resources.files("stcells").joinpath("schemas", name).read_text(encoding="utf-8"))


def schema_names() -> list[str]:
    return sorted(p.name for p in resources.files("stcells").joinpath("schemas").iterdir()
                  if p.name.endswith(".json"))
