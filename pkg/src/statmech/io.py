"""CSV/JSON readers and writers shared by the command line.

Tables are lists of dicts with a fixed column order. CSV output starts with
one ``# {json}`` line holding the resolved run configuration; floats are
printed with 10 significant digits so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dynamics import ChainSpec
from .ensembles import DiscreteSystem
from .errors import DomainError, ShapeError
from .estimation import GriddedDensity, HmmSpec


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.10g" % (v + 0.0)
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return fmt(v)
        return float("%.10g" % v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


def render_csv(rows: Sequence[dict], columns: Sequence[str], config: dict | None = None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write("# " + json.dumps(_jsonable(config), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def render_json(rows: Sequence[dict], columns: Sequence[str], config: dict | None = None) -> str:
    doc = {"config": _jsonable(config or {}), "columns": list(columns),
           "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows]}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        import sys
        sys.stdout.write(text)


def _read_rows(path: str) -> list[list[str]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return [r for r in csv.reader(lines) if r]


def read_density_csv(path: str) -> GriddedDensity:
    """Two columns (x, q); a header row is optional."""
    rows = _read_rows(path)
    if rows and rows[0][0].strip().lower() == "x":
        rows = rows[1:]
    try:
        data = np.array([[float(a), float(b)] for a, b, *_ in rows])
    except ValueError as exc:
        raise DomainError(f"malformed density CSV: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise ShapeError("density CSV needs two columns x, q")
    return GriddedDensity(data[:, 0], data[:, 1])


def write_density_csv(density: GriddedDensity, path: str) -> None:
    emit(render_csv([{"x": a, "q": b} for a, b in zip(density.grid, density.values)], ["x", "q"]), path)


def load_system(path: str) -> DiscreteSystem:
    return DiscreteSystem.from_json(Path(path).read_text())


def load_chain(path: str) -> ChainSpec:
    return ChainSpec.from_json(Path(path).read_text())


def load_hmm(path: str) -> HmmSpec:
    return HmmSpec.from_json(Path(path).read_text())


def trajectory_rows(times: Iterable[float], dists: np.ndarray) -> tuple[list[dict], list[str]]:
    k = np.asarray(dists).shape[1]
    cols = ["time"] + [f"P_{i + 1}" for i in range(k)]
    rows = [{"time": t, **{f"P_{i + 1}": p[i] for i in range(k)}} for t, p in zip(times, dists)]
    return rows, cols
