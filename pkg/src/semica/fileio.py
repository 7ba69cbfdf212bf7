"""Stable file formats: graph JSON, sample/price CSVs, run manifests.

Vertices are 1-based in every file format. CSV numbers use the shortest
round-trip decimal representation, UTF-8, LF line endings.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import Dag
from .ica import SampleMatrix
from .sem import LinearSem, Noise

_READABLE_FAMILIES = ("uniform", "laplace", "gaussian")


def write_graph_json(sem: LinearSem, path: str | Path) -> None:
    doc = {
        "num_vertices": sem.graph.num_vertices,
        "observed": [v + 1 for v in sem.observed],
        "edges": [
            {"from": i + 1, "to": j + 1, "weight": w}
            for (i, j), w in zip(sem.graph.edges, sem.graph.weights)
        ],
        "noise": [
            {"family": n.family, "params": list(n.params)} for n in sem.noise
        ],
    }
    _write_json(doc, path)


def read_graph_json(path: str | Path) -> LinearSem:
    """Parse a graph file, naming the offending field on any malformation."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"graph json: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValueError("graph json: top level must be an object")

    p = _require(doc, "num_vertices", int)
    observed_raw = _require(doc, "observed", list)
    edges_raw = _require(doc, "edges", list)
    noise_raw = _require(doc, "noise", list)

    observed = []
    for idx, v in enumerate(observed_raw):
        if not isinstance(v, int) or not 1 <= v <= p:
            raise ValueError(f"graph json: observed[{idx}] must be an integer in 1..{p}")
        observed.append(v - 1)

    edges = {}
    for idx, e in enumerate(edges_raw):
        if not isinstance(e, dict):
            raise ValueError(f"graph json: edges[{idx}] must be an object")
        src = e.get("from")
        dst = e.get("to")
        w = e.get("weight")
        if not isinstance(src, int) or not 1 <= src <= p:
            raise ValueError(f"graph json: edges[{idx}].from must be an integer in 1..{p}")
        if not isinstance(dst, int) or not 1 <= dst <= p:
            raise ValueError(f"graph json: edges[{idx}].to must be an integer in 1..{p}")
        if not isinstance(w, (int, float)) or isinstance(w, bool):
            raise ValueError(f"graph json: edges[{idx}].weight must be a number")
        edges[(src - 1, dst - 1)] = float(w)

    if len(noise_raw) != p:
        raise ValueError("graph json: noise must list one entry per vertex")
    noise = []
    for idx, nd in enumerate(noise_raw):
        if not isinstance(nd, dict):
            raise ValueError(f"graph json: noise[{idx}] must be an object")
        family = nd.get("family")
        if family not in _READABLE_FAMILIES:
            raise ValueError(
                f"graph json: noise[{idx}].family must be one of {_READABLE_FAMILIES}"
            )
        params = nd.get("params", [])
        if not isinstance(params, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in params
        ):
            raise ValueError(f"graph json: noise[{idx}].params must be a number array")
        noise.append(Noise(family, tuple(float(x) for x in params)))

    try:
        graph = Dag.from_edges(p, edges)
        latent = tuple(v for v in range(p) if v not in set(observed))
        return LinearSem(graph, tuple(observed), latent, tuple(noise))
    except ValueError as exc:
        raise ValueError(f"graph json: {exc}") from exc


def write_samples_csv(samples: SampleMatrix, path: str | Path) -> None:
    """One row per sample, one column per variable, header row of names."""
    lines = [",".join(samples.variable_names)]
    for col in samples.values.T:
        lines.append(",".join(repr(float(v)) for v in col))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_samples_csv(path: str | Path) -> SampleMatrix:
    rows = _read_csv_rows(path)
    if len(rows) < 2:
        raise ValueError("samples csv: need a header row and at least one sample")
    names = tuple(rows[0])
    values = np.empty((len(rows) - 1, len(names)))
    for r, row in enumerate(rows[1:]):
        if len(row) != len(names):
            raise ValueError(f"samples csv: row {r + 2} has {len(row)} fields, expected {len(names)}")
        for c, cell in enumerate(row):
            try:
                values[r, c] = float(cell)
            except ValueError as exc:
                raise ValueError(f"samples csv: row {r + 2}, column {names[c]}: {cell!r}") from exc
    return SampleMatrix(values.T, names)


def read_prices_csv(path: str | Path) -> tuple[list[str], SampleMatrix]:
    """Date-indexed price table; dates with any missing value are dropped."""
    rows = _read_csv_rows(path)
    if len(rows) < 2:
        raise ValueError("prices csv: need a header row and at least one date")
    header = rows[0]
    if len(header) < 2:
        raise ValueError("prices csv: need a date column plus at least one series")
    names = tuple(header[1:])
    dates: list[str] = []
    kept: list[list[float]] = []
    for r, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise ValueError(f"prices csv: row {r + 2} has {len(row)} fields, expected {len(header)}")
        cells = row[1:]
        if any(cell.strip() == "" or cell.strip().lower() == "nan" for cell in cells):
            continue
        try:
            kept.append([float(c) for c in cells])
        except ValueError as exc:
            raise ValueError(f"prices csv: row {r + 2}: unparsable price") from exc
        dates.append(row[0])
    if len(kept) < 2:
        raise ValueError("prices csv: fewer than two complete dates")
    return dates, SampleMatrix(np.array(kept).T, names)


def write_returns_csv(dates: Sequence[str], returns: SampleMatrix, path: str | Path) -> None:
    lines = [",".join(("date",) + returns.variable_names)]
    for date, col in zip(dates, returns.values.T):
        lines.append(date + "," + ",".join(repr(float(v)) for v in col))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_benchmark_csv(result, path: str | Path) -> None:
    lines = ["p,n,mean_error,stderr,graphs,failures,mean_error_observed,stderr_observed"]
    for r in result.rows:
        lines.append(
            f"{r.p},{r.n},{repr(r.mean_error)},{repr(r.stderr)},{r.graphs},{r.failures},"
            f"{repr(r.mean_error_observed)},{repr(r.stderr_observed)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(
    path: str | Path,
    command: str,
    config: dict,
    seed: int,
    inputs: dict[str, str | Path],
    version: str,
) -> None:
    doc = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": version,
        "inputs": {name: _sha256(p) for name, p in inputs.items()},
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    _write_json(doc, path)


def _write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_json(doc: dict, path: str | Path) -> None:
    _write_json(doc, path)


def _read_csv_rows(path: str | Path) -> list[list[str]]:
    text = Path(path).read_text(encoding="utf-8")
    return [line.split(",") for line in text.splitlines() if line.strip() != ""]


def _require(doc: dict, key: str, kind: type):
    if key not in doc:
        raise ValueError(f"graph json: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValueError(f"graph json: field {key!r} must be a {kind.__name__}")
    return value


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
