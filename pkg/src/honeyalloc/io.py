"""On-disk graph format and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import json
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .dynamic import Trace
from .graph import AttackGraph, Node, NodeKind, build_graph

GRAPH_FORMAT_VERSION = "honeyalloc-graph/1"


class GraphFormatError(ValueError):
    """Malformed graph file or unsupported format version."""


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    state: int
    value: float
    sup_norm_delta: float


def trace_records(trace: Trace) -> list[TraceRecord]:
    """One record per (sweep, state); iterations count from 1."""
    return [
        TraceRecord(k, sid, float(v), float(delta))
        for k, (delta, snap) in enumerate(zip(trace.deltas, trace.snapshots), start=1)
        for sid, v in enumerate(snap)
    ]


@dataclass
class GraphFile:
    version: str
    graph: AttackGraph
    metadata: dict[str, Any] = field(default_factory=dict)


def graph_to_dict(g: AttackGraph, metadata: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "version": GRAPH_FORMAT_VERSION,
        "nodes": [{"id": n.id, "value": n.value, "kind": n.kind.value} for n in g.nodes],
        "edges": [[e.src, e.dst] for e in g.edges],
        "metadata": dict(metadata or {}),
    }


def graph_from_dict(doc: dict[str, Any]) -> GraphFile:
    if not isinstance(doc, dict):
        raise GraphFormatError("graph file must hold a JSON object")
    version = doc.get("version")
    if version != GRAPH_FORMAT_VERSION:
        raise GraphFormatError(f"unsupported graph format version {version!r}")
    try:
        nodes = [Node(int(n["id"]), float(n["value"]), NodeKind(n["kind"])) for n in doc["nodes"]]
        edges = [(int(s), int(d)) for s, d in doc["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph file: {exc}") from exc
    entry = [n.id for n in nodes if n.kind is NodeKind.ENTRY]
    targets = [n.id for n in nodes if n.kind is NodeKind.TARGET]
    graph = build_graph(nodes, edges, entry, targets)
    return GraphFile(version, graph, dict(doc.get("metadata") or {}))


def save_graph(g: AttackGraph, path: str | Path, metadata: dict[str, Any] | None = None) -> None:
    text = json.dumps(graph_to_dict(g, metadata), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_graph_file(path: str | Path) -> GraphFile:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: not valid JSON ({exc})") from exc
    return graph_from_dict(doc)


def load_graph(path: str | Path) -> AttackGraph:
    return read_graph_file(path).graph


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        return format(float(v), ".9g")
    if v is None:
        return ""
    return str(v)


def write_csv(records: Sequence[Any], path: str | Path, fields: Iterable[str] | type | None = None) -> None:
    """Write dataclass instances or dicts as CSV: header, LF endings, reals at 9 significant digits.

    ``fields`` (a list of names or a dataclass type) fixes the columns; it
    is required to write the header of an empty record list.
    """
    if isinstance(fields, type) and dataclasses.is_dataclass(fields):
        names = [f.name for f in dataclasses.fields(fields)]
    elif fields is not None:
        names = list(fields)
    elif records:
        first = records[0]
        names = [f.name for f in dataclasses.fields(first)] if dataclasses.is_dataclass(first) else list(first)
    else:
        raise ValueError("cannot infer CSV columns from an empty record list; pass fields=")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r in records:
            row = dataclasses.asdict(r) if dataclasses.is_dataclass(r) else r
            w.writerow([_cell(row[k]) for k in names])
