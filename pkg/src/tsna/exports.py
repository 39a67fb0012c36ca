"""Graph exporters (GraphML, DOT, edge CSV) and the histogram emitter.

Node attributes carry the assigned role and scaled measures when provided;
edges carry the interaction count and connection strength. The GraphML
reader exists so round trips can be verified without external tools.
"""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .graph import EntityId, Snapshot
from .measures import MeasureMatrix
from .roles import RoleAssignment

FORMATS = ("graphml", "dot", "csv")


def _node_attributes(
    snap: Snapshot,
    assignments: Optional[Sequence[RoleAssignment]],
    matrix: Optional[MeasureMatrix],
) -> dict[EntityId, dict[str, object]]:
    attrs: dict[EntityId, dict[str, object]] = {v: {} for v in snap.nodes}
    if assignments is not None:
        by_entity = {a.entity: a.role for a in assignments}
        for v in snap.nodes:
            if v in by_entity:
                attrs[v]["role"] = by_entity[v]
    if matrix is not None:
        index = {e: i for i, e in enumerate(matrix.entities)}
        for v in snap.nodes:
            i = index.get(v)
            if i is None:
                continue
            for measure, vec in matrix.scaled.items():
                attrs[v][f"scaled_{measure.value}"] = float(vec[i])
    return attrs


def export_graph(
    snap: Snapshot,
    path: str,
    fmt: str,
    assignments: Optional[Sequence[RoleAssignment]] = None,
    matrix: Optional[MeasureMatrix] = None,
) -> None:
    """Write the snapshot in one of graphml, dot, or csv."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    attrs = _node_attributes(snap, assignments, matrix)
    if fmt == "graphml":
        _write_graphml(snap, attrs, path)
    elif fmt == "dot":
        _write_dot(snap, attrs, path)
    else:
        _write_edge_csv(snap, path)


_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def _write_graphml(
    snap: Snapshot, attrs: Mapping[EntityId, dict[str, object]], path: str
) -> None:
    ET.register_namespace("", _GRAPHML_NS)
    root = ET.Element(f"{{{_GRAPHML_NS}}}graphml")
    attr_names = sorted({name for a in attrs.values() for name in a})
    key_ids: dict[str, str] = {}
    for i, name in enumerate(attr_names):
        key_id = f"d{i}"
        key_ids[name] = key_id
        ET.SubElement(
            root,
            f"{{{_GRAPHML_NS}}}key",
            {
                "id": key_id,
                "for": "node",
                "attr.name": name,
                "attr.type": "string" if name == "role" else "double",
            },
        )
    for eid, name in (("weight", "weight"), ("en", "en")):
        ET.SubElement(
            root,
            f"{{{_GRAPHML_NS}}}key",
            {
                "id": f"e_{eid}",
                "for": "edge",
                "attr.name": name,
                "attr.type": "double",
            },
        )
    graph = ET.SubElement(
        root, f"{{{_GRAPHML_NS}}}graph", {"id": "G", "edgedefault": "directed"}
    )
    for v in snap.nodes:
        node = ET.SubElement(graph, f"{{{_GRAPHML_NS}}}node", {"id": v})
        for name in attr_names:
            if name in attrs[v]:
                data = ET.SubElement(
                    node, f"{{{_GRAPHML_NS}}}data", {"key": key_ids[name]}
                )
                data.text = str(attrs[v][name])
    for (s, d), w in snap.edges.items():
        edge = ET.SubElement(
            graph, f"{{{_GRAPHML_NS}}}edge", {"source": s, "target": d}
        )
        weight = ET.SubElement(edge, f"{{{_GRAPHML_NS}}}data", {"key": "e_weight"})
        weight.text = str(w)
        strength = ET.SubElement(edge, f"{{{_GRAPHML_NS}}}data", {"key": "e_en"})
        strength.text = repr(snap.strengths[(s, d)])
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)


def read_graphml(path: str) -> tuple[list[str], dict[tuple[str, str], int]]:
    """Parse back node ids and integer edge weights from our GraphML."""
    tree = ET.parse(path)
    root = tree.getroot()
    ns = {"g": _GRAPHML_NS}
    weight_key = None
    for key in root.findall("g:key", ns):
        if key.get("attr.name") == "weight" and key.get("for") == "edge":
            weight_key = key.get("id")
    nodes = []
    edges: dict[tuple[str, str], int] = {}
    graph = root.find("g:graph", ns)
    if graph is None:
        return nodes, edges
    for node in graph.findall("g:node", ns):
        nodes.append(node.get("id", ""))
    for edge in graph.findall("g:edge", ns):
        weight = 1
        for data in edge.findall("g:data", ns):
            if data.get("key") == weight_key and data.text:
                weight = int(float(data.text))
        edges[(edge.get("source", ""), edge.get("target", ""))] = weight
    return nodes, edges


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_dot(
    snap: Snapshot, attrs: Mapping[EntityId, dict[str, object]], path: str
) -> None:
    lines = ["digraph snapshot {"]
    for v in snap.nodes:
        parts = []
        for name in sorted(attrs[v]):
            parts.append(f'{name}={_dot_quote(str(attrs[v][name]))}')
        suffix = f" [{', '.join(parts)}]" if parts else ""
        lines.append(f"  {_dot_quote(v)}{suffix};")
    for (s, d), w in snap.edges.items():
        en = repr(snap.strengths[(s, d)])
        lines.append(
            f"  {_dot_quote(s)} -> {_dot_quote(d)} [weight={w}, en={en}];"
        )
    lines.append("}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_edge_csv(snap: Snapshot, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight", "en"])
        for (s, d), w in snap.edges.items():
            writer.writerow([s, d, w, repr(snap.strengths[(s, d)])])


# --- histograms -----------------------------------------------------------------


@dataclass
class Histogram:
    """Counts per half-open bin [edge[i], edge[i+1]) plus out-of-range tallies."""

    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow


def linear_edges(low: float, high: float, bins: int) -> np.ndarray:
    if bins < 1 or not high > low:
        raise ValueError("need bins >= 1 and high > low")
    return np.linspace(low, high, bins + 1)


def log_edges(low: float, high: float, bins: int) -> np.ndarray:
    if low <= 0 or not high > low or bins < 1:
        raise ValueError("log bins need 0 < low < high and bins >= 1")
    return np.logspace(math.log10(low), math.log10(high), bins + 1)


def emit_histogram(values: Sequence[float], edges: Sequence[float]) -> Histogram:
    """Bin values into half-open bins; boundary values go to the upper bin."""
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        raise ValueError("histogram needs at least one value")
    edge_arr = np.asarray(edges, dtype=np.float64)
    if edge_arr.size < 2 or np.any(np.diff(edge_arr) <= 0):
        raise ValueError("bin edges must be ascending with >= 2 entries")
    idx = np.searchsorted(edge_arr, data, side="right") - 1
    underflow = int((idx < 0).sum())
    overflow = int((idx >= edge_arr.size - 1).sum())
    valid = idx[(idx >= 0) & (idx < edge_arr.size - 1)]
    counts = np.bincount(valid, minlength=edge_arr.size - 1)
    return Histogram(edge_arr, counts, underflow, overflow)


def histogram_to_csv(hist: Histogram, path: str) -> None:
    """Write ``bin_low,bin_high,count`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low", "bin_high", "count"])
        for i in range(hist.counts.size):
            writer.writerow(
                [
                    repr(float(hist.edges[i])),
                    repr(float(hist.edges[i + 1])),
                    int(hist.counts[i]),
                ]
            )
