"""Social-network construction from pairwise mobility matrices.

Each unordered pair's two directional values are averaged into one
undirected edge weight; pairs below the threshold are omitted while
isolated nodes are kept.  One-sided no-data uses the defined direction
alone.  Exports (DOT, GraphML, JSON) are byte-deterministic: nodes and
edges are emitted in sorted token order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from fingertrace.metrics import DEFAULT_GRAPH_THRESHOLD, MatrixEntry

EXPORT_FORMATS = ("dot", "graphml", "json")


@dataclass
class SocialGraph:
    metric: str = ""
    nodes: dict[str, str | None] = field(default_factory=dict)  # id -> room label
    edges: dict[tuple[str, str], float] = field(default_factory=dict)

    def weight(self, a: str, b: str) -> float | None:
        return self.edges.get((min(a, b), max(a, b)))


def build_graph(
    entries: Iterable[MatrixEntry],
    threshold: float = DEFAULT_GRAPH_THRESHOLD,
    rooms: Mapping[str, str] | None = None,
) -> SocialGraph:
    """Symmetrize a directional matrix into a thresholded undirected graph."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be within [0, 1]")
    entries = list(entries)
    metric = entries[0].metric if entries else ""
    directional: dict[tuple[str, str], float] = {}
    nodes: set[str] = set()
    for e in entries:
        if e.metric != metric:
            raise ValueError("matrix mixes metrics; filter to one before building a graph")
        nodes.update((e.p_from, e.p_to))
        if e.value is not None:
            directional[(e.p_from, e.p_to)] = e.value

    graph = SocialGraph(metric=metric)
    for node in sorted(nodes):
        graph.nodes[node] = rooms.get(node) if rooms else None
    seen: set[tuple[str, str]] = set()
    for (a, b) in directional:
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        forward = directional.get(key)
        backward = directional.get((key[1], key[0]))
        sides = [v for v in (forward, backward) if v is not None]
        weight = sum(sides) / len(sides)
        if weight >= threshold:
            graph.edges[key] = weight
    return graph


def export_graph(graph: SocialGraph, format: str = "json") -> bytes:
    if format == "dot":
        return _export_dot(graph)
    if format == "graphml":
        return _export_graphml(graph)
    if format == "json":
        return _export_json(graph)
    raise ValueError(f"unknown graph format: {format!r}")


def _export_dot(graph: SocialGraph) -> bytes:
    lines = ["graph mobility {"]
    for node in sorted(graph.nodes):
        room = graph.nodes[node]
        attrs = f' [group="{room}"]' if room is not None else ""
        lines.append(f'  "{node}"{attrs};')
    for (a, b) in sorted(graph.edges):
        w = graph.edges[(a, b)]
        lines.append(f'  "{a}" -- "{b}" [label="{w:.4f}", weight="{w:.4f}"];')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode()


def _export_graphml(graph: SocialGraph) -> bytes:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="room" for="node" attr.name="room" attr.type="string"/>',
        '  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>',
        '  <key id="metric" for="graph" attr.name="metric" attr.type="string"/>',
        '  <graph id="mobility" edgedefault="undirected">',
        f'    <data key="metric">{graph.metric}</data>',
    ]
    for node in sorted(graph.nodes):
        room = graph.nodes[node]
        if room is None:
            lines.append(f'    <node id="{node}"/>')
        else:
            lines.append(f'    <node id="{node}"><data key="room">{room}</data></node>')
    for idx, (a, b) in enumerate(sorted(graph.edges)):
        w = graph.edges[(a, b)]
        lines.append(
            f'    <edge id="e{idx}" source="{a}" target="{b}">'
            f'<data key="weight">{w!r}</data></edge>'
        )
    lines.append("  </graph>")
    lines.append("</graphml>")
    return ("\n".join(lines) + "\n").encode()


def _export_json(graph: SocialGraph) -> bytes:
    doc = {
        "metric": graph.metric,
        "nodes": [{"id": n, "room": graph.nodes[n]} for n in sorted(graph.nodes)],
        "edges": [
            {"a": a, "b": b, "weight": graph.edges[(a, b)], "metric": graph.metric}
            for (a, b) in sorted(graph.edges)
        ],
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()


def load_graph_json(data: bytes | str) -> SocialGraph:
    doc = json.loads(data)
    graph = SocialGraph(metric=doc["metric"])
    for node in doc["nodes"]:
        graph.nodes[node["id"]] = node["room"]
    for edge in doc["edges"]:
        graph.edges[(edge["a"], edge["b"])] = edge["weight"]
    return graph
