"""JSON serialization and DOT export for QBP graphs."""

from __future__ import annotations

import json
from pathlib import Path

from .graph import KINDS, SINK, UNLABELED, VAR, Edge, Node, QbpGraph, StructureError

FORMAT_VERSION = 1


class ParseError(ValueError):
    """Malformed QBP file. The message names the offending line or field."""


def to_dict(graph: QbpGraph) -> dict:
    nodes = []
    for n in graph.nodes:
        item = {"id": n.id, "kind": n.kind}
        if n.kind == VAR:
            item["var"] = n.var
        elif n.kind == SINK:
            item["label"] = n.label
        nodes.append(item)
    edges = [
        {"from": e.src, "to": e.dst, "bit": e.bit, "amp": [e.amp.real, e.amp.imag]} for e in graph.edges
    ]
    return {"version": FORMAT_VERSION, "num_vars": graph.num_vars, "start": graph.start, "nodes": nodes, "edges": edges}


def save(graph: QbpGraph) -> bytes:
    # json emits floats with repr(), the shortest string that round-trips
    return json.dumps(to_dict(graph), indent=1).encode("utf-8")


def save_file(graph: QbpGraph, path: str | Path) -> None:
    Path(path).write_bytes(save(graph))


def load(data: bytes | str) -> QbpGraph:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8 text: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(doc)


def load_file(path: str | Path) -> QbpGraph:
    return load(Path(path).read_bytes())


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def from_dict(doc) -> QbpGraph:
    if not isinstance(doc, dict):
        raise ParseError("top level: expected an object")
    for key in ("version", "num_vars", "start", "nodes", "edges"):
        if key not in doc:
            raise ParseError(f"top level: missing field {key!r}")
    if doc["version"] != FORMAT_VERSION:
        raise ParseError(f"version: unsupported value {doc['version']!r}")
    num_vars = _int(doc["num_vars"], "num_vars")
    start = _int(doc["start"], "start")
    if not isinstance(doc["nodes"], list) or not isinstance(doc["edges"], list):
        raise ParseError("nodes/edges: expected arrays")

    nodes = []
    for k, item in enumerate(doc["nodes"]):
        where = f"nodes[{k}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: expected an object")
        kind = item.get("kind")
        if kind not in KINDS:
            raise ParseError(f"{where}.kind: expected one of {KINDS}, got {kind!r}")
        node_id = _int(item.get("id"), f"{where}.id")
        if kind == VAR:
            nodes.append(Node(node_id, VAR, var=_int(item.get("var"), f"{where}.var")))
        elif kind == SINK:
            label = item.get("label")
            if label not in (0, 1) or isinstance(label, bool):
                raise ParseError(f"{where}.label: expected 0 or 1, got {label!r}")
            nodes.append(Node(node_id, SINK, label=label))
        else:
            nodes.append(Node(node_id, UNLABELED))

    edges = []
    for k, item in enumerate(doc["edges"]):
        where = f"edges[{k}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: expected an object")
        bit = item.get("bit")
        if bit is not None and (isinstance(bit, bool) or bit not in (0, 1)):
            raise ParseError(f"{where}.bit: expected 0, 1 or null, got {bit!r}")
        amp = item.get("amp")
        if (
            not isinstance(amp, list)
            or len(amp) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in amp)
        ):
            raise ParseError(f"{where}.amp: expected [re, im], got {amp!r}")
        edges.append(
            Edge(_int(item.get("from"), f"{where}.from"), _int(item.get("to"), f"{where}.to"), bit, complex(amp[0], amp[1]))
        )
    try:
        return QbpGraph(num_vars, nodes, edges, start)
    except StructureError as exc:
        raise ParseError(f"structure: {exc}") from None


def format_amp(amp: complex) -> str:
    if amp.imag == 0:
        return f"{amp.real:.6g}"
    if amp.real == 0:
        return f"{amp.imag:.6g}i"
    return f"{amp.real:.6g}{amp.imag:+.6g}i"


def to_dot(graph: QbpGraph, name: str = "qbp", var_names=None) -> str:
    """Graphviz source with one node per graph node and ``bit:amp`` edge labels."""
    names = var_names or (lambda v: f"v{v}")
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    for n in graph.nodes:
        if n.kind == SINK:
            attrs = f'label="{n.label}", shape=box'
        elif n.kind == VAR:
            attrs = f'label="{names(n.var)}", shape=circle'
        else:
            attrs = 'label="", shape=point'
        if n.id == graph.start:
            attrs += ", penwidth=2"
        lines.append(f"  n{n.id} [{attrs}];")
    for e in graph.edges:
        text = format_amp(e.amp) if e.bit is None else f"{e.bit}:{format_amp(e.amp)}"
        style = ", style=dashed" if e.bit == 0 else ""
        lines.append(f'  n{e.src} -> n{e.dst} [label="{text}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
