"""Signed interaction graph from the block matrix G = [[B, Z], [A, F]].

Nodes are the p genes followed by hidden regulators ``h1..hk``. Edge
direction follows time: B[i, j] links gene j at t-1 to gene i at t, Z[i, j]
links hidden j to gene i at the same t, A[i, j] links gene j at t-1 to
hidden i and F[i, j] links hidden j at t-1 to hidden i.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

BLOCK_ORDER = ("B", "Z", "A", "F")
GRAPH_FORMAT = "netinf-graph"
GRAPH_VERSION = 1


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float
    sign: str
    block: str


@dataclass(frozen=True)
class InteractionGraph:
    nodes: tuple
    edges: tuple
    n_genes: int

    def hidden_nodes(self) -> tuple:
        return self.nodes[self.n_genes:]


def hidden_labels(k: int) -> tuple:
    return tuple(f"h{i + 1}" for i in range(k))


def assemble_graph(params: ModelParams, gene_names, threshold: float = 1e-8) -> InteractionGraph:
    """One directed edge per coefficient with magnitude above ``threshold``."""
    if not threshold >= 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    genes = tuple(str(g) for g in gene_names)
    if len(genes) != params.p:
        raise ValueError(f"{len(genes)} gene names for p={params.p}")
    hidden = hidden_labels(params.k)
    if set(genes) & set(hidden):
        raise ValueError("gene names collide with hidden regulator labels")
    ends = {"B": (genes, genes), "Z": (hidden, genes), "A": (genes, hidden), "F": (hidden, hidden)}
    edges = []
    for block in BLOCK_ORDER:
        M = getattr(params, block)
        sources, targets = ends[block]
        for i, j in zip(*np.nonzero(np.abs(M) > threshold)):
            w = float(M[i, j])
            edges.append(Edge(sources[j], targets[i], w,
                              "activation" if w > 0 else "inhibition", block))
    return InteractionGraph(nodes=genes + hidden, edges=tuple(edges), n_genes=len(genes))


def degree_ranking(g: InteractionGraph, direction: str = "in", restrict_block: str | None = None) -> list:
    """Nodes sorted by in- or out-degree, descending; ties keep node order."""
    if direction not in ("in", "out"):
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    deg = {n: 0 for n in g.nodes}
    for e in g.edges:
        if restrict_block is not None and e.block != restrict_block:
            continue
        deg[e.target if direction == "in" else e.source] += 1
    pos = {n: i for i, n in enumerate(g.nodes)}
    return sorted(deg.items(), key=lambda kv: (-kv[1], pos[kv[0]]))


def neighborhood(g: InteractionGraph, node: str, radius: int = 1) -> InteractionGraph:
    """Subgraph of edges touching nodes within ``radius`` hops of ``node`` (ignoring direction)."""
    if node not in g.nodes:
        raise KeyError(node)
    keep = {node}
    frontier = {node}
    for _ in range(radius):
        nxt = set()
        for e in g.edges:
            if e.source in frontier:
                nxt.add(e.target)
            if e.target in frontier:
                nxt.add(e.source)
        frontier = nxt - keep
        keep |= nxt
    edges = tuple(e for e in g.edges if e.source in keep and e.target in keep)
    return InteractionGraph(nodes=g.nodes, edges=edges, n_genes=g.n_genes)


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: InteractionGraph) -> str:
    lines = ["digraph G {"]
    for i, n in enumerate(g.nodes):
        shape = "ellipse" if i < g.n_genes else "box"
        lines.append(f"  {_dot_id(n)} [shape={shape}];")
    for e in g.edges:
        color = "blue" if e.sign == "activation" else "red"
        lines.append(f'  {_dot_id(e.source)} -> {_dot_id(e.target)} '
                     f'[color={color}, label="{e.weight:.3f}", block={e.block}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_edge_csv(g: InteractionGraph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["source", "target", "weight", "sign", "block"])
    for e in g.edges:
        w.writerow([e.source, e.target, repr(e.weight), e.sign, e.block])
    return buf.getvalue()


def to_json(g: InteractionGraph) -> str:
    doc = {
        "format": GRAPH_FORMAT,
        "version": GRAPH_VERSION,
        "n_genes": g.n_genes,
        "nodes": list(g.nodes),
        "edges": [{"source": e.source, "target": e.target, "weight": e.weight,
                   "sign": e.sign, "block": e.block} for e in g.edges],
    }
    return json.dumps(doc, indent=2) + "\n"


def graph_from_json(text: str) -> InteractionGraph:
    doc = json.loads(text)
    if doc.get("format") != GRAPH_FORMAT or doc.get("version") != GRAPH_VERSION:
        raise ValueError("not a netinf graph document of a supported version")
    edges = tuple(Edge(e["source"], e["target"], float(e["weight"]), e["sign"], e["block"])
                  for e in doc["edges"])
    return InteractionGraph(nodes=tuple(doc["nodes"]), edges=edges, n_genes=int(doc["n_genes"]))


def export_graph(g: InteractionGraph, fmt: str) -> str:
    """Render as ``dot``, ``edge-csv`` or ``json``."""
    if fmt == "dot":
        return to_dot(g)
    if fmt == "edge-csv":
        return to_edge_csv(g)
    if fmt == "json":
        return to_json(g)
    raise ValueError(f"unknown graph format {fmt!r}")
