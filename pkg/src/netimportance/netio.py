"""Network file parsing and representation conversion.

Two on-disk formats are supported:

* incidence CSV -- first row holds plant labels (after a corner cell), first
  column holds pollinator labels, body cells are numeric visitation counts.
  Any positive cell is a link.
* edge list -- whitespace separated ``source target [weight]`` lines.  An
  optional comment block starting with ``# classes:`` maps node ids to
  classes, one ``# <id> <class>`` line per node.

Adjacency orientation is column = source, row = target: entry ``(i, j)`` is
the weight of the edge ``j -> i``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

NODE_CLASSES = frozenset(
    {"sensory", "inter", "motor", "muscle", "gene", "pollinator", "plant"}
)
SYMMETRY_TOL = 1e-12


class NetworkFormatError(ValueError):
    """Raised for malformed or invariant-violating network input."""


class NetworkKind(str, Enum):
    UNDIRECTED = "undirected"
    DIRECTED = "directed"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BipartiteNetwork:
    """Pollinator-plant incidence structure (rows pollinators, columns plants)."""

    incidence: np.ndarray
    pollinator_labels: tuple[str, ...]
    plant_labels: tuple[str, ...]

    def __post_init__(self):
        inc = np.asarray(self.incidence)
        if inc.ndim != 2:
            raise NetworkFormatError("incidence must be a 2-d matrix")
        if not np.isin(inc, (0, 1)).all():
            raise NetworkFormatError("incidence entries must be 0 or 1")
        if inc.shape != (len(self.pollinator_labels), len(self.plant_labels)):
            raise NetworkFormatError(
                f"incidence shape {inc.shape} does not match label counts "
                f"({len(self.pollinator_labels)}, {len(self.plant_labels)})"
            )
        empty_rows = [self.pollinator_labels[i] for i in np.flatnonzero(inc.sum(1) == 0)]
        empty_cols = [self.plant_labels[k] for k in np.flatnonzero(inc.sum(0) == 0)]
        if empty_rows or empty_cols:
            raise NetworkFormatError(
                "isolated species (no links): "
                f"pollinators {empty_rows}, plants {empty_cols}"
            )
        object.__setattr__(self, "incidence", _frozen(inc))
        object.__setattr__(self, "pollinator_labels", tuple(self.pollinator_labels))
        object.__setattr__(self, "plant_labels", tuple(self.plant_labels))

    @property
    def n_pollinators(self) -> int:
        return self.incidence.shape[0]

    @property
    def n_plants(self) -> int:
        return self.incidence.shape[1]

    @property
    def n_links(self) -> int:
        return int(self.incidence.sum())

    def pollinator_degrees(self) -> np.ndarray:
        return self.incidence.sum(axis=1).astype(int)

    def plant_degrees(self) -> np.ndarray:
        return self.incidence.sum(axis=0).astype(int)


@dataclass(frozen=True)
class DirectedNetwork:
    """Square weighted adjacency; ``adjacency[i, j]`` is the edge j -> i."""

    adjacency: np.ndarray
    node_labels: tuple[str, ...]
    node_classes: Optional[tuple[str, ...]] = None
    kind: NetworkKind = NetworkKind.DIRECTED
    name: str = field(default="", compare=False)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise NetworkFormatError(f"adjacency must be square, got {adj.shape}")
        if not np.isfinite(adj).all():
            raise NetworkFormatError("adjacency contains non-finite entries")
        if len(self.node_labels) != adj.shape[0]:
            raise NetworkFormatError("one label per node required")
        kind = NetworkKind(self.kind)
        if kind is NetworkKind.UNDIRECTED and not np.allclose(
            adj, adj.T, rtol=0.0, atol=SYMMETRY_TOL
        ):
            raise NetworkFormatError("undirected network requires a symmetric adjacency")
        if self.node_classes is not None:
            classes = tuple(self.node_classes)
            if len(classes) != adj.shape[0]:
                raise NetworkFormatError("class tags must cover all nodes")
            unknown = sorted(set(classes) - NODE_CLASSES)
            if unknown:
                raise NetworkFormatError(f"unknown node classes {unknown}")
            object.__setattr__(self, "node_classes", classes)
        object.__setattr__(self, "adjacency", _frozen(adj))
        object.__setattr__(self, "node_labels", tuple(self.node_labels))
        object.__setattr__(self, "kind", kind)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def indices_of_class(self, cls: str) -> np.ndarray:
        if self.node_classes is None:
            return np.arange(0)
        return np.array([i for i, c in enumerate(self.node_classes) if c == cls], dtype=int)


def _parse_number(cell: str, where: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise NetworkFormatError(f"non-numeric cell {cell!r} at {where}") from None
    if not math.isfinite(value):
        raise NetworkFormatError(f"non-finite cell {cell!r} at {where}")
    return value


def parse_incidence(text: str) -> BipartiteNetwork:
    """Parse an incidence CSV into a binarized :class:`BipartiteNetwork`.

    Visitation counts are binarized: any positive cell becomes a link.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise NetworkFormatError("incidence CSV needs a header row and at least one body row")
    plant_labels = [c.strip() for c in rows[0][1:]]
    if not plant_labels:
        raise NetworkFormatError("header row has no plant labels")
    pollinator_labels = []
    body = []
    for r_idx, row in enumerate(rows[1:], start=2):
        if len(row) != len(plant_labels) + 1:
            raise NetworkFormatError(
                f"row {r_idx} has {len(row) - 1} cells, expected {len(plant_labels)}"
            )
        pollinator_labels.append(row[0].strip())
        body.append(
            [_parse_number(c.strip(), f"row {r_idx}, column {c_idx}")
             for c_idx, c in enumerate(row[1:], start=2)]
        )
    incidence = (np.array(body) > 0).astype(float)
    return BipartiteNetwork(incidence, pollinator_labels, plant_labels)


def serialize_incidence(net: BipartiteNetwork) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([""] + list(net.plant_labels))
    for label, row in zip(net.pollinator_labels, net.incidence):
        writer.writerow([label] + [int(v) for v in row])
    return buf.getvalue()


def parse_edge_list(text: str, kind: NetworkKind = NetworkKind.DIRECTED) -> DirectedNetwork:
    """Parse a whitespace-separated edge list into a :class:`DirectedNetwork`.

    Node ids map to dense indices in order of first appearance in the edge
    lines; nodes named only in the ``# classes:`` block are appended after.
    Duplicate ``(source, target)`` pairs are rejected rather than summed.
    For ``kind=undirected`` each line is one symmetric edge.
    """
    kind = NetworkKind(kind)
    index: dict[str, int] = {}
    edges: dict[tuple[int, int], float] = {}
    class_of: dict[str, str] = {}
    in_class_block = False

    def node(name: str) -> int:
        if name not in index:
            index[name] = len(index)
        return index[name]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            in_class_block = False
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().rstrip(":") == "classes":
                in_class_block = True
            elif in_class_block and body:
                parts = body.split()
                if len(parts) != 2:
                    raise NetworkFormatError(f"line {lineno}: class entry must be '<id> <class>'")
                if parts[1] not in NODE_CLASSES:
                    raise NetworkFormatError(f"line {lineno}: unknown class tag {parts[1]!r}")
                class_of[parts[0]] = parts[1]
            continue
        in_class_block = False
        parts = line.split()
        if len(parts) not in (2, 3):
            raise NetworkFormatError(f"line {lineno}: expected 'source target [weight]'")
        weight = _parse_number(parts[2], f"line {lineno}") if len(parts) == 3 else 1.0
        s, t = node(parts[0]), node(parts[1])
        if kind is NetworkKind.UNDIRECTED and (t, s) in edges:
            raise NetworkFormatError(f"line {lineno}: duplicate undirected edge {parts[0]} -- {parts[1]}")
        if (s, t) in edges:
            raise NetworkFormatError(f"line {lineno}: duplicate edge {parts[0]} -> {parts[1]}")
        edges[(s, t)] = weight

    for name in class_of:
        node(name)
    labels = sorted(index, key=index.get)
    adjacency = np.zeros((len(labels), len(labels)))
    for (s, t), w in edges.items():
        adjacency[t, s] = w
        if kind is NetworkKind.UNDIRECTED:
            adjacency[s, t] = w
    classes = None
    if class_of:
        missing = [lab for lab in labels if lab not in class_of]
        if missing:
            raise NetworkFormatError(f"class block does not cover nodes {missing[:10]}")
        classes = tuple(class_of[lab] for lab in labels)
    return DirectedNetwork(adjacency, labels, classes, kind)


def serialize_edge_list(net: DirectedNetwork) -> str:
    lines = []
    if net.node_classes is not None:
        lines.append("# classes:")
        lines += [f"# {lab} {cls}" for lab, cls in zip(net.node_labels, net.node_classes)]
        lines.append("")
    adj = np.tril(net.adjacency) if net.kind is NetworkKind.UNDIRECTED else net.adjacency
    targets, sources = np.nonzero(adj)
    order = np.lexsort((targets, sources))
    for k in order:
        s, t = sources[k], targets[k]
        lines.append(f"{net.node_labels[s]} {net.node_labels[t]} {float(net.adjacency[t, s])!r}")
    return "\n".join(lines) + "\n"


def read_incidence(path: str | Path) -> BipartiteNetwork:
    return parse_incidence(Path(path).read_text(encoding="utf-8"))


def read_edge_list(path: str | Path, kind: NetworkKind = NetworkKind.DIRECTED) -> DirectedNetwork:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"), kind)


def bipartite_to_adjacency(net: BipartiteNetwork) -> DirectedNetwork:
    """Block adjacency ``[[0, eps], [eps.T, 0]]``; pollinators come first."""
    na, npl = net.n_pollinators, net.n_plants
    adj = np.zeros((na + npl, na + npl))
    adj[:na, na:] = net.incidence
    adj[na:, :na] = net.incidence.T
    classes = ("pollinator",) * na + ("plant",) * npl
    return DirectedNetwork(
        adj, net.pollinator_labels + net.plant_labels, classes, NetworkKind.UNDIRECTED
    )


def degrees(net: DirectedNetwork) -> np.ndarray:
    """Row nonzero counts (undirected) or in-degree + out-degree (directed)."""
    nz = net.adjacency != 0
    if net.kind is NetworkKind.UNDIRECTED:
        return nz.sum(axis=1).astype(int)
    return (nz.sum(axis=1) + nz.sum(axis=0)).astype(int)


def out_degrees(net: DirectedNetwork) -> np.ndarray:
    return (net.adjacency != 0).sum(axis=0).astype(int)


def induced_subnetwork(net: DirectedNetwork, nodes: Sequence[int]) -> DirectedNetwork:
    idx = np.asarray(sorted(nodes), dtype=int)
    classes = None if net.node_classes is None else [net.node_classes[i] for i in idx]
    return DirectedNetwork(
        net.adjacency[np.ix_(idx, idx)],
        [net.node_labels[i] for i in idx],
        classes,
        net.kind,
        net.name,
    )


def giant_strong_component(net: DirectedNetwork) -> DirectedNetwork:
    """Largest set of mutually reachable nodes (ties: lowest first node index)."""
    _, labels = connected_components(csr_matrix(net.adjacency.T != 0), connection="strong")
    sizes = np.bincount(labels)
    return induced_subnetwork(net, np.flatnonzero(labels == np.argmax(sizes)))


def input_connected_core(net: DirectedNetwork) -> DirectedNetwork:
    """Largest weakly connected piece of the subgraph where every node has an input.

    Nodes without incoming edges are pruned repeatedly, since removing a node
    can strip the only input of another.
    """
    keep = np.ones(net.n, dtype=bool)
    nz = net.adjacency != 0
    while True:
        has_input = nz[:, keep][keep].any(axis=1)
        if has_input.all():
            break
        kept = np.flatnonzero(keep)
        keep[kept[~has_input]] = False
        if not keep.any():
            raise NetworkFormatError("no node has an incoming connection")
    kept = np.flatnonzero(keep)
    sub = nz[np.ix_(kept, kept)]
    _, labels = connected_components(csr_matrix(sub), connection="weak")
    sizes = np.bincount(labels)
    return induced_subnetwork(net, kept[labels == np.argmax(sizes)])
