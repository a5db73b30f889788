"""Driver statistics by node class and sensory-to-motor path counting."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .netio import DirectedNetwork
from .ranking import ImportanceRanking

WALKS, SIMPLE_PATHS = "walks", "simple_paths"
MAX_SIMPLE_PATH_LENGTH = 8
# int64 products stay exact while every count is below this bound
_INT64_SAFE = 2.0 ** 62


@dataclass(frozen=True)
class PathCountMatrix:
    """``counts[a, b]`` = paths from ``sources[a]`` to ``targets[b]`` of length 1..max_length."""

    sources: np.ndarray
    targets: np.ndarray
    counts: np.ndarray  # object dtype, Python ints
    max_length: int
    mode: str


def _binary(net: DirectedNetwork) -> np.ndarray:
    return (net.adjacency != 0).astype(np.int64)


def count_walks(net: DirectedNetwork, sources: Sequence[int], targets: Sequence[int],
                max_length: int) -> PathCountMatrix:
    """Exact walk counts summed over lengths ``1..max_length``.

    Counts propagate one step at a time along ``j -> i`` edges.  int64 is
    used while a float shadow computation bounds the counts below 2**62;
    past that the computation restarts with arbitrary-precision integers.
    """
    if max_length < 1:
        raise ValueError("max_length must be at least 1")
    sources = np.asarray(sources, dtype=int)
    targets = np.asarray(targets, dtype=int)
    A = _binary(net)
    n = net.n
    frontier = np.zeros((n, len(sources)), dtype=np.int64)
    frontier[sources, np.arange(len(sources))] = 1
    total = np.zeros_like(frontier)
    shadow = frontier.astype(float)
    shadow_total = np.zeros_like(shadow)
    exact = True
    for _ in range(max_length):
        shadow = A @ shadow
        shadow_total += shadow
        if shadow_total.max(initial=0.0) >= _INT64_SAFE:
            exact = False
            break
        frontier = A @ frontier
        total += frontier
    if not exact:
        Aobj = A.astype(object)
        frontier = np.zeros((n, len(sources)), dtype=object)
        frontier[:] = 0
        frontier[sources, np.arange(len(sources))] = 1
        total = np.zeros((n, len(sources)), dtype=object)
        total[:] = 0
        for _ in range(max_length):
            frontier = Aobj.dot(frontier)
            total = total + frontier
    counts = np.empty((len(sources), len(targets)), dtype=object)
    for a in range(len(sources)):
        for b, t in enumerate(targets):
            counts[a, b] = int(total[t, a])
    return PathCountMatrix(sources, targets, counts, max_length, WALKS)


def count_simple_paths(net: DirectedNetwork, source: int, target: int, max_length: int) -> int:
    """Node-repetition-free directed paths of length ``1..max_length``.

    A path may not revisit its source, so ``source == target`` gives 0.
    """
    if max_length > MAX_SIMPLE_PATH_LENGTH:
        raise ValueError(f"simple path search is limited to length {MAX_SIMPLE_PATH_LENGTH}")
    if source == target:
        return 0
    succ = [np.flatnonzero(col).tolist() for col in (net.adjacency != 0).T]
    visited = np.zeros(net.n, dtype=bool)
    visited[source] = True
    count = 0
    # iterative DFS; each frame is (node, depth, successor iterator)
    stack = [(source, 0, iter(succ[source]))]
    while stack:
        node, depth, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            if node != source:
                visited[node] = False
            continue
        if visited[nxt]:
            continue
        if nxt == target:
            count += 1
            continue
        if depth + 1 < max_length:
            visited[nxt] = True
            stack.append((nxt, depth + 1, iter(succ[nxt])))
    return count


def simple_path_matrix(net: DirectedNetwork, sources, targets, max_length: int) -> PathCountMatrix:
    counts = np.empty((len(sources), len(targets)), dtype=object)
    for a, s in enumerate(sources):
        for b, t in enumerate(targets):
            counts[a, b] = count_simple_paths(net, int(s), int(t), max_length)
    return PathCountMatrix(np.asarray(sources), np.asarray(targets), counts, max_length,
                           SIMPLE_PATHS)


def class_mean_importance(ranking: ImportanceRanking, classes: Sequence[str]) -> dict[str, float]:
    """Mean importance per class; ``classes`` is indexed by network node."""
    classes = list(classes)
    groups: dict[str, list[float]] = {}
    for node, value in zip(ranking.nodes, ranking.values):
        if node >= len(classes):
            raise ValueError(f"node {node} has no class")
        groups.setdefault(classes[node], []).append(float(value))
    for cls in dict.fromkeys(classes):
        if cls not in groups:
            raise ValueError(f"class {cls!r} has no ranked nodes")
    return {cls: float(np.mean(v)) for cls, v in groups.items()}
