"""Small synthetic networks for tests, benchmarks and smoke runs."""
from __future__ import annotations

import numpy as np

from .netio import BipartiteNetwork, DirectedNetwork, NetworkKind


def nested_bipartite(n_pollinators: int, n_plants: int, n_links: int, seed: int = 0) -> BipartiteNetwork:
    """Nested pollinator-plant incidence with exactly ``n_links`` links.

    The most generalist plant is visited by every pollinator and the most
    generalist pollinator visits every plant, so no species is isolated.
    Remaining links fill the cells closest to the generalist corner, with a
    seeded jitter to break the perfect nesting.
    """
    base = n_pollinators + n_plants - 1
    if not base <= n_links <= n_pollinators * n_plants:
        raise ValueError(f"n_links must lie in [{base}, {n_pollinators * n_plants}]")
    rng = np.random.default_rng(seed)
    inc = np.zeros((n_pollinators, n_plants))
    inc[:, 0] = 1
    inc[0, :] = 1
    i, k = np.meshgrid(np.arange(n_pollinators), np.arange(n_plants), indexing="ij")
    score = (i + 0.5) / n_pollinators + (k + 0.5) / n_plants + 0.3 * rng.random(inc.shape)
    score[inc == 1] = np.inf
    extra = np.argsort(score, axis=None, kind="stable")[: n_links - base]
    inc.flat[extra] = 1
    return BipartiteNetwork(
        inc,
        [f"A{r + 1}" for r in range(n_pollinators)],
        [f"P{c + 1}" for c in range(n_plants)],
    )


def star(n_leaves: int) -> DirectedNetwork:
    """Undirected star; the hub is node 0."""
    adj = np.zeros((n_leaves + 1, n_leaves + 1))
    adj[0, 1:] = adj[1:, 0] = 1
    return DirectedNetwork(adj, ["hub"] + [f"leaf{i}" for i in range(1, n_leaves + 1)],
                           kind=NetworkKind.UNDIRECTED)


def complete_graph(n: int) -> DirectedNetwork:
    adj = np.ones((n, n)) - np.eye(n)
    return DirectedNetwork(adj, [f"v{i}" for i in range(n)], kind=NetworkKind.UNDIRECTED)


def random_graph(n: int, p: float, directed: bool, seed, weighted: bool = False) -> DirectedNetwork:
    """Erdos-Renyi graph without self-loops; weights uniform in (0.5, 1.5) if ``weighted``."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    if not directed:
        mask = np.triu(mask, 1)
        mask = mask | mask.T
    weights = rng.uniform(0.5, 1.5, (n, n)) if weighted else np.ones((n, n))
    if not directed:
        weights = np.triu(weights, 1) + np.triu(weights, 1).T
    kind = NetworkKind.DIRECTED if directed else NetworkKind.UNDIRECTED
    return DirectedNetwork(np.where(mask, weights, 0.0), [f"v{i}" for i in range(n)], kind=kind)
