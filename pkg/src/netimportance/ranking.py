from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class DegenerateRankingError(ValueError):
    """All finite recovery points coincide, so the min-max ranking is undefined."""


@dataclass(frozen=True)
class ImportanceRanking:
    """Per-node importance values in [0, 1].

    ``nodes`` are indices into the source network; ``values[k]`` belongs to
    ``nodes[k]``.  Linear rankings also carry the raw membership ``counts``
    and the sample count so the driver-sum identity can be checked exactly.
    """

    kind: str
    nodes: np.ndarray
    values: np.ndarray
    labels: tuple[str, ...] = ()
    counts: Optional[np.ndarray] = None
    n_samples: Optional[int] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("nonlinear", "linear"):
            raise ValueError(f"unknown ranking kind {self.kind!r}")
        values = np.asarray(self.values, dtype=float)
        if values.shape != np.shape(self.nodes):
            raise ValueError("one value per node required")
        if ((values < 0) | (values > 1)).any():
            raise ValueError("importance values must lie in [0, 1]")
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=int))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))

    def restrict(self, nodes) -> "ImportanceRanking":
        """Sub-ranking on ``nodes`` (network indices), in the given order."""
        pos = {int(n): k for k, n in enumerate(self.nodes)}
        try:
            idx = np.array([pos[int(n)] for n in nodes], dtype=int)
        except KeyError as exc:
            raise ValueError(f"node {exc.args[0]} is not ranked") from None
        return ImportanceRanking(
            self.kind,
            self.nodes[idx],
            self.values[idx],
            tuple(self.labels[i] for i in idx) if self.labels else (),
            None if self.counts is None else self.counts[idx],
            self.n_samples,
            dict(self.metadata),
        )

    def as_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "nodes": self.nodes.tolist(),
            "labels": list(self.labels),
            "values": self.values.tolist(),
        }
        if self.counts is not None:
            out["counts"] = self.counts.tolist()
            out["n_samples"] = self.n_samples
        out["metadata"] = self.metadata
        return out
