"""Statistics comparing nonlinear and linear importance rankings."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .ranking import ImportanceRanking


class ScopeMismatchError(ValueError):
    pass


def pearson(x, y) -> float:
    """Sample Pearson correlation; raises on zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length vectors with at least 2 entries")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("Pearson correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def cosine_distance(x, y) -> float:
    """``1 - x.y / (|x| |y|)``; raises for a zero vector."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("vectors must have equal length")
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("cosine distance undefined for a zero vector")
    cos = float(x @ y) / (nx * ny)
    return 1.0 - min(1.0, max(-1.0, cos))


@dataclass(frozen=True)
class ComparisonRecord:
    network: str
    pearson: float
    cosine_distance: float
    scope: str
    n_nodes: int
    n_samples: int
    fingerprint: str

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ReportRow:
    node: int
    label: str
    degree: int
    nonlinear: float
    linear: float
    in_scope: bool


def fingerprint(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def degree_order(degrees: Sequence[int], seed=0) -> np.ndarray:
    """Indices sorted by degree descending; equal degrees in seeded random order."""
    degrees = np.asarray(degrees)
    tiebreak = np.random.default_rng(seed).permutation(len(degrees))
    return np.lexsort((tiebreak, -degrees))


def build_report(
    nl: ImportanceRanking,
    lin: ImportanceRanking,
    degrees: Sequence[int],
    labels: Sequence[str] = (),
    network: str = "",
    seed=0,
    params: dict | None = None,
    scope: str = "nonlinear",
):
    """Compare two rankings on the nonlinear ranking's node scope.

    ``degrees`` and ``labels`` are indexed by network node.  Nodes ranked
    only by the linear ranking appear in the table flagged out of scope.

    Returns
    -------
    record : ComparisonRecord
    rows : list of ReportRow
        In-scope nodes first, each block sorted by degree descending with
        seeded random order among equal degrees.
    """
    if nl.kind != "nonlinear" or lin.kind != "linear":
        raise ScopeMismatchError("expected one nonlinear and one linear ranking")
    scope_nodes = nl.nodes
    try:
        lin_scoped = lin.restrict(scope_nodes)
    except ValueError as exc:
        raise ScopeMismatchError(str(exc)) from None
    r = pearson(nl.values, lin_scoped.values)
    d = cosine_distance(nl.values, lin_scoped.values)
    record = ComparisonRecord(
        network, r, d, scope, int(len(scope_nodes)),
        int(lin.n_samples or 0), fingerprint(params or {}),
    )

    degrees = np.asarray(degrees)
    labels = list(labels) or [str(i) for i in range(len(degrees))]
    nl_val = dict(zip(nl.nodes.tolist(), nl.values.tolist()))
    lin_val = dict(zip(lin.nodes.tolist(), lin.values.tolist()))
    rows = []
    in_scope = [int(i) for i in scope_nodes]
    out_scope = [int(i) for i in lin.nodes if int(i) not in nl_val]
    for block in (in_scope, out_scope):
        if not block:
            continue
        order = degree_order(degrees[block], seed)
        for k in order:
            i = block[k]
            rows.append(ReportRow(i, labels[i], int(degrees[i]),
                                  nl_val.get(i, math.nan), lin_val.get(i, math.nan),
                                  i in nl_val))
    return record, rows
