"""Quasi-static bifurcation sweeps, tipping/recovery points and nonlinear ranking."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import (
    DEFAULT_DT,
    DEFAULT_EPS,
    DEFAULT_T_MAX,
    HEALTHY_INITIAL_VALUE,
    Model,
    PinSpec,
    integrate_steady,
)
from .ranking import DegenerateRankingError, ImportanceRanking

DEFAULT_THRESHOLD = 0.1
DEFAULT_HELD_VALUE = 1.5
DESCENDING, ASCENDING = "descending", "ascending"


def make_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive evenly spaced grid from ``start`` to ``stop`` (either order)."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(round(abs(stop - start) / step)) + 1
    sign = 1.0 if stop >= start else -1.0
    # rounding keeps 0.05 * k free of accumulated binary noise
    return np.round(start + sign * step * np.arange(count), 12)


def _check_monotone(grid, direction):
    diffs = np.diff(grid)
    if direction == DESCENDING and not (diffs < 0).all():
        raise ValueError("descending sweep needs a strictly decreasing grid")
    if direction == ASCENDING and not (diffs > 0).all():
        raise ValueError("ascending sweep needs a strictly increasing grid")


@dataclass(frozen=True)
class SweepResult:
    grid: np.ndarray
    states: np.ndarray
    direction: str
    converged: np.ndarray
    parameter_name: str
    tipping_point: Optional[float] = None
    pin: Optional[PinSpec] = None


@dataclass(frozen=True)
class RecoveryTable:
    """Recovery point per controlled node; ``None`` marks no recovery on the grid."""

    nodes: np.ndarray
    points: tuple[Optional[float], ...]
    parameter_name: str
    held_value: float
    threshold: float


def sweep(
    model: Model,
    grid: Sequence[float],
    direction: str = DESCENDING,
    x0=None,
    threshold: float = DEFAULT_THRESHOLD,
    pin: Optional[PinSpec] = None,
    dt: float = DEFAULT_DT,
    eps: float = DEFAULT_EPS,
    t_max: float = DEFAULT_T_MAX,
    stop_when=None,
) -> SweepResult:
    """Trace the steady-state branch along ``grid`` by quasi-static continuation.

    Each grid point starts from the previous steady state.  ``stop_when`` is an
    optional predicate on a steady state; the sweep ends after the first state
    satisfying it.
    """
    grid = np.asarray(grid, dtype=float)
    _check_monotone(grid, direction)
    x = np.full(model.n, HEALTHY_INITIAL_VALUE) if x0 is None else np.asarray(x0, float)
    states, flags = [], []
    for value in grid:
        x, ok = integrate_steady(model.with_parameter(value), x, dt, eps, t_max, pin)
        states.append(x)
        flags.append(ok)
        if stop_when is not None and stop_when(x):
            break
    result = SweepResult(grid[: len(states)], np.array(states), direction,
                         np.array(flags), model.parameter_name, None, pin)
    if direction == DESCENDING:
        tp = detect_tipping(result, threshold)
        result = SweepResult(result.grid, result.states, direction, result.converged,
                             result.parameter_name, tp, pin)
    return result


def detect_tipping(result: SweepResult, threshold: float = DEFAULT_THRESHOLD) -> Optional[float]:
    """First grid value at which every abundance is below ``threshold``."""
    if result.direction != DESCENDING:
        raise ValueError("tipping points are defined on descending sweeps")
    collapsed = (result.states < threshold).all(axis=1)
    hits = np.flatnonzero(collapsed)
    return float(result.grid[hits[0]]) if hits.size else None


def extinction_state(model: Model, grid_descending, **kw) -> np.ndarray:
    """Steady state at the bottom of an uncontrolled descending sweep."""
    return sweep(model, grid_descending, DESCENDING, **kw).states[-1]


def recovery_point(
    model: Model,
    node: int,
    held_value: float,
    grid_ascending,
    threshold: float = DEFAULT_THRESHOLD,
    start_state=None,
    dt: float = DEFAULT_DT,
    eps: float = DEFAULT_EPS,
    t_max: float = DEFAULT_T_MAX,
) -> Optional[float]:
    """Smallest grid value at which all unpinned nodes reach ``threshold``.

    ``node`` is held at ``held_value`` during an ascending quasi-static sweep
    that starts from ``start_state`` (the extinction state at the grid minimum
    when omitted).  Returns ``None`` if the grid maximum is reached first.
    """
    if int(node) not in set(model.controllable_nodes().tolist()):
        raise IndexError(f"node {node} cannot be controlled in this model")
    grid_ascending = np.asarray(grid_ascending, dtype=float)
    if start_state is None:
        start_state = extinction_state(model, grid_ascending[::-1], dt=dt, eps=eps, t_max=t_max)
    others = np.ones(model.n, dtype=bool)
    others[node] = False

    def recovered(x):
        return bool((x[others] >= threshold).all())

    result = sweep(model, grid_ascending, ASCENDING, start_state, threshold,
                   PinSpec(int(node), held_value), dt, eps, t_max, stop_when=recovered)
    return float(result.grid[-1]) if recovered(result.states[-1]) else None


def _recovery_task(args):
    model, node, held_value, grid, threshold, start, dt, eps, t_max = args
    return recovery_point(model, node, held_value, grid, threshold, start, dt, eps, t_max)


def recovery_table(
    model: Model,
    grid_ascending,
    held_value: float = DEFAULT_HELD_VALUE,
    threshold: float = DEFAULT_THRESHOLD,
    nodes=None,
    start_state=None,
    workers: int = 1,
    dt: float = DEFAULT_DT,
    eps: float = DEFAULT_EPS,
    t_max: float = DEFAULT_T_MAX,
) -> RecoveryTable:
    """Recovery point for every controllable node, sharing one extinction state."""
    grid_ascending = np.asarray(grid_ascending, dtype=float)
    nodes = model.controllable_nodes() if nodes is None else np.asarray(nodes, dtype=int)
    if start_state is None:
        start_state = extinction_state(model, grid_ascending[::-1], dt=dt, eps=eps, t_max=t_max)
    tasks = [(model, int(i), held_value, grid_ascending, threshold, start_state, dt, eps, t_max)
             for i in nodes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_recovery_task, tasks))
    else:
        points = [_recovery_task(t) for t in tasks]
    return RecoveryTable(nodes, tuple(points), model.parameter_name, held_value, threshold)


def rank_nonlinear(table: RecoveryTable, labels: Sequence[str] = ()) -> ImportanceRanking:
    """Min-max importance ``(max - r_i) / (max - min)`` over finite recovery points.

    Nodes without recovery get importance 0.
    """
    finite = [p for p in table.points if p is not None]
    if not finite:
        raise DegenerateRankingError("no node recovers the system on the grid")
    hi, lo = max(finite), min(finite)
    if hi == lo:
        raise DegenerateRankingError(
            f"all {len(finite)} finite recovery points equal {hi}; ranking undefined"
        )
    values = [0.0 if p is None else (hi - p) / (hi - lo) for p in table.points]
    return ImportanceRanking(
        "nonlinear", table.nodes, np.array(values), tuple(labels),
        metadata={"parameter": table.parameter_name, "max": hi, "min": lo,
                  "held_value": table.held_value, "threshold": table.threshold},
    )


def recovery_value(point: Optional[float]) -> float:
    return math.nan if point is None else point
