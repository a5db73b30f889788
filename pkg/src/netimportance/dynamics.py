"""Nonlinear network dynamics and the steady-state integrator.

Mutualistic (Holling type II) pollinator-plant dynamics::

    dA_i/dt = A_i (alpha_A - sum_j beta_ij A_j + M_i / (1 + h M_i)) + mu_A
    M_i     = sum_k gamma_ik P_k,   gamma_ik = eps_ik * gamma0 / k_i**t

and symmetrically for plants.  Gene regulatory (Michaelis-Menten) dynamics::

    dx_i/dt = -B x_i**f + C sum_{j -> i} x_j**h / (1 + x_j**h)

Both are integrated with classical fixed-step RK4 until the largest absolute
derivative falls below ``eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy.sparse import csr_matrix

from . import kernels
from .netio import BipartiteNetwork, DirectedNetwork

DEFAULT_DT = 0.01
DEFAULT_EPS = 1e-10
DEFAULT_T_MAX = 5000.0
HEALTHY_INITIAL_VALUE = 2.0


class DivergenceError(RuntimeError):
    """The integrator produced a non-finite state."""


@dataclass(frozen=True)
class MutualisticParams:
    h: float = 0.2
    t: float = 0.5
    beta_intra: float = 1.0
    beta_inter: float = 0.0
    alpha_A: float = -0.3
    alpha_P: float = -0.3
    mu_A: float = 1e-4
    mu_P: float = 1e-4
    gamma0: float = 1.0

    def __post_init__(self):
        if self.h < 0 or self.mu_A < 0 or self.mu_P < 0 or self.gamma0 < 0:
            raise ValueError("h, mu_A, mu_P and gamma0 must be nonnegative")


@dataclass(frozen=True)
class GeneParams:
    B: float = 1.0
    f: float = 1.0
    h_hill: float = 2.0
    C: float = 1.0

    def __post_init__(self):
        if self.B <= 0 or self.f <= 0 or self.h_hill < 1 or self.C < 0:
            raise ValueError("need B > 0, f > 0, h_hill >= 1, C >= 0")


@dataclass(frozen=True)
class PinSpec:
    """Hold ``node`` at ``value`` for the whole integration."""

    node: int
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("pinned value must be nonnegative")


def _csr_parts(m: np.ndarray):
    s = csr_matrix(m)
    s.sort_indices()
    return s.indptr.astype(np.int64), s.indices.astype(np.int64), s.data.astype(float)


@dataclass(frozen=True, eq=False)
class MutualisticModel:
    """Mutualistic dynamics bound to a network; ``gamma0`` is the sweep parameter."""

    net: BipartiteNetwork
    params: MutualisticParams = field(default_factory=MutualisticParams)
    parameter_name = "gamma0"

    def __post_init__(self):
        na, npl = self.net.n_pollinators, self.net.n_plants
        inc = self.net.incidence
        # unit-strength couplings; scaled by gamma0 at evaluation
        g = np.zeros((na + npl, na + npl))
        g[:na, na:] = inc / self.net.pollinator_degrees()[:, None] ** self.params.t
        g[na:, :na] = inc.T / self.net.plant_degrees()[:, None] ** self.params.t
        indptr, indices, data = _csr_parts(g)
        p = self.params
        object.__setattr__(self, "_indptr", indptr)
        object.__setattr__(self, "_indices", indices)
        object.__setattr__(self, "_unit_data", data)
        object.__setattr__(self, "_guild", np.r_[np.zeros(na, np.int64), np.ones(npl, np.int64)])
        object.__setattr__(self, "_alpha", np.r_[np.full(na, p.alpha_A), np.full(npl, p.alpha_P)])
        object.__setattr__(self, "_mu", np.r_[np.full(na, p.mu_A), np.full(npl, p.mu_P)])

    @property
    def n(self) -> int:
        return self.net.n_pollinators + self.net.n_plants

    @property
    def parameter(self) -> float:
        return self.params.gamma0

    def with_parameter(self, value: float) -> "MutualisticModel":
        return MutualisticModel(self.net, replace(self.params, gamma0=float(value)))

    def controllable_nodes(self) -> np.ndarray:
        """Only pollinators may be pinned."""
        return np.arange(self.net.n_pollinators)

    def _args(self):
        p = self.params
        return (self._guild, self._alpha, self._mu, p.beta_intra, p.beta_inter, p.h,
                self._indptr, self._indices, self._unit_data * p.gamma0)

    def derivative(self, x, backend=None) -> np.ndarray:
        return kernels.get_backend(backend).mutualistic_rhs(np.asarray(x, float), *self._args())

    def _steady(self, x0, dt, eps, max_steps, pin_index, pin_value, backend):
        return kernels.get_backend(backend).steady_mutualistic(
            x0, *self._args(), dt, eps, max_steps, pin_index, pin_value
        )


@dataclass(frozen=True, eq=False)
class GeneModel:
    """Gene regulatory dynamics bound to a network; ``C`` is the sweep parameter."""

    net: DirectedNetwork
    params: GeneParams = field(default_factory=GeneParams)
    parameter_name = "C"

    def __post_init__(self):
        indptr, indices, data = _csr_parts(self.net.adjacency)
        object.__setattr__(self, "_indptr", indptr)
        object.__setattr__(self, "_indices", indices)
        object.__setattr__(self, "_data", data)

    @property
    def n(self) -> int:
        return self.net.n

    @property
    def parameter(self) -> float:
        return self.params.C

    def with_parameter(self, value: float) -> "GeneModel":
        return GeneModel(self.net, replace(self.params, C=float(value)))

    def controllable_nodes(self) -> np.ndarray:
        return np.arange(self.net.n)

    def _args(self):
        p = self.params
        return (p.B, p.f, p.h_hill, p.C, self._indptr, self._indices, self._data)

    def derivative(self, x, backend=None) -> np.ndarray:
        return kernels.get_backend(backend).gene_rhs(np.asarray(x, float), *self._args())

    def _steady(self, x0, dt, eps, max_steps, pin_index, pin_value, backend):
        return kernels.get_backend(backend).steady_gene(
            x0, *self._args(), dt, eps, max_steps, pin_index, pin_value
        )


Model = Union[MutualisticModel, GeneModel]


def _check_state(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"state has shape {x.shape}, expected ({n},)")
    return x


def mutualistic_derivative(state, params: MutualisticParams, net: BipartiteNetwork) -> np.ndarray:
    model = MutualisticModel(net, params)
    return model.derivative(_check_state(state, model.n))


def gene_derivative(state, params: GeneParams, net: DirectedNetwork) -> np.ndarray:
    model = GeneModel(net, params)
    return model.derivative(_check_state(state, model.n))


def integrate_steady(
    model: Model,
    x0,
    dt: float = DEFAULT_DT,
    eps: float = DEFAULT_EPS,
    t_max: float = DEFAULT_T_MAX,
    pin: Optional[PinSpec] = None,
    backend: Optional[str] = None,
) -> tuple[np.ndarray, bool]:
    """Integrate with RK4 until ``max|dx/dt| < eps`` or ``t_max`` is reached.

    Negative entries are clipped to zero after every step.  A pinned node is
    reset to its held value after every step and has zero derivative.

    Returns
    -------
    state : ndarray
    converged : bool

    Raises
    ------
    DivergenceError
        If the state becomes non-finite.
    """
    if dt <= 0 or eps <= 0:
        raise ValueError("dt and eps must be positive")
    x0 = _check_state(x0, model.n)
    pin_index, pin_value = -1, 0.0
    if pin is not None:
        if not 0 <= pin.node < model.n:
            raise IndexError(f"pinned node {pin.node} out of range")
        pin_index, pin_value = int(pin.node), float(pin.value)
    max_steps = int(math.ceil(t_max / dt))
    x, status, _ = model._steady(x0, float(dt), float(eps), max_steps, pin_index,
                                 pin_value, backend)
    if status == kernels.DIVERGED:
        raise DivergenceError(
            f"non-finite state at {model.parameter_name}={model.parameter}"
        )
    return x, status == kernels.CONVERGED
