"""Exact linear controllability of networks.

Minimum driver counts come from eigenvalue multiplicities of the adjacency
matrix: maximum geometric multiplicity for directed networks, maximum
algebraic multiplicity for undirected ones.  Driver sets are the rows left
out of a greedy row basis of ``lambda_M I - A``; different row orders give
different, equally minimal, sets.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .netio import DirectedNetwork, NetworkKind
from .ranking import ImportanceRanking

DEFAULT_RANK_TOL = 1e-10
CLUSTER_TOL_FACTOR = 1e-8
# absolute threshold on the singular values of W[D, :], W orthonormal
PBH_TOL = 1e-8
MAX_RETRIES = 32
ENUMERATION_LIMIT = 2_000_000
# radii tried when snapping split defective eigenvalues onto an exact value
_SNAP_RADII = (1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.25)


class ControllabilityError(RuntimeError):
    """A driver set consistent with the anchoring eigenvalue could not be made controllable."""


class EnumerationCapError(RuntimeError):
    pass


def _kind(kind) -> NetworkKind:
    return NetworkKind(kind.value if isinstance(kind, NetworkKind) else kind)


def _as_matrix(A) -> np.ndarray:
    if isinstance(A, DirectedNetwork):
        A = A.adjacency
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    if not np.isfinite(A).all():
        raise ValueError("matrix has non-finite entries")
    return A.astype(complex) if np.iscomplexobj(A) else A.astype(float)


def default_cluster_tol(A) -> float:
    A = _as_matrix(A)
    smax = np.linalg.norm(A, 2) if A.size else 0.0
    return CLUSTER_TOL_FACTOR * max(1.0, smax)


def numerical_rank(M: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Count singular values above ``rank_tol * sigma_max``."""
    if M.size == 0:
        return 0
    s = sla.svdvals(M)
    if s[0] == 0:
        return 0
    return int((s > rank_tol * s[0]).sum())


@dataclass(frozen=True)
class EigenCluster:
    value: complex
    algebraic: int
    geometric: int


@dataclass(frozen=True)
class SpectrumReport:
    clusters: tuple[EigenCluster, ...]
    n: int
    kind: NetworkKind
    cluster_tol: float
    rank_tol: float
    # left null-space bases of (lambda I - A), one per cluster
    left_null: tuple[np.ndarray, ...] = field(repr=False, compare=False, default=())

    @property
    def max_algebraic(self) -> int:
        return max(c.algebraic for c in self.clusters)

    @property
    def max_geometric(self) -> int:
        return max(c.geometric for c in self.clusters)

    def multiplicity(self, c: EigenCluster) -> int:
        return c.algebraic if self.kind is NetworkKind.UNDIRECTED else c.geometric

    def anchor_index(self) -> int:
        """Cluster with the largest multiplicity; ties go to the largest |lambda|."""
        def key(k):
            c = self.clusters[k]
            v = complex(c.value)
            return (self.multiplicity(c), round(abs(v), 9), round(v.real, 9), round(v.imag, 9))
        return max(range(len(self.clusters)), key=key)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind.value,
            "cluster_tol": self.cluster_tol,
            "rank_tol": self.rank_tol,
            "clusters": [
                {"re": complex(c.value).real, "im": complex(c.value).imag,
                 "algebraic": c.algebraic, "geometric": c.geometric}
                for c in self.clusters
            ],
        }


def _eigenvalues(A: np.ndarray, kind: NetworkKind) -> np.ndarray:
    if kind is NetworkKind.UNDIRECTED:
        return sla.eigvalsh(A).astype(complex)
    return sla.eigvals(A)


def _single_linkage(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group values whose chained pairwise distance is below ``tol``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = np.argsort(values.real, kind="stable")
    re = values.real[order]
    for a in range(n):
        b = a + 1
        while b < n and re[b] - re[a] < tol:
            if abs(values[order[a]] - values[order[b]]) < tol:
                parent[find(order[a])] = find(order[b])
            b += 1
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def _snap_candidates(A: np.ndarray, eig: np.ndarray) -> list[float]:
    cands = {0.0}
    if not np.iscomplexobj(A) and np.array_equal(A, np.round(A)):
        near = eig[np.abs(eig.imag) < _SNAP_RADII[-1]]
        cands.update(float(m) for m in np.round(near.real))
    return sorted(cands)


def _is_split_eigenvalue(offsets: np.ndarray, scale: float) -> bool:
    """True if ``offsets`` look like one eigenvalue split by rounding.

    A perturbed Jordan block spreads its eigenvalues on a ring whose power
    sums ``sum(offset**p)`` stay near zero for ``p`` below the block size;
    distinct eigenvalues (e.g. a +/- pair) fail at some low power.
    """
    for p in range(1, min(len(offsets), 6) + 1):
        if abs(np.sum(offsets ** p)) > CLUSTER_TOL_FACTOR * scale ** p:
            return False
    return True


def _null_basis(A: np.ndarray, lam: complex, rank_tol: float):
    """Return (geometric multiplicity, left null basis) of ``lam I - A``."""
    n = A.shape[0]
    M = lam * np.eye(n) - A if lam != 0 else -A
    if np.isreal(lam) and not np.iscomplexobj(A):
        M = M.real
    U, s, _ = sla.svd(M)
    r = 0 if s[0] == 0 else int((s > rank_tol * s[0]).sum())
    return n - r, U[:, r:]


def spectrum_multiplicities(
    A,
    kind=NetworkKind.DIRECTED,
    cluster_tol: Optional[float] = None,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> SpectrumReport:
    """Cluster the spectrum and report algebraic and geometric multiplicities.

    Geometric multiplicity is ``n - rank(lambda I - A)``.  Numerically split
    defective eigenvalues (Jordan blocks) are merged onto 0, or onto an
    integer for integer matrices, when the split group's mean matches that
    value and the value is a genuine eigenvalue.
    """
    A = _as_matrix(A)
    kind = _kind(kind)
    n = A.shape[0]
    if kind is NetworkKind.UNDIRECTED and not np.allclose(A, A.conj().T, atol=1e-12, rtol=0):
        raise ValueError("undirected analysis needs a symmetric matrix")
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(A)
    try:
        eig = _eigenvalues(A, kind)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc

    scale = max(1.0, float(np.linalg.norm(A, 2))) if n else 1.0
    remaining = np.ones(n, dtype=bool)
    found: list[tuple[complex, np.ndarray]] = []
    # symmetric eigensolvers do not split eigenvalues, so only directed input is snapped
    candidates = _snap_candidates(A, eig) if kind is NetworkKind.DIRECTED else []
    for m in candidates:
        best = None
        for radius in _SNAP_RADII:
            members = np.flatnonzero(remaining & (np.abs(eig - m) < radius * scale))
            if members.size and _is_split_eigenvalue(eig[members] - m, scale):
                best = members
        if best is None:
            continue
        mu, _ = _null_basis(A, m, rank_tol)
        if mu >= 1:
            found.append((complex(m), best))
            remaining[best] = False
    rest = np.flatnonzero(remaining)
    for group in _single_linkage(eig[rest], cluster_tol):
        members = rest[group]
        value = eig[members].mean()
        if kind is NetworkKind.UNDIRECTED or abs(value.imag) < cluster_tol:
            value = complex(value.real, 0.0)
        found.append((value, members))

    found.sort(key=lambda vm: (vm[0].real, vm[0].imag))
    clusters, bases = [], []
    for value, members in found:
        mu, W = _null_basis(A, value, rank_tol)
        clusters.append(EigenCluster(value, int(members.size), int(mu)))
        bases.append(W)
    return SpectrumReport(tuple(clusters), n, kind, float(cluster_tol), float(rank_tol), tuple(bases))


def min_driver_count(A, kind=NetworkKind.DIRECTED, cluster_tol=None,
                     rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Maximum geometric (directed) or algebraic (undirected) multiplicity."""
    report = spectrum_multiplicities(A, kind, cluster_tol, rank_tol)
    return max(1, max(report.multiplicity(c) for c in report.clusters))


def dependent_row_basis(A, lam: complex, row_order: Sequence[int],
                        rank_tol: float = DEFAULT_RANK_TOL):
    """Greedy row basis of ``lam I - A`` scanned in ``row_order``.

    A row joins the basis iff it raises the rank of the rows taken so far;
    the rows left out are the driver rows.

    Returns
    -------
    basis : list of int
    drivers : list of int
    """
    A = _as_matrix(A)
    n = A.shape[0]
    if sorted(int(r) for r in row_order) != list(range(n)):
        raise ValueError("row_order must be a permutation of the rows")
    M = lam * np.eye(n) - A
    if not np.iscomplexobj(A) and complex(lam).imag == 0:
        M = M.real
    smax = sla.svdvals(M)[0] if n else 0.0
    tol = rank_tol * max(smax, np.finfo(float).tiny) * math.sqrt(n)
    Q = np.zeros((0, n), dtype=M.dtype)
    basis, drivers = [], []
    for r in row_order:
        v = M[int(r)].copy()
        for _ in range(2):  # second pass restores orthogonality
            v = v - (Q.conj() @ v) @ Q
        norm = np.linalg.norm(v)
        if norm > tol:
            Q = np.vstack([Q, v / norm])
            basis.append(int(r))
        else:
            drivers.append(int(r))
    return basis, drivers


def _dual_greedy(W: np.ndarray, order: Sequence[int], tol: float = PBH_TOL) -> list[int]:
    """Greedy independent rows of ``W`` in ``order``.

    Applied to the left null basis with the order reversed, this yields the
    complement of the greedy row basis of ``lambda I - A`` (matroid duality).
    """
    mu = W.shape[1]
    Q = np.zeros((0, mu), dtype=W.dtype)
    picked = []
    for r in order:
        if len(picked) == mu:
            break
        v = W[r].copy()
        for _ in range(2):
            v = v - (Q.conj() @ v) @ Q
        norm = np.linalg.norm(v)
        if norm > tol:
            Q = np.vstack([Q, v / norm])
            picked.append(int(r))
    return picked


@dataclass(frozen=True)
class ControllerSet:
    drivers: tuple[int, ...]
    anchor: complex

    @property
    def size(self) -> int:
        return len(self.drivers)


def input_matrix(n: int, drivers: Sequence[int]) -> np.ndarray:
    """``n x m`` matrix with one unit column per driver node."""
    drivers = list(drivers)
    if len(set(drivers)) != len(drivers):
        raise ValueError("driver nodes must be distinct")
    B = np.zeros((n, len(drivers)))
    B[drivers, np.arange(len(drivers))] = 1.0
    return B


def verify_controllable(A, drivers, kind=NetworkKind.DIRECTED, cluster_tol=None,
                        rank_tol: float = DEFAULT_RANK_TOL, report: Optional[SpectrumReport] = None) -> bool:
    """PBH test: ``rank(lambda I - A, B) = n`` at every clustered eigenvalue."""
    A = _as_matrix(A)
    if isinstance(drivers, ControllerSet):
        drivers = drivers.drivers
    drivers = list(drivers)
    if not drivers:
        raise ValueError("driver set must be nonempty")
    n = A.shape[0]
    if report is None:
        report = spectrum_multiplicities(A, kind, cluster_tol, rank_tol)
    B = input_matrix(n, drivers)
    for c in report.clusters:
        M = np.hstack([c.value * np.eye(n) - A, B])
        if c.value.imag == 0 and not np.iscomplexobj(A):
            M = M.real
        if numerical_rank(M, rank_tol) < n:
            return False
    return True


def kalman_rank(A, B, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank of ``(B, AB, ..., A^(n-1) B)``; small networks only."""
    A = _as_matrix(A)
    n = A.shape[0]
    if n > 12:
        raise ValueError("Kalman matrix is too ill-conditioned beyond n = 12")
    B = np.asarray(B, dtype=A.dtype)
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return numerical_rank(np.hstack(blocks), rank_tol)


class _Sampler:
    """Precomputed spectrum data shared by all samples of one matrix."""

    def __init__(self, A, kind, cluster_tol=None, rank_tol=DEFAULT_RANK_TOL,
                 max_retries: int = MAX_RETRIES):
        if max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        self.max_retries = int(max_retries)
        self.A = _as_matrix(A)
        self.kind = _kind(kind)
        self.report = spectrum_multiplicities(self.A, self.kind, cluster_tol, rank_tol)
        self.n_drivers = max(1, max(self.report.multiplicity(c) for c in self.report.clusters))
        self.anchor = self.report.anchor_index()
        anchor = self.report.clusters[self.anchor]
        if anchor.geometric != self.n_drivers:
            raise ControllabilityError(
                f"anchor eigenvalue {anchor.value} has geometric multiplicity "
                f"{anchor.geometric} but N_D = {self.n_drivers} (numerical rank inconsistency)"
            )

    def failing_clusters(self, drivers) -> list[EigenCluster]:
        bad = []
        for c, W in zip(self.report.clusters, self.report.left_null):
            if W.shape[1] == 0:
                continue
            sub = W[list(drivers)]
            if sub.shape[0] < sub.shape[1] or sla.svdvals(sub)[-1] <= PBH_TOL:
                bad.append(c)
        return bad

    def sample(self, rng: np.random.Generator) -> ControllerSet:
        W = self.report.left_null[self.anchor]
        value = self.report.clusters[self.anchor].value
        failures: list[EigenCluster] = []
        for _ in range(self.max_retries):
            order = rng.permutation(self.A.shape[0])
            drivers = _dual_greedy(W, order[::-1])
            if len(drivers) != W.shape[1]:
                raise ControllabilityError("left null basis lost rank during elimination")
            failures = self.failing_clusters(drivers)
            if not failures:
                return ControllerSet(tuple(sorted(drivers)), value)
        detail = ", ".join(f"{c.value:.6g} (mu={c.geometric})" for c in failures)
        raise ControllabilityError(
            f"no {self.n_drivers}-node set anchored at lambda={value:.6g} passed PBH "
            f"after {self.max_retries} permutations; failing eigenvalues: {detail}. "
            f"Valid sets may still exist if they are rare; raise max_retries to search longer"
        )


def sample_controller_set(A, kind=NetworkKind.DIRECTED, seed=None, cluster_tol=None,
                          rank_tol: float = DEFAULT_RANK_TOL,
                          max_retries: int = MAX_RETRIES) -> ControllerSet:
    """One minimum driver set from a uniformly random row elimination order.

    The distribution is that of greedy-basis complements under a uniform row
    permutation; it is not uniform over all minimum driver sets in general.
    """
    sampler = _Sampler(A, kind, cluster_tol, rank_tol, max_retries)
    return sampler.sample(np.random.default_rng(seed))


def _sample_chunk(args):
    sampler, seeds = args
    return [sampler.sample(np.random.default_rng(s)) for s in seeds]


def sample_controller_sets(A, kind=NetworkKind.DIRECTED, n_samples: int = 1000, seed=0,
                           cluster_tol=None, rank_tol: float = DEFAULT_RANK_TOL,
                           workers: int = 1, max_retries: int = MAX_RETRIES) -> list[ControllerSet]:
    """``n_samples`` driver sets; sample ``k`` always uses the ``k``-th spawned seed.

    Output does not depend on ``workers``.
    """
    sampler = _Sampler(A, kind, cluster_tol, rank_tol, max_retries)
    seeds = np.random.SeedSequence(seed).spawn(n_samples)
    if workers <= 1:
        return _sample_chunk((sampler, seeds))
    chunks = [seeds[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_sample_chunk, [(sampler, c) for c in chunks]))
    out: list[Optional[ControllerSet]] = [None] * n_samples
    for w, part in enumerate(parts):
        out[w::workers] = part
    return out


def linear_importance(A, kind=NetworkKind.DIRECTED, n_samples: int = 1000, seed=0,
                      cluster_tol=None, rank_tol: float = DEFAULT_RANK_TOL, workers: int = 1,
                      labels: Sequence[str] = (), return_sets: bool = False,
                      max_retries: int = MAX_RETRIES):
    """Fraction of sampled minimum driver sets containing each node.

    Membership counts sum to ``N_D * n_samples`` exactly.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    A = _as_matrix(A)
    sets = sample_controller_sets(A, kind, n_samples, seed, cluster_tol, rank_tol, workers,
                                  max_retries)
    counts = np.zeros(A.shape[0], dtype=np.int64)
    for s in sets:
        counts[list(s.drivers)] += 1
    sampler_nd = sets[0].size
    report_tol = cluster_tol if cluster_tol is not None else default_cluster_tol(A)
    ranking = ImportanceRanking(
        "linear", np.arange(A.shape[0]), counts / n_samples, tuple(labels), counts, n_samples,
        metadata={"n_drivers": int(sampler_nd), "anchor": [sets[0].anchor.real, sets[0].anchor.imag],
                  "seed": seed, "cluster_tol": float(report_tol), "rank_tol": rank_tol,
                  "n_samples": n_samples, "max_retries": int(max_retries)},
    )
    return (ranking, sets) if return_sets else ranking


def enumerate_controller_sets(A, kind=NetworkKind.DIRECTED, cap: int = 10_000,
                              cluster_tol=None, rank_tol: float = DEFAULT_RANK_TOL) -> list[ControllerSet]:
    """Every driver set obtainable as a row-basis complement at the anchor eigenvalue
    that also passes the full PBH check."""
    A = _as_matrix(A)
    sampler = _Sampler(A, kind, cluster_tol, rank_tol)
    W = sampler.report.left_null[sampler.anchor]
    n, mu = W.shape
    if math.comb(n, mu) > ENUMERATION_LIMIT:
        raise EnumerationCapError(f"C({n}, {mu}) candidate sets exceed the enumeration limit")
    value = sampler.report.clusters[sampler.anchor].value
    found = []
    for combo in itertools.combinations(range(n), mu):
        if sla.svdvals(W[list(combo)])[-1] <= PBH_TOL:
            continue
        if not verify_controllable(A, combo, sampler.kind, report=sampler.report, rank_tol=rank_tol):
            continue
        found.append(ControllerSet(combo, value))
        if len(found) > cap:
            raise EnumerationCapError(f"more than {cap} controller sets")
    return found
