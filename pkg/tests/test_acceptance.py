"""Acceptance suite: one test per criterion, each printing a single status line.

Every network family, seed and sample size below is fixed in advance; the
status lines are collected into the pytest terminal summary.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import data_path, record_criterion
from netimportance.cli import main
from netimportance.compare import cosine_distance, pearson
from netimportance.connectome import count_simple_paths, count_walks
from netimportance.dynamics import MutualisticModel, MutualisticParams, integrate_steady
from netimportance.linctrl import (
    ControllabilityError,
    linear_importance,
    min_driver_count,
    sample_controller_sets,
    verify_controllable,
)
from netimportance.netio import (
    BipartiteNetwork,
    NetworkKind,
    bipartite_to_adjacency,
    giant_strong_component,
    input_connected_core,
    read_edge_list,
    read_incidence,
    serialize_incidence,
)
from netimportance.synthetic import complete_graph, nested_bipartite, random_graph, star
from oracles import (
    brute_force_min_drivers_exact,
    count_simple_paths_recursive,
    count_walks_dfs,
    exact_kalman_rank,
)

SEED = 0


def settle(number, ok, detail, skip=False):
    if skip:
        record_criterion(number, "SKIP", detail)
        pytest.skip(detail)
    record_criterion(number, "PASS" if ok else "FAIL", detail)
    assert ok, detail


def run_cli(*args):
    return main([str(a) for a in args])


# ------------------------------------------------------------------ 1

def test_criterion_01_driver_sum_identity():
    nets = [("star(5)", star(5)), ("K_6", complete_graph(6))]
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(5, 51))
        nets.append((f"random#{seed}", random_graph(n, float(rng.uniform(0.05, 0.3)),
                                                    seed % 2 == 0, seed)))
    for key in ("network_a", "gene"):
        path = data_path(key)
        if path is not None:
            net = (bipartite_to_adjacency(read_incidence(path)) if key == "network_a"
                   else read_edge_list(path))
            nets.append((key, net))
    checked, violations, unsampled = 0, [], []
    for name, net in nets:
        nd = min_driver_count(net.adjacency, net.kind)
        for F in (1, 10, 1000):
            try:
                r = linear_importance(net.adjacency, net.kind, F, SEED)
            except ControllabilityError:
                unsampled.append(name)
                break
            checked += 1
            if int(r.counts.sum()) != nd * F or not math.isclose(r.values.sum(), nd, abs_tol=1e-9):
                violations.append((name, F))
    detail = (f"sum R_L = N_D exact on {checked - len(violations)}/{checked} (network, F) runs; "
              f"{len(unsampled)} networks have no size-N_D unit-driver set found "
              f"(ControllabilityError, see criterion 2)")
    settle(1, not violations, detail)


# ------------------------------------------------------------------ 2

def test_criterion_02_oracle_equivalence():
    t0 = time.perf_counter()
    mismatches, sampled, bad_sets, sample_errors = [], 0, 0, 0
    n_networks = 150
    for seed in range(n_networks):
        n = int(np.random.default_rng(seed).integers(2, 9))
        directed = seed % 2 == 0
        net = random_graph(n, [0.2, 0.35, 0.5][seed % 3], directed, seed)
        nd = min_driver_count(net.adjacency, net.kind)
        k, _ = brute_force_min_drivers_exact(net.adjacency)
        if nd != k:
            mismatches.append((seed, n, "directed" if directed else "undirected", nd, k))
        try:
            sets = sample_controller_sets(net.adjacency, net.kind, 20, seed)
        except ControllabilityError:
            sample_errors += 1
            continue
        for s in sets:
            sampled += 1
            if exact_kalman_rank(net.adjacency, s.drivers) != n or \
                    not verify_controllable(net.adjacency, s, net.kind):
                bad_sets += 1
    elapsed = time.perf_counter() - t0
    detail = (f"N_D equals brute-force minimum on {n_networks - len(mismatches)}/{n_networks} "
              f"random networks (first mismatches {mismatches[:3]}); "
              f"{sampled - bad_sets}/{sampled} sampled sets verify; "
              f"{sample_errors} networks raised ControllabilityError; {elapsed:.1f}s")
    settle(2, not mismatches and bad_sets == 0 and elapsed < 300, detail)


# ------------------------------------------------------------------ 3

def test_criterion_03_analytic_multiplicities():
    problems = []
    for n in range(2, 9):
        if min_driver_count(complete_graph(n).adjacency, NetworkKind.UNDIRECTED) != n - 1:
            problems.append(f"K_{n}")
    worst = 0.0
    for m in range(2, 9):
        A = star(m).adjacency
        if min_driver_count(A, NetworkKind.UNDIRECTED) != m - 1:
            problems.append(f"star({m}) N_D")
        r = linear_importance(A, NetworkKind.UNDIRECTED, 1000, SEED)
        dev = max(abs(r.values[0]), np.max(np.abs(r.values[1:] - (m - 1) / m)))
        worst = max(worst, dev)
        if dev > 0.03:
            problems.append(f"star({m}) R_L off by {dev:.3f}")
    detail = (f"K_n and star N_D for n, m in 2..8; star R_L at F=1000 seed {SEED}: "
              f"max deviation {worst:.3f} (tolerance 0.03); problems: {problems or 'none'}")
    settle(3, not problems, detail)


# ------------------------------------------------------------------ 4

def test_criterion_04_fixed_point():
    net = BipartiteNetwork(np.array([[1.0]]), ["a"], ["p"])
    model = MutualisticModel(net, MutualisticParams(gamma0=0.0))
    x, converged = integrate_steady(model, [2.0, 2.0])
    exact = (-0.3 + math.sqrt(0.09 + 4e-4)) / 2
    err = float(np.max(np.abs(x - exact)))
    settle(4, converged and err < 1e-8, f"|x - x*| = {err:.2e} (tolerance 1e-8), x* = {exact:.10g}")


# ------------------------------------------------------------------ 5 and 10 share one run

@pytest.fixture(scope="module")
def mutualistic_run(tmp_path_factory):
    """Network A when supplied, otherwise a nested surrogate of the same size."""
    root = tmp_path_factory.mktemp("netA")
    path = data_path("network_a")
    source = "Network A"
    if path is None:
        path = root / "surrogate.csv"
        path.write_text(serialize_incidence(nested_bipartite(38, 11, 106, seed=SEED)))
        source = "nested 38x11 L=106 surrogate"
    t0 = time.perf_counter()
    code = run_cli("rank-nl", path, "-o", root / "nl")
    elapsed = time.perf_counter() - t0
    assert run_cli("sweep", path, "-o", root / "sweep") == 0
    return {"path": path, "root": root, "code": code, "elapsed": elapsed, "source": source,
            "real": source == "Network A"}


def test_criterion_05_hysteresis_and_recovery(mutualistic_run):
    root = mutualistic_run["root"]
    assert mutualistic_run["code"] == 0
    nl = json.loads((root / "nl" / "ranking_nl.json").read_text())
    sweep = json.loads((root / "sweep" / "sweep.json").read_text())["summary"]
    values = np.array(nl["ranking"]["values"])
    bip = read_incidence(mutualistic_run["path"])
    r = pearson(values, bip.pollinator_degrees())
    tp = sweep["tipping_point"]
    ok = (tp is not None and tp > 0 and sweep["uncontrolled_recovery"] is None
          and values.max() == 1.0 and values.min() == 0.0 and len(values) == 38 and r > 0)
    detail = (f"[{mutualistic_run['source']}] tipping point {tp}, uncontrolled recovery "
              f"{sweep['uncontrolled_recovery']}, R_NL range [{values.min()}, {values.max()}], "
              f"pearson(R_NL, degree) = {r:.3f}")
    if not mutualistic_run["real"]:
        record_criterion(5, "SKIP", "Network A not supplied; surrogate " +
                         ("passes " if ok else "fails ") + detail)
        assert ok, detail
        pytest.skip("Network A file not supplied")
    settle(5, ok, detail)


# ------------------------------------------------------------------ 6

def test_criterion_06_gene_network():
    path = data_path("gene")
    if path is None:
        settle(6, False, "gene edge list not supplied; replaced by criterion 2", skip=True)
    net = read_edge_list(path)
    giant, core = giant_strong_component(net), input_connected_core(net)
    nd_giant = min_driver_count(giant.adjacency, giant.kind)
    nd_core = min_driver_count(core.adjacency, core.kind)
    out = Path(path).parent / "acceptance-gene"
    assert run_cli("rank-nl", path, "--subnetwork", "input", "-o", out) == 0
    nl = np.array(json.loads((out / "ranking_nl.json").read_text())["ranking"]["values"])
    lin = linear_importance(core.adjacency, core.kind, 1000, SEED)
    zero_nl_high_lin = bool(np.any((nl == 0) & (lin.values > 0.8)))
    ok = (giant.n, nd_giant, core.n, nd_core) == (60, 4, 81, 17) and zero_nl_high_lin
    settle(6, ok, f"giant n={giant.n} N_D={nd_giant}; input core n={core.n} N_D={nd_core}; "
                  f"gene with R_NL=0 and R_L>0.8: {zero_nl_high_lin}")


# ------------------------------------------------------------------ 7

def test_criterion_07_path_counts():
    walk_pairs = simple_pairs = 0
    wrong = []
    for seed in range(50):
        rng = np.random.default_rng(7000 + seed)
        n = int(rng.integers(2, 21))
        net = random_graph(n, float(rng.uniform(0.05, 0.2)), True, seed)
        L = int(rng.integers(1, 8))
        m = count_walks(net, range(n), range(n), L)
        for s in range(n):
            for t in range(n):
                walk_pairs += 1
                if m.counts[s, t] != count_walks_dfs(net.adjacency, s, t, L):
                    wrong.append(("walk", seed, s, t))
    for seed in range(30):
        rng = np.random.default_rng(8000 + seed)
        n = int(rng.integers(2, 13))
        net = random_graph(n, float(rng.uniform(0.1, 0.4)), True, seed)
        L = int(rng.integers(1, 9))
        for s in range(n):
            for t in range(n):
                simple_pairs += 1
                if count_simple_paths(net, s, t, L) != \
                        count_simple_paths_recursive(net.adjacency, s, t, L):
                    wrong.append(("simple", seed, s, t))
    settle(7, not wrong, f"walks exact on {walk_pairs} pairs over 50 graphs (n<=20, L<=7); "
                         f"simple paths exact on {simple_pairs} pairs (n<=12); "
                         f"mismatches {len(wrong)}")


# ------------------------------------------------------------------ 8

def test_criterion_08_comparison_statistics():
    errs = [
        abs(pearson([1, 2, 3], [2, 4, 6]) - 1.0),
        abs(pearson([1, 2, 3], [3, 2, 1]) + 1.0),
        abs(pearson([1, 2, 3, 4], [1, 3, 2, 4]) - 0.8),
        abs(cosine_distance([1, 0], [1, 1]) - (1 - 1 / math.sqrt(2))),
        abs(cosine_distance([1, 2], [3, 6])),
        abs(cosine_distance([1, 0], [0, 1]) - 1.0),
    ]
    rng = np.random.default_rng(SEED)
    failures = 0
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        x, y = rng.normal(size=n), rng.normal(size=n)
        a, b, c = rng.uniform(0.1, 10), rng.uniform(-5, 5), rng.uniform(0.1, 10)
        r, d = pearson(x, y), cosine_distance(x, y)
        if (abs(pearson(a * x + b, y) - r) > 1e-9 or abs(pearson(x, a * y + b) - r) > 1e-9
                or abs(pearson(-a * x + b, y) + r) > 1e-9
                or abs(cosine_distance(a * x, c * y) - d) > 1e-9):
            failures += 1
    worst = max(errs)
    settle(8, worst <= 1e-12 and failures == 0,
           f"hand examples max error {worst:.1e} (tolerance 1e-12); "
           f"invariance failures {failures}/1000 random pairs")


# ------------------------------------------------------------------ 9

def _tree(directory: Path) -> dict:
    return {str(p.relative_to(directory)): p.read_bytes()
            for p in sorted(directory.rglob("*")) if p.is_file()}


def test_criterion_09_determinism(tmp_path):
    csv_path = tmp_path / "net.csv"
    csv_path.write_text(serialize_incidence(nested_bipartite(6, 4, 12, seed=2)))
    star_path = tmp_path / "star.txt"
    star_path.write_text("".join(f"h l{i}\n" for i in range(6)))
    conn_path = tmp_path / "conn.txt"
    conn_path.write_text("# classes:\n# a sensory\n# b inter\n# c motor\n# d muscle\n\n"
                         "a b\nb c\nc d\nb d\n")
    manifest = tmp_path / "m.csv"
    manifest.write_text(f"name,input\nnet,{csv_path.name}\n")
    grid = ["--gamma-grid", "0:3:0.1"]
    commands = {
        "ingest-check": [csv_path],
        "sweep": [csv_path, *grid],
        "rank-nl": [csv_path, *grid],
        "rank-lin": [star_path, "--kind", "undirected", "--save-sets", "--seed", 5],
        "compare": ["--manifest", manifest, *grid, "--samples", 300, "--max-retries", 400],
        "connectome": [conn_path, "--max-length", 4, "--max-retries", 400],
    }
    differing = []
    for name, args in commands.items():
        trees = []
        for run, workers in (("a", 1), ("b", 1), ("c", 2)):
            out = tmp_path / f"{name}-{run}"
            assert run_cli(name, *args, "--workers", workers, "-o", out) == 0, name
            trees.append(_tree(out))
        if not trees[0] == trees[1] == trees[2]:
            differing.append(name)
    settle(9, not differing, f"{len(commands)} commands rerun serially and with 2 workers; "
                             f"byte differences in {differing or 'none'}")


# ------------------------------------------------------------------ 10

def test_criterion_10_performance(tmp_path, mutualistic_run):
    path = tmp_path / "net150.csv"
    path.write_text(serialize_incidence(nested_bipartite(100, 50, 400, seed=SEED)))
    t0 = time.perf_counter()
    code = run_cli("rank-lin", path, "--samples", 1000, "-o", tmp_path / "lin")
    lin_time = time.perf_counter() - t0
    nl_time = mutualistic_run["elapsed"]
    ok = code == 0 and lin_time < 60 and mutualistic_run["code"] == 0 and nl_time < 600
    settle(10, ok, f"rank-lin F=1000 on 150 nodes {lin_time:.1f}s (limit 60s); rank-nl on "
                   f"{mutualistic_run['source']} {nl_time:.1f}s (limit 600s)")
