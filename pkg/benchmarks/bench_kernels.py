"""Time the compiled and pure-Python integration kernels on the same problems.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from netimportance import kernels
from netimportance.dynamics import (
    GeneModel,
    GeneParams,
    MutualisticModel,
    MutualisticParams,
    PinSpec,
    integrate_steady,
)
from netimportance.synthetic import nested_bipartite, random_graph


def cases():
    small = nested_bipartite(38, 11, 106, seed=0)
    large = nested_bipartite(100, 50, 400, seed=0)
    gene = random_graph(80, 0.05, True, 0)
    yield "mutualistic 49 nodes", MutualisticModel(small, MutualisticParams(gamma0=1.0)), None
    yield "mutualistic 49 nodes, pinned", \
        MutualisticModel(small, MutualisticParams(gamma0=0.3)), PinSpec(0, 1.5)
    yield "mutualistic 150 nodes", MutualisticModel(large, MutualisticParams(gamma0=1.0)), None
    yield "gene 80 nodes", GeneModel(gene, GeneParams(C=2.0)), None


def best_time(model, pin, backend, repeat):
    x0 = np.full(model.n, 2.0)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        x, _ = integrate_steady(model, x0, pin=pin, backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), x


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if not kernels.COMPILED_AVAILABLE:
        print("compiled extension not built; timing the python backend only")
    backends = ["python"] + (["compiled"] if kernels.COMPILED_AVAILABLE else [])
    print(f"{'case':<32}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max|dx|':>10}")
    for name, model, pin in cases():
        results = {b: best_time(model, pin, b, args.repeat) for b in backends}
        row = f"{name:<32}" + "".join(f"{results[b][0]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            speed = results["python"][0] / results["compiled"][0]
            diff = np.max(np.abs(results["python"][1] - results["compiled"][1]))
            row += f"{speed:>9.1f}x{diff:>10.1e}"
        print(row)


if __name__ == "__main__":
    main()
