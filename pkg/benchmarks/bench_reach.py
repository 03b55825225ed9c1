"""Compare the compiled and pure-Python reachability kernels.

Times multi-source reverse-closure queries over CSR graphs shaped like the
dependency graphs the compiler builds (forest-heavy, low out-degree), plus
an end-to-end closure timing on a generated workspace.

Run: python3 benchmarks/bench_reach.py [--nodes N] [--queries Q]
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
import tempfile
import time
from array import array

from mtalk import _reach_py
from mtalk import graph as graphmod

try:
    from mtalk import _reach
except ImportError:
    _reach = None


def build_csr(n: int, avg_degree: float, rng: random.Random):
    edges = []
    for src in range(n):
        for _ in range(int(avg_degree) + (1 if rng.random() < avg_degree % 1 else 0)):
            edges.append((src, rng.randrange(n)))
    counts = [0] * n
    for s, _d in edges:
        counts[s] += 1
    indptr = array("i", [0] * (n + 1))
    for i in range(n):
        indptr[i + 1] = indptr[i] + counts[i]
    fill = list(indptr[:n])
    indices = array("i", [0] * len(edges))
    for s, d in edges:
        indices[fill[s]] = d
        fill[s] += 1
    return indptr, indices


def time_kernel(kernel, indptr, indices, n, queries, rng: random.Random) -> list[float]:
    times = []
    for _ in range(queries):
        seeds = array("i", sorted(rng.sample(range(n), max(1, n // 200))))
        t0 = time.perf_counter()
        kernel.reachable(indptr, indices, seeds, n)
        times.append(time.perf_counter() - t0)
    return times


def bench_kernels(nodes: int, queries: int) -> None:
    rng = random.Random(99)
    indptr, indices = build_csr(nodes, 4.0, rng)
    print(f"graph: {nodes} nodes, {len(indices)} edges, {queries} queries")
    rows = []
    for name, kernel in (("pure", _reach_py), ("compiled", _reach)):
        if kernel is None:
            print(f"{name:>9}: extension not built, skipped")
            continue
        times = time_kernel(kernel, indptr, indices, nodes, queries, random.Random(7))
        rows.append((name, statistics.median(times)))
        print(f"{name:>9}: median {statistics.median(times) * 1e3:8.3f} ms  "
              f"min {min(times) * 1e3:8.3f} ms")
    if len(rows) == 2:
        print(f"  speedup: {rows[0][1] / rows[1][1]:.1f}x (pure/compiled, median)")


def bench_workspace() -> None:
    from mtalk.compiler import compile_workspace
    from mtalk.ids import ElementId
    from mtalk.synthetic import BenchmarkSpec, generate_synthetic

    with tempfile.TemporaryDirectory() as root:
        generate_synthetic(BenchmarkSpec(2000, 80, 4.0, 2, 5), root)
        state, _ = compile_workspace(root)
        g = state.graph
        target = ElementId("", "C0000")
        t0 = time.perf_counter()
        for _ in range(50):
            g.closure({target}, reverse=True)
        dt = (time.perf_counter() - t0) / 50
        print(f"workspace closure ({len(g.nodes)} nodes, kernel={graphmod.REACH_IMPL}): "
              f"{dt * 1e3:.3f} ms/query")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=50000)
    ap.add_argument("--queries", type=int, default=30)
    args = ap.parse_args()
    print(f"active dependency-graph kernel: {graphmod.REACH_IMPL}")
    bench_kernels(args.nodes, args.queries)
    bench_workspace()
    return 0


if __name__ == "__main__":
    sys.exit(main())
