#!/usr/bin/env python3
"""Benchmark the compiled search kernels against the pure-Python fallback.

Generates a synthetic inverse-augmented graph, then times gold-path
enumeration and BFS distances on both backends over identical inputs.

    python benchmarks/bench_kernels.py --entities 3000 --triples 12000 --lmax 3
"""

import argparse
import random
import sys
import time
from pathlib import Path

import numpy as np

try:
    from kgexplore._kernels import _pypaths
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from kgexplore._kernels import _pypaths

try:
    from kgexplore._kernels import _cpaths
except ImportError:
    _cpaths = None

from kgexplore.kgstore import build_graph


def make_inputs(args):
    rng = random.Random(args.seed)
    triples = [
        (f"e{rng.randrange(args.entities)}", f"r{rng.randrange(args.relations)}",
         f"e{rng.randrange(args.entities)}")
        for _ in range(args.triples)
    ]
    g = build_graph(triples, augment=True)
    indptr, rels, tails = g.adjacency()
    seeds = np.asarray(sorted(rng.sample(range(g.n_entities), args.seeds)), dtype=np.int32)
    is_answer = np.zeros(g.n_entities, dtype=np.uint8)
    for _ in range(args.answers):
        is_answer[rng.randrange(g.n_entities)] = 1
    ans_ids = np.flatnonzero(is_answer).astype(np.int32)
    return g, indptr, rels, tails, seeds, is_answer, ans_ids


def best_of(fn, trials):
    times = []
    result = None
    for _ in range(trials):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--entities", type=int, default=3000)
    parser.add_argument("--triples", type=int, default=12000)
    parser.add_argument("--relations", type=int, default=20)
    parser.add_argument("--seeds", type=int, default=2)
    parser.add_argument("--answers", type=int, default=5)
    parser.add_argument("--lmax", type=int, default=3)
    parser.add_argument("--trials", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    g, indptr, rels, tails, seeds, is_answer, ans_ids = make_inputs(args)
    print(f"graph: {g.n_entities} entities, {g.n_edges} edges (augmented), "
          f"l_max={args.lmax}, best of {args.trials}")

    backends = [("python", _pypaths)]
    if _cpaths is not None:
        backends.append(("cython", _cpaths))
    else:
        print("compiled backend not built; run `python setup.py build_ext --inplace`")

    rows = []
    baseline = {}
    outputs = []
    for name, impl in backends:
        t_bfs, dist = best_of(
            lambda: impl.bfs_distances(indptr, tails, ans_ids, g.n_entities), args.trials)
        t_pruned, paths = best_of(
            lambda: impl.enumerate_gold_paths(indptr, rels, tails, seeds, is_answer,
                                              args.lmax, dist), args.trials)
        t_full, paths_full = best_of(
            lambda: impl.enumerate_gold_paths(indptr, rels, tails, seeds, is_answer,
                                              args.lmax, None), args.trials)
        rows.append((name, t_bfs, t_pruned, t_full, len(paths)))
        outputs.append((paths, paths_full))
        baseline.setdefault("bfs", t_bfs)
        baseline.setdefault("pruned", t_pruned)
        baseline.setdefault("full", t_full)

    print(f"{'backend':<8} {'bfs_distances':>14} {'enum pruned':>13} {'enum full':>12} "
          f"{'paths':>7}  speedup (bfs/pruned/full)")
    for name, t_bfs, t_pruned, t_full, n_paths in rows:
        print(f"{name:<8} {t_bfs * 1e3:>12.2f}ms {t_pruned * 1e3:>11.2f}ms "
              f"{t_full * 1e3:>10.2f}ms {n_paths:>7}  "
              f"{baseline['bfs'] / t_bfs:>5.1f}x / {baseline['pruned'] / t_pruned:>5.1f}x / "
              f"{baseline['full'] / t_full:>5.1f}x")

    if len(rows) == 2:
        same = outputs[0] == outputs[1]
        print(f"outputs identical: {same}")
        if not same:
            sys.exit(1)


if __name__ == "__main__":
    main()
