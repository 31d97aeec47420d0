"""Pure-Python search kernels; reference semantics for the compiled backend.

Both backends must produce identical output, including order: traversal is
FIFO over seeds sorted ascending, with adjacency rows already sorted by
(relation, tail) in the CSR arrays.
"""

from __future__ import annotations

from collections import deque

import numpy as np

UNREACHED = -1


def bfs_distances(indptr, tails, sources, n_entities: int) -> np.ndarray:
    """Hop distance from the source set to every entity; -1 when unreachable."""
    dist = np.full(n_entities, UNREACHED, dtype=np.int32)
    frontier = []
    for s in sources:
        s = int(s)
        if dist[s] == UNREACHED:
            dist[s] = 0
            frontier.append(s)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for i in range(int(indptr[v]), int(indptr[v + 1])):
                u = int(tails[i])
                if dist[u] == UNREACHED:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def enumerate_gold_paths(indptr, rels, tails, seeds, is_answer, l_max: int,
                         dist_to_answer=None) -> list[tuple[int, ...]]:
    """All simple paths of <= l_max hops from a seed to an answer entity.

    Paths are interleaved id tuples (v0, r1, v1, ...). A path ending at an
    answer is recorded and still expanded, so prefixes that pass through
    answers are kept. ``dist_to_answer`` (a bfs_distances array over the
    answer set) prunes branches that cannot reach any answer in the
    remaining budget; passing None disables pruning.
    """
    out: list[tuple[int, ...]] = []
    queue: deque[tuple[int, ...]] = deque()
    for s in seeds:
        queue.append((int(s),))
    while queue:
        path = queue.popleft()
        v = path[-1]
        hops = len(path) // 2
        if is_answer[v]:
            out.append(path)
        if hops >= l_max:
            continue
        budget = l_max - hops - 1
        ents = path[0::2]
        for i in range(int(indptr[v]), int(indptr[v + 1])):
            u = int(tails[i])
            if u in ents:
                continue
            if dist_to_answer is not None:
                d = int(dist_to_answer[u])
                if d == UNREACHED or d > budget:
                    continue
            queue.append(path + (int(rels[i]), u))
    return out
