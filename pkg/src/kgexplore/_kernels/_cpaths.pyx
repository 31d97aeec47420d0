# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled search kernels. Semantics mirror _pypaths exactly, output order
included: FIFO traversal, adjacency rows pre-sorted by (relation, tail)."""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy

cnp.import_array()

DEF UNREACHED = -1


def bfs_distances(cnp.int64_t[::1] indptr, cnp.int32_t[::1] tails,
                  sources, int n_entities):
    """Hop distance from the source set to every entity; -1 when unreachable."""
    cdef cnp.int32_t[::1] dist = np.full(n_entities, UNREACHED, dtype=np.int32)
    cdef cnp.int32_t[::1] frontier = np.empty(max(n_entities, 1), dtype=np.int32)
    cdef cnp.int32_t[::1] nxt = np.empty(max(n_entities, 1), dtype=np.int32)
    cdef Py_ssize_t n_front = 0, n_next, fi
    cdef int s, v, u, d
    cdef cnp.int64_t i

    for s in np.asarray(sources, dtype=np.int32):
        if dist[s] == UNREACHED:
            dist[s] = 0
            frontier[n_front] = s
            n_front += 1
    d = 0
    while n_front > 0:
        d += 1
        n_next = 0
        for fi in range(n_front):
            v = frontier[fi]
            for i in range(indptr[v], indptr[v + 1]):
                u = tails[i]
                if dist[u] == UNREACHED:
                    dist[u] = d
                    nxt[n_next] = u
                    n_next += 1
        frontier, nxt = nxt, frontier
        n_front = n_next
    return np.asarray(dist)


cdef class _I32Arena:
    """Growable int32 buffer holding every queued path back to back."""
    cdef cnp.int32_t* buf
    cdef Py_ssize_t size, cap
    cdef object _owner  # numpy array keeping the memory alive

    def __cinit__(self, Py_ssize_t cap):
        self._owner = np.empty(cap, dtype=np.int32)
        self.buf = <cnp.int32_t*> cnp.PyArray_DATA(<cnp.ndarray> self._owner)
        self.size = 0
        self.cap = cap

    cdef void reserve(self, Py_ssize_t extra):
        cdef Py_ssize_t want = self.size + extra
        cdef object bigger
        if want <= self.cap:
            return
        while self.cap < want:
            self.cap *= 2
        bigger = np.empty(self.cap, dtype=np.int32)
        memcpy(cnp.PyArray_DATA(<cnp.ndarray> bigger), self.buf,
               self.size * sizeof(cnp.int32_t))
        self._owner = bigger
        self.buf = <cnp.int32_t*> cnp.PyArray_DATA(<cnp.ndarray> bigger)


cdef class _PathQueue:
    """FIFO of (arena offset, item count) pairs; the head only advances."""
    cdef cnp.int64_t* starts
    cdef cnp.int32_t* lens
    cdef Py_ssize_t size, cap
    cdef object _o1, _o2

    def __cinit__(self, Py_ssize_t cap):
        self._o1 = np.empty(cap, dtype=np.int64)
        self._o2 = np.empty(cap, dtype=np.int32)
        self.starts = <cnp.int64_t*> cnp.PyArray_DATA(<cnp.ndarray> self._o1)
        self.lens = <cnp.int32_t*> cnp.PyArray_DATA(<cnp.ndarray> self._o2)
        self.size = 0
        self.cap = cap

    cdef void push(self, cnp.int64_t start, cnp.int32_t n):
        cdef object b1, b2
        if self.size == self.cap:
            self.cap *= 2
            b1 = np.empty(self.cap, dtype=np.int64)
            b2 = np.empty(self.cap, dtype=np.int32)
            memcpy(cnp.PyArray_DATA(<cnp.ndarray> b1), self.starts,
                   self.size * sizeof(cnp.int64_t))
            memcpy(cnp.PyArray_DATA(<cnp.ndarray> b2), self.lens,
                   self.size * sizeof(cnp.int32_t))
            self._o1, self._o2 = b1, b2
            self.starts = <cnp.int64_t*> cnp.PyArray_DATA(<cnp.ndarray> b1)
            self.lens = <cnp.int32_t*> cnp.PyArray_DATA(<cnp.ndarray> b2)
        self.starts[self.size] = start
        self.lens[self.size] = n
        self.size += 1


def enumerate_gold_paths(cnp.int64_t[::1] indptr, cnp.int32_t[::1] rels,
                         cnp.int32_t[::1] tails, seeds, is_answer,
                         int l_max, dist_to_answer=None):
    """All simple paths of <= l_max hops from a seed to an answer entity.

    Same contract as the pure-Python kernel: interleaved id tuples in FIFO
    discovery order, with optional distance-based pruning.
    """
    cdef cnp.uint8_t[::1] ans = np.ascontiguousarray(is_answer, dtype=np.uint8)
    cdef bint prune = dist_to_answer is not None
    cdef cnp.int32_t[::1] dist
    if prune:
        dist = np.ascontiguousarray(dist_to_answer, dtype=np.int32)
    else:
        dist = np.empty(0, dtype=np.int32)

    cdef _I32Arena arena = _I32Arena(1024)
    cdef _PathQueue queue = _PathQueue(1024)
    cdef Py_ssize_t head = 0
    cdef list out = []
    cdef cnp.int64_t p_start, i
    cdef int p_len, hops, budget, v, u, s
    cdef Py_ssize_t j, k
    cdef bint revisit

    for s in np.asarray(seeds, dtype=np.int32):
        arena.reserve(1)
        arena.buf[arena.size] = s
        queue.push(arena.size, 1)
        arena.size += 1

    while head < queue.size:
        p_start = queue.starts[head]
        p_len = queue.lens[head]
        head += 1
        v = arena.buf[p_start + p_len - 1]
        hops = p_len // 2
        if ans[v]:
            out.append(tuple([arena.buf[p_start + k] for k in range(p_len)]))
        if hops >= l_max:
            continue
        budget = l_max - hops - 1
        for i in range(indptr[v], indptr[v + 1]):
            u = tails[i]
            revisit = False
            for j in range(0, p_len, 2):
                if arena.buf[p_start + j] == u:
                    revisit = True
                    break
            if revisit:
                continue
            if prune and (dist[u] == UNREACHED or dist[u] > budget):
                continue
            arena.reserve(p_len + 2)
            memcpy(arena.buf + arena.size, arena.buf + p_start,
                   p_len * sizeof(cnp.int32_t))
            arena.buf[arena.size + p_len] = rels[i]
            arena.buf[arena.size + p_len + 1] = u
            queue.push(arena.size, p_len + 2)
            arena.size += p_len + 2
    return out
