"""Immutable interned triple store with inverse-edge augmentation.

Entities and relations are interned to dense integer ids in first-seen
order. Edges live in a CSR-style adjacency sorted by (head, relation, tail),
which makes neighbor listings deterministic and membership checks a pair of
binary searches. The graph never mutates after build, so it is safe to share
across threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import TripleFormatError, UnknownEntityError

DEFAULT_INVERSE_SUFFIX = ".inv"


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


@dataclass(frozen=True, slots=True)
class NeighborSet:
    """Outgoing augmented edges of one entity, in (relation id, tail id) order."""

    center: int
    edges: tuple[Triple, ...]

    def __len__(self) -> int:
        return len(self.edges)


class KnowledgeGraph:
    """Interned directed multigraph over (head, relation, tail) triples.

    Use :func:`build_graph` to construct one; the constructor is internal.
    """

    def __init__(self, ent_labels, rel_labels, rel_inverse, indptr, rel, tail,
                 augmented, inverse_suffix):
        self._ent_labels: list[str] = ent_labels
        self._ent_ids: dict[str, int] = {s: i for i, s in enumerate(ent_labels)}
        self._rel_labels: list[str] = rel_labels
        self._rel_ids: dict[str, int] = {s: i for i, s in enumerate(rel_labels)}
        self._rel_inverse: list[int | None] = rel_inverse
        self._indptr: np.ndarray = indptr   # int64, len n_entities + 1
        self._rel: np.ndarray = rel         # int32, len n_edges
        self._tail: np.ndarray = tail       # int32, len n_edges
        self.augmented: bool = augmented
        self.inverse_suffix: str = inverse_suffix

    # -- interning ---------------------------------------------------------

    @property
    def n_entities(self) -> int:
        return len(self._ent_labels)

    @property
    def n_relations(self) -> int:
        return len(self._rel_labels)

    @property
    def n_edges(self) -> int:
        return int(self._rel.shape[0])

    def entity_id(self, label: str) -> int:
        try:
            return self._ent_ids[label]
        except KeyError:
            raise UnknownEntityError(f"unknown entity: {label!r}") from None

    def entity_label(self, eid: int) -> str:
        return self._ent_labels[eid]

    def has_entity(self, label: str) -> bool:
        return label in self._ent_ids

    def relation_id(self, label: str) -> int:
        try:
            return self._rel_ids[label]
        except KeyError:
            raise UnknownEntityError(f"unknown relation: {label!r}") from None

    def relation_label(self, rid: int) -> str:
        return self._rel_labels[rid]

    def has_relation(self, label: str) -> bool:
        return label in self._rel_ids

    def inverse_relation(self, rid: int) -> int | None:
        return self._rel_inverse[rid]

    # -- adjacency ---------------------------------------------------------

    def neighbors(self, v: int) -> NeighborSet:
        """All outgoing augmented edges of entity id ``v``."""
        if not 0 <= v < self.n_entities:
            raise UnknownEntityError(f"entity id out of range: {v}")
        s, e = int(self._indptr[v]), int(self._indptr[v + 1])
        edges = tuple(Triple(v, int(self._rel[i]), int(self._tail[i])) for i in range(s, e))
        return NeighborSet(center=v, edges=edges)

    def neighbors_of_label(self, label: str) -> NeighborSet:
        return self.neighbors(self.entity_id(label))

    def out_degree(self, v: int) -> int:
        return int(self._indptr[v + 1] - self._indptr[v])

    def has_triple(self, h: str, r: str, t: str) -> bool:
        """True iff the labeled triple resolves and exists in the augmented edge set."""
        hid = self._ent_ids.get(h)
        rid = self._rel_ids.get(r)
        tid = self._ent_ids.get(t)
        if hid is None or rid is None or tid is None:
            return False
        s, e = int(self._indptr[hid]), int(self._indptr[hid + 1])
        row_rel = self._rel[s:e]
        lo = s + int(np.searchsorted(row_rel, rid, side="left"))
        hi = s + int(np.searchsorted(row_rel, rid, side="right"))
        if lo == hi:
            return False
        j = lo + int(np.searchsorted(self._tail[lo:hi], tid, side="left"))
        return j < hi and int(self._tail[j]) == tid

    def triples(self) -> Iterator[Triple]:
        for h in range(self.n_entities):
            s, e = int(self._indptr[h]), int(self._indptr[h + 1])
            for i in range(s, e):
                yield Triple(h, int(self._rel[i]), int(self._tail[i]))

    def triple_labels(self, t: Triple) -> tuple[str, str, str]:
        return (self._ent_labels[t.head], self._rel_labels[t.relation], self._ent_labels[t.tail])

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Raw CSR arrays (indptr, relation, tail) for the search kernels."""
        return self._indptr, self._rel, self._tail


def inverse_label(label: str, suffix: str = DEFAULT_INVERSE_SUFFIX) -> str:
    """Inverse relation surface form; involutive (inverse of inverse is the original)."""
    if label.endswith(suffix) and len(label) > len(suffix):
        return label[: -len(suffix)]
    return label + suffix


def build_graph(raw_triples, augment: bool = True,
                inverse_suffix: str = DEFAULT_INVERSE_SUFFIX) -> KnowledgeGraph:
    """Intern labels, optionally add one inverse edge per triple, and index.

    Duplicate triples collapse (set semantics); if the input already carries
    an edge equal to a generated inverse, the two dedupe silently. Malformed
    records raise :class:`TripleFormatError` naming the offending index.
    """
    ent_labels: list[str] = []
    ent_ids: dict[str, int] = {}
    rel_labels: list[str] = []
    rel_ids: dict[str, int] = {}

    def ent(label: str) -> int:
        eid = ent_ids.get(label)
        if eid is None:
            eid = len(ent_labels)
            ent_ids[label] = eid
            ent_labels.append(label)
        return eid

    def rel(label: str) -> int:
        rid = rel_ids.get(label)
        if rid is None:
            rid = len(rel_labels)
            rel_ids[label] = rid
            rel_labels.append(label)
        return rid

    rows: list[tuple[int, int, int]] = []
    for idx, record in enumerate(raw_triples):
        try:
            h, r, t = record
        except (TypeError, ValueError):
            raise TripleFormatError(f"triple {idx}: expected 3 fields, got {record!r}") from None
        if not (isinstance(h, str) and isinstance(r, str) and isinstance(t, str)):
            raise TripleFormatError(f"triple {idx}: non-string field in {record!r}")
        if not h or not r or not t:
            raise TripleFormatError(f"triple {idx}: empty label in {record!r}")
        rows.append((ent(h), rel(r), ent(t)))

    rel_inverse: list[int | None] = [None] * len(rel_labels)
    if augment:
        # Register inverse ids for every relation seen so far, then mirror edges.
        for rid in range(len(rel_labels)):
            inv = rel(inverse_label(rel_labels[rid], inverse_suffix))
            while len(rel_inverse) < len(rel_labels):
                rel_inverse.append(None)
            rel_inverse[rid] = inv
            rel_inverse[inv] = rid
        rows.extend((t, rel_inverse[r], h) for h, r, t in list(rows))

    if rows:
        arr = np.asarray(rows, dtype=np.int64)
        arr = np.unique(arr, axis=0)  # dedupe + lexicographic (head, rel, tail) sort
        heads = arr[:, 0]
        indptr = np.zeros(len(ent_labels) + 1, dtype=np.int64)
        np.add.at(indptr, heads + 1, 1)
        np.cumsum(indptr, out=indptr)
        rel_arr = arr[:, 1].astype(np.int32)
        tail_arr = arr[:, 2].astype(np.int32)
    else:
        indptr = np.zeros(len(ent_labels) + 1, dtype=np.int64)
        rel_arr = np.zeros(0, dtype=np.int32)
        tail_arr = np.zeros(0, dtype=np.int32)

    return KnowledgeGraph(ent_labels, rel_labels, rel_inverse, indptr, rel_arr, tail_arr,
                          augmented=augment, inverse_suffix=inverse_suffix)


def load_triples_tsv(path) -> list[tuple[str, str, str]]:
    """Read `head<TAB>relation<TAB>tail` lines, preserving file order."""
    triples = []
    with open(os.fspath(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            fields = line.split("\t")
            if len(fields) != 3:
                raise TripleFormatError(
                    f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
                )
            triples.append((fields[0], fields[1], fields[2]))
    return triples
