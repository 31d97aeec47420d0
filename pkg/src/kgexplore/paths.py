"""Reasoning paths: alternating entity/relation label sequences rooted at a seed.

A path is stored as a flat tuple of labels [v0, r1, v1, ..., rk, vk]. The
tuple itself is the canonical form used for set identity, so two paths are
equal exactly when their label sequences are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

SEPARATOR = "\x1f"  # reserved joiner for the single-string canonical key


@dataclass(frozen=True, slots=True)
class ReasoningPath:
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) % 2 == 0 or not self.labels:
            raise ValueError(f"path needs an odd label count (got {len(self.labels)})")

    @property
    def hops(self) -> int:
        return len(self.labels) // 2

    @property
    def source(self) -> str:
        return self.labels[0]

    @property
    def final(self) -> str:
        return self.labels[-1]

    @property
    def entities(self) -> tuple[str, ...]:
        return self.labels[0::2]

    def triples(self) -> Iterator[tuple[str, str, str]]:
        """Yield the (head, relation, tail) steps along the path."""
        for i in range(1, len(self.labels), 2):
            yield self.labels[i - 1], self.labels[i], self.labels[i + 1]

    def prefix(self, hops: int) -> "ReasoningPath":
        if hops > self.hops:
            raise ValueError(f"prefix of {hops} hops from a {self.hops}-hop path")
        return ReasoningPath(self.labels[: 2 * hops + 1])

    def extend(self, relation: str, tail: str) -> "ReasoningPath":
        return ReasoningPath(self.labels + (relation, tail))

    def is_simple(self) -> bool:
        ents = self.entities
        return len(set(ents)) == len(ents)

    def key(self) -> str:
        return SEPARATOR.join(self.labels)

    def __lt__(self, other: "ReasoningPath") -> bool:
        return self.labels < other.labels

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)


def path_from(labels) -> ReasoningPath:
    """Build a path from any label iterable, e.g. a decoded JSON list."""
    return ReasoningPath(tuple(str(x) for x in labels))


def wellformed(labels) -> bool:
    """True when the sequence can be a path: odd length, all non-empty strings."""
    seq = list(labels)
    if not seq or len(seq) % 2 == 0:
        return False
    return all(isinstance(x, str) and x for x in seq)
