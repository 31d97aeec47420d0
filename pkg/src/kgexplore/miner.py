"""Gold-trajectory mining: enumerate answer-reaching paths, derive step actions.

Phase I finds every simple path of at most ``l_max`` hops from a seed to a
gold answer (prefixes that pass through answers are kept as paths in their
own right). Phase II turns those paths into per-depth training records: the
state a model would observe plus the gold action, where the gold paths also
include every same-relation sibling of a mined extension.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .corpus import QuestionInstance
from .errors import ConsistencyError, QuestionFormatError
from .kgstore import KnowledgeGraph
from .paths import ReasoningPath, path_from

log = logging.getLogger(__name__)

DEFAULT_NEIGHBOR_CAP = 256
SFT_FORMAT_VERSION = 1


@dataclass(frozen=True, slots=True)
class NeighborRow:
    """One frontier entity and its outgoing edges, as labels."""

    center: str
    edges: tuple[tuple[str, str, str], ...]


@dataclass(frozen=True, slots=True)
class GoldStepRecord:
    """State and gold action for one exploration depth of one question."""

    qid: str
    depth: int
    question: str
    current_paths: frozenset[ReasoningPath]
    frontier_neighbors: tuple[NeighborRow, ...]
    gold_answers: frozenset[str]
    gold_paths: frozenset[ReasoningPath]
    seed_answers: frozenset[str] = field(default_factory=frozenset)


def mine_gold_paths(g: KnowledgeGraph, q: QuestionInstance, l_max: int) -> frozenset[ReasoningPath]:
    """All simple paths of <= l_max hops from a seed of ``q`` to a gold answer."""
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")
    seed_ids = sorted({g.entity_id(s) for s in q.seeds})
    answer_ids = q.answer_ids(g)
    if not answer_ids:
        return frozenset()

    indptr, rels, tails = g.adjacency()
    is_answer = np.zeros(g.n_entities, dtype=np.uint8)
    is_answer[sorted(answer_ids)] = 1
    dist = None
    if g.augmented:
        # Inverse edges make reachability symmetric, so hop distance from the
        # answer set bounds the remaining budget of any extension.
        dist = _kernels.bfs_distances(indptr, tails,
                                      np.asarray(sorted(answer_ids), dtype=np.int32),
                                      g.n_entities)
    raw = _kernels.enumerate_gold_paths(indptr, rels, tails,
                                        np.asarray(seed_ids, dtype=np.int32),
                                        is_answer, l_max, dist)
    out = set()
    for ids in raw:
        labels = tuple(
            g.entity_label(x) if i % 2 == 0 else g.relation_label(x)
            for i, x in enumerate(ids)
        )
        out.add(ReasoningPath(labels))
    return frozenset(out)


def _prefix_pool(gold: frozenset[ReasoningPath], depth: int) -> frozenset[ReasoningPath]:
    return frozenset(p.prefix(depth) for p in gold if p.hops >= depth)


def build_step_records(g: KnowledgeGraph, q: QuestionInstance,
                       gold: frozenset[ReasoningPath], l_max: int,
                       neighbor_cap: int = DEFAULT_NEIGHBOR_CAP) -> list[GoldStepRecord]:
    """Per-depth (state, gold action) records from mined gold paths.

    A record is emitted for depth d only when some gold path extends past d;
    a question whose only gold path is the bare seed therefore yields no
    records, and the zero-hop answer survives in ``seed_answers``.
    """
    too_long = [p for p in gold if p.hops > l_max]
    if too_long:
        raise ConsistencyError(
            f"gold path with {too_long[0].hops} hops exceeds l_max={l_max}")
    seed_answers = frozenset(s for s in q.seeds if s in q.answers)
    answers = set(q.answers)

    records: list[GoldStepRecord] = []
    for d in range(l_max):
        extensions = _prefix_pool(gold, d + 1)
        if not extensions:
            break  # prefix pools shrink with depth; nothing longer exists
        current = _prefix_pool(gold, d)
        frontier_ids = sorted({g.entity_id(p.final) for p in current})

        rows = []
        step_answers = set()
        for v in frontier_ids:
            edges = tuple(g.triple_labels(t) for t in g.neighbors(v).edges)
            rows.append(NeighborRow(center=g.entity_label(v), edges=edges[:neighbor_cap]))
            step_answers.update(t for _, _, t in edges if t in answers)

        # Same-relation sibling expansion: once a path's gold extension uses
        # relation r, every (frontier, r, *) edge extends that same path.
        gold_paths = set()
        for ext in extensions:
            prefix, rel = ext.prefix(d), ext.labels[-2]
            rid = g.relation_id(rel)
            for t in g.neighbors(g.entity_id(prefix.final)).edges:
                if t.relation == rid:
                    gold_paths.add(prefix.extend(rel, g.entity_label(t.tail)))

        records.append(GoldStepRecord(
            qid=q.qid, depth=d, question=q.text,
            current_paths=current, frontier_neighbors=tuple(rows),
            gold_answers=frozenset(step_answers), gold_paths=frozenset(gold_paths),
            seed_answers=seed_answers,
        ))
    return records


def mine_question(g: KnowledgeGraph, q: QuestionInstance, l_max: int,
                  neighbor_cap: int = DEFAULT_NEIGHBOR_CAP
                  ) -> tuple[frozenset[ReasoningPath], list[GoldStepRecord]]:
    gold = mine_gold_paths(g, q, l_max)
    return gold, build_step_records(g, q, gold, l_max, neighbor_cap=neighbor_cap)


# -- SFT dataset serialization ----------------------------------------------

def _record_to_obj(rec: GoldStepRecord) -> dict:
    return {
        "qid": rec.qid,
        "depth": rec.depth,
        "state": {
            "question": rec.question,
            "current_paths": sorted(list(p.labels) for p in rec.current_paths),
            "frontier_neighbors": [
                {"center": row.center, "edges": [list(e) for e in row.edges]}
                for row in rec.frontier_neighbors
            ],
        },
        "gold_action": {
            "answers": sorted(rec.gold_answers),
            "exploration_paths": sorted(list(p.labels) for p in rec.gold_paths),
        },
        "seed_answers": sorted(rec.seed_answers),
    }


def _record_from_obj(obj: dict, lineno: int) -> GoldStepRecord:
    try:
        state = obj["state"]
        action = obj["gold_action"]
        return GoldStepRecord(
            qid=str(obj["qid"]),
            depth=int(obj["depth"]),
            question=str(state["question"]),
            current_paths=frozenset(path_from(p) for p in state["current_paths"]),
            frontier_neighbors=tuple(
                NeighborRow(center=str(row["center"]),
                            edges=tuple((str(h), str(r), str(t)) for h, r, t in row["edges"]))
                for row in state["frontier_neighbors"]
            ),
            gold_answers=frozenset(str(a) for a in action["answers"]),
            gold_paths=frozenset(path_from(p) for p in action["exploration_paths"]),
            seed_answers=frozenset(str(a) for a in obj.get("seed_answers", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise QuestionFormatError(f"line {lineno}: bad step record ({exc})") from None


def export_sft_dataset(records: list[GoldStepRecord], path, *, l_max: int,
                       neighbor_cap: int = DEFAULT_NEIGHBOR_CAP) -> int:
    """Write records as JSONL behind a header line; returns the record count."""
    header = {"format_version": SFT_FORMAT_VERSION, "l_max": l_max,
              "neighbor_cap": neighbor_cap}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False) + "\n")
        for rec in records:
            fh.write(json.dumps(_record_to_obj(rec), sort_keys=True, ensure_ascii=False) + "\n")
    return len(records)


def import_sft_dataset(path) -> tuple[dict, list[GoldStepRecord]]:
    """Read an exported dataset back; returns (header, records)."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise QuestionFormatError(f"{path}: missing header line")
        header = json.loads(first)
        if header.get("format_version") != SFT_FORMAT_VERSION:
            raise QuestionFormatError(
                f"{path}: unsupported format_version {header.get('format_version')!r}")
        records = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            records.append(_record_from_obj(json.loads(line), lineno))
    return header, records
