"""KGQA answer metrics, retrieval metrics, and the k-hop baseline retriever.

Answer comparison happens on normalized labels (casefold, trim, collapse
internal whitespace). Per-question scores are macro-averaged into percentage
reports. A hit counts any overlap between predicted and gold answers; when a
graph is supplied the ground-truth upper bounds (answers actually present in
the graph) ride along as hit_ub / recall_ub.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .kgstore import KnowledgeGraph


def normalize_label(s: str) -> str:
    return " ".join(s.split()).casefold()


@dataclass(frozen=True, slots=True)
class QuestionScore:
    qid: str
    hit: int
    precision: float
    recall: float
    f1: float
    hit_ub: float = 1.0
    recall_ub: float = 1.0


@dataclass(frozen=True, slots=True)
class Report:
    n: int
    hit_pct: float
    f1_pct: float
    precision_pct: float
    recall_pct: float
    hit_ub: float
    recall_ub: float
    averaging: str = "macro"

    def to_dict(self) -> dict:
        return {
            "n": self.n, "hit_pct": self.hit_pct, "f1_pct": self.f1_pct,
            "precision_pct": self.precision_pct, "recall_pct": self.recall_pct,
            "hit_ub": self.hit_ub, "recall_ub": self.recall_ub,
            "averaging": self.averaging,
        }


def answer_metrics(pred, gold, qid: str = "",
                   g: KnowledgeGraph | None = None) -> QuestionScore:
    """Hit / precision / recall / F1 of one predicted answer set.

    ``gold`` must be non-empty (empty-gold questions are excluded and counted
    upstream). Graph membership of the gold answers, when a graph is given,
    yields the per-question upper bounds.
    """
    gold = set(gold)
    if not gold:
        raise ValueError(f"question {qid!r}: empty gold answer set")
    pred_norm = {normalize_label(a) for a in pred}
    gold_norm = {normalize_label(a) for a in gold}
    inter = pred_norm & gold_norm
    precision = len(inter) / len(pred_norm) if pred_norm else 0.0
    recall = len(inter) / len(gold_norm)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    hit = 1 if inter else 0
    hit_ub, recall_ub = (1.0, 1.0) if g is None else answer_upper_bounds(gold, g)
    return QuestionScore(qid=qid, hit=hit, precision=precision, recall=recall,
                         f1=f1, hit_ub=hit_ub, recall_ub=recall_ub)


def answer_upper_bounds(gold, g: KnowledgeGraph) -> tuple[float, float]:
    """Best (hit, recall) any retriever could reach: gold presence in the graph."""
    gold = set(gold)
    if not gold:
        return 0.0, 0.0
    present = sum(1 for a in gold if g.has_entity(a))
    return (1.0 if present else 0.0), present / len(gold)


def aggregate_report(scores) -> Report:
    scores = list(scores)
    n = len(scores)
    if n == 0:
        return Report(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    mean = lambda xs: 100.0 * sum(xs) / n  # noqa: E731
    return Report(
        n=n,
        hit_pct=mean([s.hit for s in scores]),
        f1_pct=mean([s.f1 for s in scores]),
        precision_pct=mean([s.precision for s in scores]),
        recall_pct=mean([s.recall for s in scores]),
        hit_ub=mean([s.hit_ub for s in scores]),
        recall_ub=mean([s.recall_ub for s in scores]),
    )


def retrieve_khop(g: KnowledgeGraph, seeds, k: int) -> set[int]:
    """Entities reachable within k hops of the seed set, seeds excluded."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    seed_ids = sorted({s if isinstance(s, int) else g.entity_id(s) for s in seeds})
    indptr, _, tails = g.adjacency()
    dist = _kernels.bfs_distances(indptr, tails, np.asarray(seed_ids, dtype=np.int32),
                                  g.n_entities)
    hit = np.flatnonzero((dist > 0) & (dist <= k))
    return {int(v) for v in hit}


def retrieval_metrics(g: KnowledgeGraph, retrieved, gold) -> tuple[int, float, float]:
    """(hit, recall, precision) of a retrieved entity set against gold labels.

    Recall counts covered gold answers; precision counts correct retrieved
    entities, so duplicate surface forms cannot double-count gold.
    """
    gold_norm = {normalize_label(a) for a in gold}
    retrieved_norm = [normalize_label(g.entity_label(v)) for v in retrieved]
    covered = gold_norm & set(retrieved_norm)
    correct = sum(1 for lbl in retrieved_norm if lbl in gold_norm)
    hit = 1 if covered else 0
    recall = len(covered) / len(gold_norm) if gold_norm else 0.0
    precision = correct / len(retrieved_norm) if retrieved_norm else 0.0
    return hit, recall, precision
