"""Question corpus loading and statistics.

Canonical record format is JSONL with fields
{"qid": str, "question": str, "seeds": [str], "answers": [str]}.
Seeds must resolve in the graph when one is supplied; answers are kept as
labels because the graph is not guaranteed to contain every gold answer.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .errors import QuestionFormatError, UnknownEntityError
from .kgstore import KnowledgeGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class QuestionInstance:
    qid: str
    text: str
    seeds: tuple[str, ...]
    answers: frozenset[str]
    seed_ids: tuple[int, ...] = field(default=(), compare=False)

    def answer_ids(self, g: KnowledgeGraph) -> set[int]:
        """Gold answers resolved against the graph; absent labels drop out."""
        return {g.entity_id(a) for a in self.answers if g.has_entity(a)}


@dataclass(frozen=True, slots=True)
class CorpusStats:
    n_questions: int
    avg_answers: float
    max_hops_observed: int | None = None


def _parse_record(obj: dict, lineno: int) -> tuple[str, str, tuple[str, ...], frozenset[str]]:
    try:
        qid = str(obj["qid"])
        text = str(obj["question"])
        seeds = tuple(str(s) for s in obj["seeds"])
        answers = frozenset(str(a) for a in obj["answers"])
    except (KeyError, TypeError) as exc:
        raise QuestionFormatError(f"line {lineno}: missing or malformed field ({exc})") from None
    if not seeds:
        raise QuestionFormatError(f"line {lineno}: question {qid!r} has no seeds")
    return qid, text, seeds, answers


def load_questions(path, g: KnowledgeGraph | None = None,
                   strict: bool = True) -> list[QuestionInstance]:
    """Parse a JSONL question file, resolving seeds against ``g`` when given.

    strict mode rejects any record with an unresolvable seed; lenient mode
    drops such records and logs how many were skipped. With ``g=None`` no
    resolution happens at all (corpus-statistics use, e.g. published splits
    that ship per-question subgraphs instead of one global KG).
    """
    out: list[QuestionInstance] = []
    seen: set[str] = set()
    dropped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise QuestionFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            qid, text, seeds, answers = _parse_record(obj, lineno)
            if qid in seen:
                raise QuestionFormatError(f"line {lineno}: duplicate qid {qid!r}")
            seen.add(qid)
            if g is None:
                out.append(QuestionInstance(qid, text, seeds, answers))
                continue
            missing = [s for s in seeds if not g.has_entity(s)]
            if missing:
                if strict:
                    raise UnknownEntityError(
                        f"question {qid!r}: seed(s) not in graph: {missing}")
                dropped += 1
                continue
            seed_ids = tuple(g.entity_id(s) for s in seeds)
            out.append(QuestionInstance(qid, text, seeds, answers, seed_ids=seed_ids))
    if dropped:
        log.warning("dropped %d question(s) with unresolved seeds", dropped)
    return out


def corpus_stats(questions: list[QuestionInstance],
                 max_hops_observed: int | None = None) -> CorpusStats:
    n = len(questions)
    avg = sum(len(q.answers) for q in questions) / n if n else 0.0
    return CorpusStats(n_questions=n, avg_answers=avg, max_hops_observed=max_hops_observed)
