import random

import pytest

from kgexplore.corpus import QuestionInstance
from kgexplore.kgstore import build_graph

G1_TRIPLES = [
    ("A", "friend", "B"),
    ("B", "child", "C"),
    ("B", "child", "D"),
    ("A", "friend", "E"),
    ("E", "child", "F"),
]


@pytest.fixture
def g1():
    return build_graph(G1_TRIPLES, augment=True)


@pytest.fixture
def q1():
    return QuestionInstance(
        qid="q1",
        text="children of friends of A",
        seeds=("A",),
        answers=frozenset({"C", "D", "F"}),
    )


def random_triples(rng: random.Random, max_entities=30, max_relations=5, max_triples=80):
    """Random directed multigraph as labeled triples; cycles and self-loops allowed."""
    n_ents = rng.randint(2, max_entities)
    n_rels = rng.randint(1, max_relations)
    n_triples = rng.randint(1, max_triples)
    return [
        (f"e{rng.randrange(n_ents)}", f"r{rng.randrange(n_rels)}", f"e{rng.randrange(n_ents)}")
        for _ in range(n_triples)
    ]


def random_question(rng: random.Random, triples, qid="q", n_seeds=1, n_answers=2):
    """Question over arbitrary entities of the triple list (answers may be unreachable)."""
    entities = sorted({x for h, _, t in triples for x in (h, t)})
    seeds = tuple(rng.sample(entities, min(n_seeds, len(entities))))
    answers = frozenset(rng.sample(entities, min(n_answers, len(entities))))
    return QuestionInstance(qid=qid, text=f"question {qid}", seeds=seeds, answers=answers)
