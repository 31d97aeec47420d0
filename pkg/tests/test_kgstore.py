import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgexplore.errors import TripleFormatError, UnknownEntityError
from kgexplore.kgstore import build_graph, inverse_label, load_triples_tsv



def labels_of(g, neighbor_set):
    return [g.triple_labels(t) for t in neighbor_set.edges]


class TestBuildGraph:
    def test_g1_counts(self, g1):
        assert g1.n_entities == 6
        assert g1.n_edges == 10
        assert g1.n_relations == 4
        assert sorted(g1._rel_labels) == ["child", "child.inv", "friend", "friend.inv"]

    def test_empty_input(self):
        g = build_graph([], augment=True)
        assert g.n_entities == 0
        assert g.n_edges == 0

    def test_duplicates_collapse_without_augment(self):
        g = build_graph([("A", "friend", "B"), ("A", "friend", "B")], augment=False)
        assert g.n_edges == 1

    def test_wrong_arity_names_index(self):
        with pytest.raises(TripleFormatError, match="triple 1"):
            build_graph([("A", "r", "B"), ("A", "r")])

    def test_empty_label_names_index(self):
        with pytest.raises(TripleFormatError, match="triple 0"):
            build_graph([("A", "", "B")])

    def test_pre_augmented_dump_dedupes(self):
        g = build_graph([("A", "r", "B"), ("B", "r.inv", "A")], augment=True)
        assert g.n_edges == 2
        assert g.n_relations == 2

    def test_no_inverse_of_inverse_labels(self, g1):
        assert not any(lbl.endswith(".inv.inv") for lbl in g1._rel_labels)

    def test_custom_suffix(self):
        g = build_graph([("A", "r", "B")], augment=True, inverse_suffix="^-1")
        assert g.has_triple("B", "r^-1", "A")


class TestNeighbors:
    def test_neighbors_a(self, g1):
        ns = g1.neighbors(g1.entity_id("A"))
        assert labels_of(g1, ns) == [("A", "friend", "B"), ("A", "friend", "E")]

    def test_neighbors_c_sees_inverse(self, g1):
        ns = g1.neighbors(g1.entity_id("C"))
        assert labels_of(g1, ns) == [("C", "child.inv", "B")]

    def test_entity_without_edges(self):
        g = build_graph([("A", "friend", "B")], augment=False)
        assert len(g.neighbors(g.entity_id("B"))) == 0

    def test_unknown_entity(self, g1):
        with pytest.raises(UnknownEntityError):
            g1.entity_id("Z")
        with pytest.raises(UnknownEntityError):
            g1.neighbors(99)

    def test_repeat_calls_identical(self, g1):
        a = g1.entity_id("A")
        assert repr(g1.neighbors(a)) == repr(g1.neighbors(a))


class TestHasTriple:
    def test_original_member(self, g1):
        assert g1.has_triple("A", "friend", "B")

    def test_inverse_member(self, g1):
        assert g1.has_triple("B", "friend.inv", "A")

    def test_absent_triple(self, g1):
        assert not g1.has_triple("A", "child", "B")

    def test_unresolvable_labels_false(self, g1):
        assert not g1.has_triple("Z", "friend", "B")
        assert not g1.has_triple("A", "nope", "B")


class TestTsv:
    def test_roundtrip(self, tmp_path):
        p = tmp_path / "g.tsv"
        p.write_text("A\tfriend\tB\n", encoding="utf-8")
        assert load_triples_tsv(p) == [("A", "friend", "B")]

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.tsv"
        p.write_text("", encoding="utf-8")
        assert load_triples_tsv(p) == []

    def test_arity_error_cites_line(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("A\tfriend\n", encoding="utf-8")
        with pytest.raises(TripleFormatError, match=":1:"):
            load_triples_tsv(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_triples_tsv(tmp_path / "nope.tsv")

    def test_order_preserved(self, tmp_path):
        p = tmp_path / "g.tsv"
        p.write_text("B\tr\tC\nA\tr\tB\n", encoding="utf-8")
        assert load_triples_tsv(p) == [("B", "r", "C"), ("A", "r", "B")]


plain_label = st.text(alphabet="abcdefgh", min_size=1, max_size=4)
plain_triples = st.lists(st.tuples(plain_label, plain_label, plain_label),
                         min_size=1, max_size=40)


class TestProperties:
    @given(plain_triples)
    @settings(max_examples=60, deadline=None)
    def test_augmentation_doubles_deduplicated_input(self, triples):
        # labels never carry the suffix, so generated inverses cannot collide
        unique = set(triples)
        g = build_graph(triples, augment=True)
        assert g.n_edges == 2 * len(unique)

    @given(plain_triples)
    @settings(max_examples=60, deadline=None)
    def test_every_original_has_inverse(self, triples):
        g = build_graph(triples, augment=True)
        for h, r, t in triples:
            assert g.has_triple(t, inverse_label(r), h)

    @given(plain_triples)
    @settings(max_examples=60, deadline=None)
    def test_interning_round_trip(self, triples):
        g = build_graph(triples, augment=True)
        for eid in range(g.n_entities):
            assert g.entity_id(g.entity_label(eid)) == eid
        for rid in range(g.n_relations):
            assert g.relation_id(g.relation_label(rid)) == rid

    @given(plain_triples)
    @settings(max_examples=60, deadline=None)
    def test_inverse_is_involutive_with_distinct_ids(self, triples):
        g = build_graph(triples, augment=True)
        for rid in range(g.n_relations):
            inv = g.inverse_relation(rid)
            assert inv is not None and inv != rid
            assert g.inverse_relation(inv) == rid
            assert g.relation_label(inv) != g.relation_label(rid)

    def test_out_index_matches_edge_set(self):
        rng = random.Random(3)
        triples = [(f"e{rng.randrange(8)}", f"r{rng.randrange(3)}", f"e{rng.randrange(8)}")
                   for _ in range(30)]
        g = build_graph(triples, augment=True)
        listed = {g.triple_labels(t) for v in range(g.n_entities)
                  for t in g.neighbors(v).edges}
        assert len(listed) == g.n_edges
        assert all(g.has_triple(*e) for e in listed)
