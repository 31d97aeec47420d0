import pytest

from kgexplore.paths import ReasoningPath, path_from, wellformed


def test_shape_validation():
    with pytest.raises(ValueError):
        ReasoningPath(("A", "friend"))
    with pytest.raises(ValueError):
        ReasoningPath(())


def test_accessors():
    p = ReasoningPath(("A", "friend", "B", "child", "C"))
    assert p.hops == 2
    assert p.source == "A"
    assert p.final == "C"
    assert p.entities == ("A", "B", "C")
    assert list(p.triples()) == [("A", "friend", "B"), ("B", "child", "C")]


def test_prefix_and_extend():
    p = ReasoningPath(("A", "friend", "B"))
    assert p.prefix(0) == ReasoningPath(("A",))
    assert p.extend("child", "C").labels == ("A", "friend", "B", "child", "C")
    with pytest.raises(ValueError):
        p.prefix(2)


def test_simplicity():
    assert ReasoningPath(("A", "r", "B")).is_simple()
    assert not ReasoningPath(("A", "r", "B", "s", "A")).is_simple()


def test_canonical_identity():
    a = ReasoningPath(("A", "r", "B"))
    b = path_from(["A", "r", "B"])
    assert a == b and hash(a) == hash(b)
    assert len({a, b}) == 1
    assert a.key() == "A\x1fr\x1fB"


def test_ordering_is_lexicographic():
    a = ReasoningPath(("A",))
    b = ReasoningPath(("A", "r", "B"))
    assert sorted([b, a]) == [a, b]


def test_wellformed():
    assert wellformed(["A"])
    assert wellformed(["A", "r", "B"])
    assert not wellformed([])
    assert not wellformed(["A", "r"])
    assert not wellformed(["A", 3, "B"])
    assert not wellformed(["A", "", "B"])
