from __future__ import annotations

import pytest

from cgrobust.model import (
    GRAPH,
    Arc,
    Element,
    GraphBody,
    KBBuilder,
    KnowledgeBase,
    Kind,
    NotAContextError,
    Presentation,
    UnknownIdError,
    containment_closure,
    describe,
    describe_link,
    natural_key,
    validate,
)


def rules(kb):
    return [(v.rule, v.id) for v in validate(kb)]


def test_fixture_is_valid(v1, v2):
    assert validate(v1) == []
    assert validate(v2) == []


def test_dangling_arc():
    kb = KBBuilder("v").relation("r1", "agnt").concept("c1", "Cat").arc("r1", 1, "cn99").build()
    assert rules(kb) == [("dangling-arc", "cn99")]
    assert str(validate(kb)[0]).startswith("dangling-arc(cn99)")


def test_duplicate_id():
    kb = KnowledgeBase(
        "v",
        GraphBody(("cn13",)),
        (Element("cn13", Kind.CONCEPT, "Person"), Element("cn13", Kind.CONCEPT, "Cat")),
    )
    assert rules(kb) == [("duplicate-id", "cn13")]


def test_relation_cannot_carry_referent_or_body():
    kb = KnowledgeBase(
        "v",
        GraphBody(("r",)),
        (Element("r", Kind.RELATION, "agnt", "John", GraphBody()),),
    )
    assert {r for r, _ in rules(kb)} == {"relation-referent", "relation-nested"}


def test_empty_type_and_reserved_id():
    kb = KnowledgeBase(
        "v", GraphBody(("a", GRAPH)),
        (Element("a", Kind.CONCEPT, ""), Element(GRAPH, Kind.CONCEPT, "X")),
    )
    assert set(rules(kb)) == {("empty-type", "a"), ("reserved-id", GRAPH)}


def test_containment_tree_violations():
    orphan = KnowledgeBase("v", GraphBody(), (Element("a", Kind.CONCEPT, "A"),))
    assert rules(orphan) == [("orphan", "a")]

    twice = KnowledgeBase(
        "v", GraphBody(("a", "b")),
        (Element("a", Kind.CONCEPT, "A", nested=GraphBody(("b",))), Element("b", Kind.CONCEPT, "B")),
    )
    assert ("multiple-parents", "b") in rules(twice)

    loop = KnowledgeBase(
        "v", GraphBody(),
        (
            Element("a", Kind.CONCEPT, "A", nested=GraphBody(("b",))),
            Element("b", Kind.CONCEPT, "B", nested=GraphBody(("a",))),
        ),
    )
    assert sorted(rules(loop)) == [("containment-cycle", "a"), ("containment-cycle", "b")]


def test_arc_rules():
    kb = (
        KBBuilder("v")
        .relation("r", "agnt")
        .concept("c", "Cat")
        .concept("k", "Box", context=True)
        .concept("inner", "Mouse", parent="k")
        .arc("r", 1, "c")
        .arc("r", 2, "r")
        .arc("r", 3, "inner")
        .build()
    )
    got = rules(kb)
    assert ("arc-kind", "r") in got
    assert ("arc-context", "r") in got

    dup = KnowledgeBase(
        "v",
        GraphBody(("r", "c"), (Arc("r", 1, "c"), Arc("r", 1, "c"))),
        (Element("r", Kind.RELATION, "agnt"), Element("c", Kind.CONCEPT, "Cat")),
    )
    assert rules(dup) == [("duplicate-slot", "r")]


@pytest.mark.parametrize(
    "pres",
    [Presentation(float("nan"), 0), Presentation(0, 0, -1.0, 3.0), Presentation(0, 0, color="")],
)
def test_bad_presentation(pres):
    kb = KBBuilder("v").concept("a", "A", presentation=pres).build()
    assert rules(kb) == [("bad-presentation", "a")]


def test_control_characters_rejected():
    kb = KBBuilder("v").concept("a", "A\nB").build()
    assert rules(kb) == [("invalid-char", "a")]


def test_describe(v2):
    kb = KBBuilder("v").concept("p", "Person").concept("j", "Person", "John").relation("t", "Think").build()
    assert describe(kb, "p") == "Person"
    assert describe(kb, "j") == "Person : John"
    assert describe(kb, "t") == "Think"
    with pytest.raises(UnknownIdError):
        describe(kb, "nope")


def test_describe_link(v2):
    assert describe_link(v2, Arc("cn23", 1, "cn14")) == "[contain -> Lake] : 1"
    assert describe_link(v2, Arc("cn23", 2, "cn25")) == "[contain -> Truit] : 2"
    kb = KBBuilder("v").relation("a", "agent").concept("j", "Person", "John").arc("a", 1, "j").build()
    assert describe_link(kb, kb.arcs()[0]) == "[agent -> Person : John] : 1"
    with pytest.raises(UnknownIdError):
        describe_link(kb, Arc("zz", 1, "j"))


def test_closure_whole_graph_flat():
    b = KBBuilder("v")
    for i in range(5):
        b.concept(f"c{i}", "T")
    kb = b.build()
    assert containment_closure(kb, GRAPH) == {f"c{i}" for i in range(5)}


def test_closure_empty_context_and_nested():
    kb = (
        KBBuilder("v")
        .concept("empty", "Box", context=True)
        .concept("outer", "Picture", context=True)
        .concept("inner", "Scene", parent="outer", context=True)
        .concept("a", "Fish", parent="inner")
        .relation("b", "in", parent="inner")
        .concept("d", "Lake", parent="outer")
        .build()
    )
    assert containment_closure(kb, "empty") == frozenset()
    assert containment_closure(kb, "outer") == {"inner", "a", "b", "d"}
    assert "outer" not in containment_closure(kb, "outer")
    with pytest.raises(NotAContextError):
        containment_closure(kb, "a")


def test_sibling_closures_disjoint(v2):
    kb = (
        KBBuilder("v")
        .concept("k1", "A", context=True)
        .concept("k2", "B", context=True)
        .concept("x", "X", parent="k1")
        .concept("y", "Y", parent="k2")
        .build()
    )
    assert not containment_closure(kb, "k1") & containment_closure(kb, "k2")


def test_insertion_order_does_not_matter():
    a = KBBuilder("v").concept("c2", "B").concept("c10", "A").relation("r", "x").arc("r", 2, "c2").arc("r", 1, "c10").build()
    b = KBBuilder("v").relation("r", "x").concept("c10", "A").arc("r", 1, "c10").concept("c2", "B").arc("r", 2, "c2").build()
    assert a == b
    assert [e.id for e in a.elements] == ["c2", "c10", "r"]


def test_natural_key_orders_numbers():
    assert sorted(["cn10", "cn9", "cn100", "b", "a2"], key=natural_key) == ["a2", "b", "cn9", "cn10", "cn100"]


def test_parent_and_depth(v2):
    assert v2.parent_of("cn13") == "cn11"
    assert v2.parent_of("cn10") == GRAPH
    assert v2.depth("cn13") == 1
    assert v2.depth("cn11") == 0
