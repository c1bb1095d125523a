# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import random

import pytest

from linmeld.engine.evaluate import Environment
from linmeld.errors import NotPresent, PersistentRetract, WrongNode
from linmeld.language.parser import parse
from linmeld.models.database import NodeDatabase
from linmeld.models.fact import Fact, linear, persistent
from linmeld.models.values import NodeId

A = NodeId(1)


def template(source: str):
    (axiom,) = parse(f"{source}.").axioms
    return axiom.fact


def test_linear_facts_are_a_multiset():
    db = NodeDatabase(A)
    db.assert_fact(linear("visit", A)).assert_fact(linear("visit", A))
    assert db.multiplicity(linear("visit", A)) == 2

    db.retract_fact(linear("visit", A))
    assert db.multiplicity(linear("visit", A)) == 1


def test_persistent_facts_are_a_set():
    db = NodeDatabase(A)
    edge = persistent("edge", A, NodeId(2))
    db.assert_fact(edge).assert_fact(edge)
    assert db.multiplicity(edge) == 1
    assert db.persistent_count() == 1


def test_same_predicate_linear_and_persistent_are_distinct():
    assert linear("p", A) != persistent("p", A)


def test_wrong_node():
    db = NodeDatabase(A)
    with pytest.raises(WrongNode):
        db.assert_fact(linear("visit", NodeId(2)))


def test_retract_missing_fact():
    db = NodeDatabase(A)
    with pytest.raises(NotPresent):
        db.retract_fact(linear("visit", A))


def test_persistent_facts_are_never_retracted():
    db = NodeDatabase(A)
    edge = persistent("edge", A, NodeId(2))
    db.assert_fact(edge)
    with pytest.raises(PersistentRetract):
        db.retract_fact(edge)


def test_assert_marks_dirty():
    db = NodeDatabase(A)
    assert not db.dirty
    db.assert_fact(linear("visit", A))
    assert db.dirty


def test_candidates_in_insertion_order():
    db = NodeDatabase(A)
    for value in (3, 1, 2):
        db.assert_fact(linear("p", A, value))

    candidates = db.candidates(template("p(A, X)"), {}, Environment())
    assert [candidate.bindings["X"] for candidate in candidates] == [3, 1, 2]
    assert all(candidate.slot is not None for candidate in candidates)


def test_candidates_respect_bound_variables():
    db = NodeDatabase(A)
    db.assert_fact(linear("p", A, 1)).assert_fact(linear("p", A, 2))

    candidates = db.candidates(template("p(A, X)"), {"X": 2}, Environment())
    assert [candidate.fact for candidate in candidates] == [
        linear("p", A, 2)
    ]


def test_candidates_exclude_consumed_slots():
    db = NodeDatabase(A)
    db.assert_fact(linear("p", A, 1)).assert_fact(linear("p", A, 1))
    first, second = db.candidates(template("p(A, X)"), {}, Environment())

    remaining = db.candidates(
        template("p(A, X)"), {}, Environment(), exclude={first.slot}
    )
    assert [candidate.slot for candidate in remaining] == [second.slot]


def test_persistent_candidates():
    db = NodeDatabase(A)
    db.assert_fact(persistent("edge", A, NodeId(2)))
    db.assert_fact(linear("edge", A, NodeId(3)))

    candidates = db.candidates(template("!edge(A, B)"), {}, Environment())
    assert [candidate.bindings["B"] for candidate in candidates] == [
        NodeId(2)
    ]
    assert candidates[0].slot is None


def _unifiable(names: list[str], fact: Fact, bound: dict) -> bool:
    seen = dict(bound)
    for name, value in zip(names, fact.args):
        if name.isdigit():
            if value != int(name):
                return False
        elif name in seen:
            if seen[name] != value:
                return False
        else:
            seen[name] = value
    return True


@pytest.mark.parametrize("seed", range(25))
def test_candidates_agree_with_a_full_scan(seed):
    rng = random.Random(seed)
    db = NodeDatabase(A)
    for _ in range(rng.randint(0, 10)):
        db.assert_fact(linear("p", A, rng.randint(0, 2), rng.randint(0, 2)))
        db.assert_fact(
            persistent("q", A, rng.randint(0, 2), rng.randint(0, 2))
        )
    names = ["A"] + [rng.choice(["X", "Y", "0", "1", "2"]) for _ in range(2)]
    bound = {name: rng.randint(0, 2) for name in "XY" if rng.random() < 0.3}
    slots = [slot for slot, _ in db.linear_slots("p")]
    exclude = set(rng.sample(slots, k=len(slots) // 3))
    args = ", ".join(names)

    linear_candidates = db.candidates(
        template(f"p({args})"), bound, Environment(), exclude
    )
    persistent_candidates = db.candidates(
        template(f"!q({args})"), bound, Environment()
    )

    assert [(c.slot, c.fact) for c in linear_candidates] == [
        (slot, fact)
        for slot, fact in db.linear_slots("p")
        if slot not in exclude and _unifiable(names, fact, bound)
    ]
    assert [c.fact for c in persistent_candidates] == [
        fact
        for fact in db.persistent_facts("q")
        if _unifiable(names, fact, bound)
    ]


def test_dump_lines():
    db = NodeDatabase(A)
    db.assert_fact(linear("visited", A))
    db.assert_fact(persistent("edge", A, NodeId(2)))
    db.assert_fact(linear("p", A, 2)).assert_fact(linear("p", A, 2))

    assert db.dump_lines() == [
        "node @1: !edge(@1, @2) x1",
        "node @1: p(@1, 2) x2",
        "node @1: visited(@1) x1",
    ]


def test_fact_string():
    fact = Fact("message", (A, "Hello World", (NodeId(3), NodeId(4))))
    assert str(fact) == "message(@1, 'Hello World', [@3, @4])"


def test_copy_is_independent():
    db = NodeDatabase(A)
    db.assert_fact(linear("p", A))
    other = db.copy()
    other.retract_fact(linear("p", A))
    assert db.multiplicity(linear("p", A)) == 1
    assert other.is_empty()


def test_snapshot_detects_changes():
    db = NodeDatabase(A)
    db.assert_fact(linear("p", A))
    before = db.snapshot()
    db.assert_fact(linear("q", A))
    assert db.snapshot() != before
