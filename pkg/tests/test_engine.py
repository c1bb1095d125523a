# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from collections import Counter

import pytest

from linmeld.checker.checker import TypedProgram, check_program
from linmeld.corpus.fixtures import PROGRAMS
from linmeld.engine.derivation import FreshNodes
from linmeld.engine.engine import Engine
from linmeld.errors import DivisionByZero
from linmeld.language.parser import parse
from linmeld.models.database import NodeDatabase
from linmeld.models.fact import Fact, linear, persistent
from linmeld.models.values import NodeId

A = NodeId(1)


def compile_source(source: str) -> TypedProgram:
    return check_program(parse(source))


def compile_corpus(name: str) -> TypedProgram:
    return compile_source((PROGRAMS / name).read_text(encoding="utf8"))


def database(facts, node: NodeId = A) -> NodeDatabase:
    db = NodeDatabase(node)
    for fact in facts:
        if fact.home == node:
            db.assert_fact(fact)
    return db


def apply(db: NodeDatabase, outcome) -> None:
    for predicate, slot, _ in outcome.consumed:
        db.retract_slot(predicate, slot)
    for fact in outcome.derived_linear + outcome.derived_persistent:
        if fact.home == db.node:
            db.assert_fact(fact)


VISIT_FACTS = [
    persistent("edge", A, NodeId(2)),
    persistent("edge", A, NodeId(4)),
]


def test_visit_marks_node_and_visits_neighbours():
    program = compile_corpus("visit.lm")
    db = database(
        VISIT_FACTS + [linear("unvisited", A), linear("visit", A)]
    )

    outcome = Engine(program, world=4).run_node(db)

    assert outcome is not None
    assert outcome.rule == 0
    assert Counter(outcome.consumed_facts) == Counter(
        [linear("visit", A), linear("unvisited", A)]
    )
    assert outcome.derived_linear == (
        linear("visited", A),
        linear("visit", NodeId(2)),
        linear("visit", NodeId(4)),
    )
    assert outcome.derived_persistent == ()


def test_already_visited():
    program = compile_corpus("visit.lm")
    db = database(VISIT_FACTS + [linear("visit", A), linear("visited", A)])

    outcome = Engine(program).run_node(db)

    assert outcome is not None
    assert outcome.rule == 1
    assert Counter(outcome.consumed_facts) == Counter(
        [linear("visit", A), linear("visited", A)]
    )
    assert outcome.derived_linear == (linear("visited", A),)


def test_quiescent_node():
    program = compile_corpus("visit.lm")
    assert Engine(program).run_node(database([])) is None
    assert Engine(program).run_node(database(VISIT_FACTS)) is None


def test_engine_does_not_modify_the_database():
    program = compile_corpus("visit.lm")
    db = database(VISIT_FACTS + [linear("unvisited", A), linear("visit", A)])
    before = db.snapshot()

    Engine(program).run_node(db)

    assert db.snapshot() == before


def test_message_body_bindings():
    program = compile_corpus("message.lm")
    message = Fact("message", (A, "Hello World", (NodeId(3), NodeId(4))))
    db = database(VISIT_FACTS[:1] + [persistent("edge", A, NodeId(3)), message])

    matcher = Engine(program).match_body(db, program.rules[0])

    assert matcher is not None
    match = matcher.current()
    assert match.bindings == {
        "A": A,
        "Content": "Hello World",
        "B": NodeId(3),
        "L": (NodeId(4),),
    }
    assert [fact for _, _, fact in match.consumed] == [message]
    assert match.persistent == (persistent("edge", A, NodeId(3)),)


def test_message_received():
    program = compile_corpus("message.lm")
    message = Fact("message", (NodeId(4), "Hello World", ()))

    outcome = Engine(program).run_node(database([message], NodeId(4)))

    assert outcome is not None
    assert outcome.rule == 1
    assert outcome.consumed_facts == (message,)
    assert outcome.derived_linear == ()
    assert outcome.derived_persistent == ()


def test_constraint_prunes_every_candidate():
    program = compile_source(
        "type linear p(node, int). type linear q(node).\n"
        "p(A, X), X > 5 -o q(A)."
    )
    assert Engine(program).run_node(database([linear("p", A, 3)])) is None


def test_backtracking_to_next_candidate():
    program = compile_source(
        "type linear p(node, int). type linear q(node, int).\n"
        "type linear r(node, int).\n"
        "p(A, X), q(A, X) -o r(A, X)."
    )
    db = database([linear("p", A, 1), linear("p", A, 2), linear("q", A, 2)])

    outcome = Engine(program).run_node(db)

    assert outcome is not None
    assert Counter(outcome.consumed_facts) == Counter(
        [linear("p", A, 2), linear("q", A, 2)]
    )
    assert outcome.derived_linear == (linear("r", A, 2),)


def test_failed_attempt_falls_through_to_next_rule():
    program = compile_source(
        "type linear p(node, int). type linear q(node, int).\n"
        "type linear r(node, int).\n"
        "p(A, X), q(A, X) -o r(A, X).\n"
        "p(A, X) -o r(A, 0)."
    )
    db = database([linear("p", A, 1), linear("q", A, 2)])

    outcome = Engine(program, self_check=True).run_node(db)

    assert outcome is not None
    assert outcome.rule == 1
    assert outcome.derived_linear == (linear("r", A, 0),)


def test_committed_choice_prefers_earlier_rule():
    program = compile_source(
        "type linear p(node). type linear q(node). type linear r(node).\n"
        "p(A) -o q(A).\n"
        "p(A) -o r(A)."
    )
    outcome = Engine(program).run_node(database([linear("p", A)]))
    assert outcome is not None
    assert outcome.rule == 0


COMPREHENSION = """
type linear go(node).
type linear b(node, int).
type linear c(node, int).
go(A) -o {X | b(A, X) | c(A, X)}.
"""


def test_comprehension_consumes_every_match():
    program = compile_source(COMPREHENSION)
    db = database([linear("go", A), linear("b", A, 1), linear("b", A, 2)])

    outcome = Engine(program, self_check=True).run_node(db)

    assert outcome is not None
    assert Counter(outcome.consumed_facts) == Counter(
        [linear("go", A), linear("b", A, 1), linear("b", A, 2)]
    )
    assert outcome.derived_linear == (linear("c", A, 1), linear("c", A, 2))


def test_vacuous_comprehension():
    program = compile_source(COMPREHENSION)

    outcome = Engine(program).run_node(database([linear("go", A)]))

    assert outcome is not None
    assert outcome.consumed_facts == (linear("go", A),)
    assert outcome.derived_linear == ()


def test_comprehension_with_persistent_prefix():
    program = compile_source(
        """
        type e(node, int).
        type linear go(node).
        type linear token(node, int).
        type linear hit(node, int, int).
        go(A) -o {X, Y | !e(A, X), token(A, Y) | hit(A, X, Y)}.
        """
    )
    db = database(
        [
            persistent("e", A, 1),
            persistent("e", A, 2),
            linear("token", A, 7),
            linear("token", A, 8),
            linear("go", A),
        ]
    )

    outcome = Engine(program, self_check=True).run_node(db)

    assert outcome is not None
    assert outcome.derived_linear == (
        linear("hit", A, 1, 7),
        linear("hit", A, 1, 8),
    )


PRICES = """
type linear price(node, int).
type linear count-prices(node).
type linear total(node, int).
count-prices(A) -o [sum => P | . | price(A, P) | 1 | total(A, P)].
"""


def test_sum_aggregate():
    program = compile_source(PRICES)
    db = database(
        [
            linear("price", A, 3),
            linear("price", A, 4),
            linear("price", A, 5),
            linear("count-prices", A),
        ]
    )

    outcome = Engine(program, self_check=True).run_node(db)

    assert outcome is not None
    assert outcome.derived_linear == (linear("total", A, 12),)
    assert len(outcome.consumed_facts) == 4


def test_sum_aggregate_without_matches():
    program = compile_source(PRICES)

    outcome = Engine(program).run_node(database([linear("count-prices", A)]))

    assert outcome is not None
    assert outcome.derived_linear == (linear("total", A, 0),)


def test_min_aggregate_without_matches_derives_nothing():
    program = compile_source(
        """
        type linear price(node, int).
        type linear go(node).
        type linear cheapest(node, int).
        go(A) -o [min => P | . | price(A, P) | 1 | cheapest(A, P)].
        """
    )
    outcome = Engine(program).run_node(database([linear("go", A)]))
    assert outcome is not None
    assert outcome.derived_linear == ()


def test_max_aggregate():
    program = compile_source(
        """
        type linear price(node, int).
        type linear go(node).
        type linear highest(node, int).
        go(A) -o [max => P | . | price(A, P) | 1 | highest(A, P)].
        """
    )
    db = database(
        [linear("price", A, 4), linear("price", A, 9), linear("go", A)]
    )
    outcome = Engine(program).run_node(db)
    assert outcome is not None
    assert outcome.derived_linear == (linear("highest", A, 9),)


def test_double_aggregate_folds_rank_contributions():
    program = compile_source(
        """
        type linear newrank(node, node, float, int).
        type linear accumulator(node, float, int, int).
        newrank(A, B, V, Id), accumulator(A, Acc, T, Id), T > 0
           -o [sum => S, count => C | D | newrank(A, D, S, Id) | 1 |
               accumulator(A, Acc + V + S, T - 1 - C, Id)].
        """
    )
    db = database(
        [
            linear("newrank", A, NodeId(2), 0.3, 1),
            linear("newrank", A, NodeId(3), 0.1, 1),
            linear("newrank", A, NodeId(4), 0.2, 1),
            linear("accumulator", A, 0.0, 3, 1),
        ]
    )

    outcome = Engine(program).run_node(db)

    assert outcome is not None
    (accumulator,) = outcome.derived_linear
    _, value, pending, iteration = accumulator.args
    assert value == pytest.approx(0.6)
    assert pending == 0
    assert iteration == 1
    assert len(outcome.consumed_facts) == 4


def test_count_aggregate_agrees_with_comprehension():
    source = """
    type e(node, int).
    type linear go(node).
    type linear seen(node, int).
    type linear counted(node, int).
    go(A) -o [count => C | X | !e(A, X) | 1 | counted(A, C)].
    """
    program = compile_source(source)
    facts = [persistent("e", A, value) for value in (1, 2, 3)]
    outcome = Engine(program).run_node(database(facts + [linear("go", A)]))

    comprehension = compile_source(
        source.replace(
            "[count => C | X | !e(A, X) | 1 | counted(A, C)]",
            "{X | !e(A, X) | seen(A, X)}",
        )
    )
    applications = Engine(comprehension).run_node(
        database(facts + [linear("go", A)])
    )

    assert outcome is not None and applications is not None
    assert outcome.derived_linear == (
        linear("counted", A, len(applications.derived_linear)),
    )


PICKED = (PROGRAMS / "picked.lm").read_text(encoding="utf8")


def test_min_selector():
    program = compile_source(PICKED)
    db = database(program.axioms)

    outcome = Engine(program).run_node(db)

    assert outcome is not None
    assert outcome.consumed_facts == (linear("weight", A, NodeId(3), 1),)
    assert outcome.derived_linear == (linear("picked", A, NodeId(3), 1),)


def test_max_selector():
    program = compile_source(PICKED.replace("[min", "[max"))
    outcome = Engine(program).run_node(database(program.axioms))
    assert outcome is not None
    assert outcome.derived_linear == (linear("picked", A, NodeId(2), 3),)


def test_random_selector_is_deterministic_per_seed():
    program = compile_source(PICKED.replace("[min", "[random"))

    first = Engine(program, seed=7).run_node(database(program.axioms))
    second = Engine(program, seed=7).run_node(database(program.axioms))

    assert first is not None and second is not None
    assert first.derived_linear == second.derived_linear


WORK = """
type linear do-work(node, int).
type linear perform-work(node, int).
do-work(A, W) -o exists B. (perform-work(B, W)).
"""


def test_exists_creates_fresh_nodes():
    program = compile_source(WORK)
    db = database([linear("do-work", A, 7), linear("do-work", A, 9)])
    engine = Engine(
        program, fresh=FreshNodes.above(NodeId(i) for i in range(1, 5))
    )

    first = engine.run_node(db)
    assert first is not None
    apply(db, first)
    second = engine.run_node(db)
    assert second is not None

    assert first.new_nodes == (NodeId(5),)
    assert first.derived_linear == (linear("perform-work", NodeId(5), 7),)
    assert second.new_nodes == (NodeId(6),)
    assert second.derived_linear == (linear("perform-work", NodeId(6), 9),)


def test_two_exists_in_one_head():
    program = compile_source(
        WORK.replace(
            "exists B. (perform-work(B, W))",
            "exists B. (perform-work(B, W)), exists C. (perform-work(C, W))",
        )
    )
    engine = Engine(program, fresh=FreshNodes(5))

    outcome = engine.run_node(database([linear("do-work", A, 7)]))

    assert outcome is not None
    assert outcome.new_nodes == (NodeId(5), NodeId(6))


def test_division_by_zero_propagates():
    program = compile_source(
        "type linear p(node, int). p(A, X), 10 / X > 0 -o 1."
    )
    with pytest.raises(DivisionByZero):
        Engine(program).run_node(database([linear("p", A, 0)]))


def test_assignment_in_body():
    program = compile_source(
        "type linear p(node, int). type linear q(node, int).\n"
        "p(A, X), Y = X * 2 -o q(A, Y)."
    )
    outcome = Engine(program).run_node(database([linear("p", A, 4)]))
    assert outcome is not None
    assert outcome.derived_linear == (linear("q", A, 8),)


def test_world_in_head():
    program = compile_source(
        "type linear go(node). type linear share(node, float).\n"
        "go(A) -o share(A, 1.0 / float(@world))."
    )
    outcome = Engine(program, world=4).run_node(database([linear("go", A)]))
    assert outcome is not None
    assert outcome.derived_linear == (linear("share", A, 0.25),)


def test_trace_line():
    program = compile_corpus("visit.lm")
    db = database(VISIT_FACTS + [linear("visit", A), linear("visited", A)])
    outcome = Engine(program).run_node(db)
    assert outcome is not None
    assert outcome.describe() == (
        "consumed {visit(@1), visited(@1)} derived {visited(@1)}"
    )


def test_persistent_comprehension_passes_self_check():
    program = compile_corpus("visit.lm")
    db = database(
        VISIT_FACTS + [linear("unvisited", A), linear("visit", A)]
    )

    outcome = Engine(program, world=4, self_check=True).run_node(db)

    assert outcome is not None
    assert outcome.derived_linear == (
        linear("visited", A),
        linear("visit", NodeId(2)),
        linear("visit", NodeId(4)),
    )


FILTERED = """
type linear go(node).
type linear b(node, int).
type linear c(node, int).
"""


def test_comprehension_leaves_no_match_behind():
    program = compile_source(
        FILTERED + "go(A) -o {X | b(A, X), X > 1 | c(A, X)}."
    )
    body_only = compile_source(FILTERED + "b(A, X), X > 1 -o 1.")
    db = database(
        [linear("go", A)] + [linear("b", A, value) for value in (1, 2, 3, 2)]
    )

    outcome = Engine(program, self_check=True).run_node(db)
    assert outcome is not None
    apply(db, outcome)

    assert db.linear_facts("b") == [linear("b", A, 1)]
    assert Counter(db.linear_facts("c")) == Counter(
        [linear("c", A, 2), linear("c", A, 3), linear("c", A, 2)]
    )
    assert Engine(body_only).run_node(db) is None


def test_fresh_nodes_start_above_the_axioms():
    program = compile_source(
        """
        type linear go(node).
        type linear made(node, node).
        go(A) -o exists B. (made(A, B)).
        go(@7).
        """
    )

    outcome = Engine(program).run_node(database(program.axioms, NodeId(7)))

    assert outcome is not None
    assert outcome.new_nodes == (NodeId(8),)
