# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import replace

import pytest

from linmeld.checker.checker import check_program
from linmeld.corpus.fixtures import PROGRAMS
from linmeld.engine.engine import Engine
from linmeld.errors import BoundExceeded
from linmeld.language.parser import parse
from linmeld.models.database import NodeDatabase
from linmeld.models.fact import linear, persistent
from linmeld.models.values import NodeId
from linmeld.oracle.hld import HighLevelOracle, check_soundness, hld_apply

A = NodeId(1)

VISIT = check_program(parse((PROGRAMS / "visit.lm").read_text()))


def database(facts) -> NodeDatabase:
    db = NodeDatabase(A)
    for fact in facts:
        db.assert_fact(fact)
    return db


def visit_database(*facts) -> NodeDatabase:
    return database(
        [persistent("edge", A, NodeId(2)), persistent("edge", A, NodeId(4))]
        + list(facts)
    )


def test_already_visited_has_one_outcome():
    db = visit_database(linear("visit", A), linear("visited", A))
    lld = Engine(VISIT).run_node(db)

    outcomes = hld_apply(db, VISIT, VISIT.rules[1])

    assert lld is not None
    assert outcomes == frozenset([lld.canonical()])


def test_comprehension_outcomes_include_every_unfolding():
    db = visit_database(linear("visit", A), linear("unvisited", A))
    lld = Engine(VISIT).run_node(db)

    outcomes = hld_apply(db, VISIT, VISIT.rules[0])

    assert lld is not None
    assert check_soundness(lld, outcomes)
    partial = replace(
        lld, derived_linear=lld.derived_linear[:1]
    ).canonical()
    assert partial in outcomes
    assert len(outcomes) > 2


def test_dropping_a_plain_head_fact_is_unsound():
    db = visit_database(linear("visit", A), linear("unvisited", A))
    lld = Engine(VISIT).run_node(db)
    assert lld is not None

    mutated = replace(lld, derived_linear=lld.derived_linear[1:])

    assert not check_soundness(mutated, hld_apply(db, VISIT, VISIT.rules[0]))


def test_duplicate_facts_merge():
    program = check_program(
        parse("type linear p(node). type linear q(node). p(A) -o q(A).")
    )
    db = database([linear("p", A), linear("p", A)])

    outcomes = hld_apply(db, program, program.rules[0])

    assert len(outcomes) == 1


def test_outcomes_count_distinct_body_matches():
    program = check_program(
        parse(
            "type linear p(node, int). type linear q(node, int).\n"
            "type linear r(node, int, int).\n"
            "p(A, X), q(A, Y), X < Y -o r(A, X, Y)."
        )
    )
    db = database(
        [
            linear("p", A, 1),
            linear("p", A, 2),
            linear("p", A, 7),
            linear("q", A, 5),
        ]
    )
    oracle = HighLevelOracle(program)

    outcomes = oracle.apply(db, program.rules[0])

    assert len(oracle.matches(db, program.rules[0].rule.body, {})) == 2
    assert len(outcomes) == 2
    assert check_soundness(Engine(program).run_node(db), outcomes)


def test_order_of_facts_does_not_matter():
    facts = [
        linear("visit", A),
        linear("unvisited", A),
        persistent("edge", A, NodeId(2)),
        persistent("edge", A, NodeId(4)),
    ]
    forward = hld_apply(database(facts), VISIT, VISIT.rules[0])
    backward = hld_apply(database(reversed(facts)), VISIT, VISIT.rules[0])
    assert forward == backward


def test_aggregate_outcomes_contain_the_engine_result():
    program = check_program(
        parse(
            """
            type linear price(node, int).
            type linear count-prices(node).
            type linear total(node, int).
            count-prices(A) -o [sum => P | . | price(A, P) | 1 | total(A, P)].
            """
        )
    )
    db = database(
        [
            linear("price", A, 3),
            linear("price", A, 4),
            linear("price", A, 5),
            linear("count-prices", A),
        ]
    )

    outcomes = hld_apply(db, program, program.rules[0])

    assert check_soundness(Engine(program).run_node(db), outcomes)


def test_bound_exceeded():
    db = visit_database(
        linear("visit", A), linear("visit", A), linear("unvisited", A)
    )
    with pytest.raises(BoundExceeded):
        hld_apply(db, VISIT, VISIT.rules[0], bound=2)


def test_quiescence_is_sound_only_without_outcomes():
    assert check_soundness(None, frozenset())
    assert not check_soundness(None, frozenset([((), (), ())]))
