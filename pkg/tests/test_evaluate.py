# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import pytest

from linmeld.engine.evaluate import Environment, evaluate, unify
from linmeld.errors import (
    DivisionByZero,
    EvaluationTypeError,
    HeadOfEmptyList,
)
from linmeld.language.parser import parse_expression
from linmeld.models.values import NodeId, Pair


def run(source: str, world: int = 0, **bindings):
    return evaluate(
        parse_expression(source), bindings, Environment(world=world)
    )


@pytest.mark.parametrize(
    "source,bindings,expected",
    [
        ("D1 <= D2", {"D1": 3, "D2": 3}, True),
        (
            "X <> X1 || Y <> Y1",
            {"X": 1, "X1": 1, "Y": 2, "Y1": 2},
            False,
        ),
        ("X < 0 || Y < 0", {"X": 0, "Y": -1}, True),
        ("0.85 + 0.15 * Acc", {"Acc": 0.0}, 0.85),
        ("T - 1 - C", {"T": 3, "C": 2}, 0),
        ("A = B", {"A": NodeId(1), "B": NodeId(1)}, True),
        ("A <> B", {"A": NodeId(1), "B": NodeId(2)}, True),
        ("A < B", {"A": NodeId(1), "B": NodeId(2)}, True),
        ("'a' < 'b'", {}, True),
        ("true && false", {}, False),
    ],
)
def test_expressions(source, bindings, expected):
    assert run(source, **bindings) == expected


def test_world():
    assert run("1.0 / float(@world)", world=4) == 0.25


@pytest.mark.parametrize(
    "source,expected",
    [
        ("7 / 2", 3),
        ("-7 / 2", -3),
        ("7 % 3", 1),
        ("-7 % 3", -1),
        ("7.0 / 2.0", 3.5),
    ],
)
def test_division_truncates_toward_zero(source, expected):
    assert run(source) == expected


@pytest.mark.parametrize(
    "source,expected",
    [
        ("int(2.7)", 2),
        ("float(3)", 3.0),
        ("head([1, 2])", 1),
        ("tail([1, 2])", (2,)),
        ("fst((1; 'a'))", 1),
        ("snd((1; 'a'))", "a"),
        ("[1 | [2, 3]]", (1, 2, 3)),
        ("(@1; 2)", Pair(NodeId(1), 2)),
    ],
)
def test_builtins_and_constructors(source, expected):
    assert run(source) == expected


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        run("1 / 0")


def test_float_division_by_zero():
    with pytest.raises(DivisionByZero):
        run("1.0 / 0.0")


def test_head_of_empty_list():
    with pytest.raises(HeadOfEmptyList):
        run("head([])")


def test_mixed_arithmetic():
    with pytest.raises(EvaluationTypeError):
        run("1 + 1.0")


def test_unbound_variable():
    with pytest.raises(EvaluationTypeError):
        run("X + 1")


def test_constant():
    env = Environment(constants={"size": 8})
    assert evaluate(parse_expression("size - 1"), {}, env) == 7


def test_unify_list_pattern():
    pattern = (parse_expression("[B | L]"),)
    bindings = unify(pattern, ((NodeId(3), NodeId(4)),), {}, Environment())
    assert bindings == {"B": NodeId(3), "L": (NodeId(4),)}


def test_unify_empty_list_pattern_rejects_longer_lists():
    pattern = (parse_expression("[]"),)
    assert unify(pattern, ((1,),), {}, Environment()) is None
    assert unify(pattern, ((),), {}, Environment()) == {}


def test_unify_checks_bound_variables():
    args = (parse_expression("A"), parse_expression("X"))
    values = (NodeId(1), 5)
    assert unify(args, values, {"X": 5}, Environment()) == {"A": NodeId(1)}
    assert unify(args, values, {"X": 6}, Environment()) is None


def test_unify_repeated_variable():
    args = (parse_expression("A"), parse_expression("A"))
    assert unify(args, (NodeId(1), NodeId(2)), {}, Environment()) is None


def test_unify_evaluates_expressions():
    args = (parse_expression("A"), parse_expression("size - 1"))
    env = Environment(constants={"size": 4})
    assert unify(args, (NodeId(1), 3), {}, env) == {"A": NodeId(1)}
    assert unify(args, (NodeId(1), 2), {}, env) is None


def test_float_and_int_are_different_values():
    args = (parse_expression("A"), parse_expression("1"))
    assert unify(args, (NodeId(1), 1.0), {}, Environment()) is None
