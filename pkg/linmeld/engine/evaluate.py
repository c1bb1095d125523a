# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Strict evaluation of constraint and head expressions and matching of
fact template arguments against stored values."""

import math
from collections import ChainMap
from dataclasses import dataclass, field
from typing import Mapping, Optional

from linmeld.errors import (
    DivisionByZero,
    EvaluationTypeError,
    HeadOfEmptyList,
)
from linmeld.language.syntax import (
    Binary,
    Call,
    ConstRef,
    Expr,
    ListExpr,
    Literal,
    PairExpr,
    Unary,
    Var,
    Wildcard,
    World,
)
from linmeld.models.values import NodeId, Pair, Value, same_value


@dataclass(frozen=True, kw_only=True)
class Environment:
    """
    Values of expressions that do not depend on rule variables

    Arguments:
        constants: Resolved program constants
        world: Number of nodes in the graph when it was loaded
    """

    constants: Mapping[str, Value] = field(default_factory=dict)
    world: int = 0


def _is_number(value: Value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _numbers(op: str, left: Value, right: Value) -> None:
    if not (_is_number(left) and _is_number(right)):
        raise EvaluationTypeError(
            f"operator {op} needs numbers, got {left!r} and {right!r}"
        )
    if isinstance(left, float) != isinstance(right, float):
        raise EvaluationTypeError(
            f"operator {op} mixes int and float, use float() to convert"
        )


def _arithmetic(op: str, left: Value, right: Value) -> Value:
    _numbers(op, left, right)
    if op == "+":
        return left + right  # type: ignore[operator]
    if op == "-":
        return left - right  # type: ignore[operator]
    if op == "*":
        return left * right  # type: ignore[operator]
    if right == 0:
        raise DivisionByZero(f"{left!r} {op} {right!r}")
    if isinstance(left, float):
        if op == "/":
            return left / right  # type: ignore[operator]
        return math.fmod(left, right)  # type: ignore[arg-type]
    # integer division and remainder truncate toward zero
    quotient = abs(left) // abs(right)  # type: ignore[arg-type]
    if (left < 0) != (right < 0):  # type: ignore[operator]
        quotient = -quotient
    if op == "/":
        return quotient
    return left - right * quotient  # type: ignore[operator]


def _ordered(value: Value) -> object:
    if _is_number(value) or isinstance(value, str):
        return value
    if isinstance(value, NodeId):
        return value.id
    raise EvaluationTypeError(f"{value!r} can not be ordered")


def _equal(left: Value, right: Value) -> bool:
    if _is_number(left) and _is_number(right):
        return left == right
    return same_value(left, right)


def _compare(op: str, left: Value, right: Value) -> bool:
    if op == "=":
        return _equal(left, right)
    if op == "<>":
        return not _equal(left, right)
    if _is_number(left) != _is_number(right) or type(left) is not type(
        right
    ):
        raise EvaluationTypeError(
            f"operator {op} can not compare {left!r} and {right!r}"
        )
    lhs = _ordered(left)
    rhs = _ordered(right)
    if op == "<":
        return lhs < rhs  # type: ignore[operator]
    if op == "<=":
        return lhs <= rhs  # type: ignore[operator]
    if op == ">":
        return lhs > rhs  # type: ignore[operator]
    return lhs >= rhs  # type: ignore[operator]


def _boolean(value: Value) -> bool:
    if not isinstance(value, bool):
        raise EvaluationTypeError(f"{value!r} is not a bool")
    return value


def _call(function: str, args: list[Value]) -> Value:
    if len(args) != 1:
        raise EvaluationTypeError(f"{function} takes exactly one argument")
    arg = args[0]
    if function == "float":
        if not _is_number(arg):
            raise EvaluationTypeError(f"float() of {arg!r}")
        return float(arg)  # type: ignore[arg-type]
    if function == "int":
        if not _is_number(arg):
            raise EvaluationTypeError(f"int() of {arg!r}")
        return int(arg)  # type: ignore[arg-type]
    if function in ("head", "tail"):
        if not isinstance(arg, tuple):
            raise EvaluationTypeError(f"{function}() of {arg!r}")
        if not arg:
            raise HeadOfEmptyList(f"{function}() of an empty list")
        return arg[0] if function == "head" else arg[1:]
    if function in ("fst", "snd"):
        if not isinstance(arg, Pair):
            raise EvaluationTypeError(f"{function}() of {arg!r}")
        return arg.first if function == "fst" else arg.second
    raise EvaluationTypeError(f"unknown function {function}")


def evaluate(
    expr: Expr, bindings: Mapping[str, Value], env: Environment
) -> Value:
    """
    Evaluate an expression under variable bindings

    Raises:
        DivisionByZero: Integer or float division by zero
        HeadOfEmptyList: ``head`` or ``tail`` of ``[]``
        EvaluationTypeError: Operands of unexpected type or unbound names
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Var):
        try:
            return bindings[expr.name]
        except KeyError:
            raise EvaluationTypeError(
                f"variable {expr.name} is not bound"
            ) from None
    if isinstance(expr, ConstRef):
        try:
            return env.constants[expr.name]
        except KeyError:
            raise EvaluationTypeError(
                f"constant {expr.name} is not defined"
            ) from None
    if isinstance(expr, World):
        return env.world
    if isinstance(expr, Binary):
        if expr.op == "||":
            return _boolean(evaluate(expr.left, bindings, env)) or _boolean(
                evaluate(expr.right, bindings, env)
            )
        if expr.op == "&&":
            return _boolean(evaluate(expr.left, bindings, env)) and _boolean(
                evaluate(expr.right, bindings, env)
            )
        left = evaluate(expr.left, bindings, env)
        right = evaluate(expr.right, bindings, env)
        if expr.op in ("+", "-", "*", "/", "%"):
            return _arithmetic(expr.op, left, right)
        return _compare(expr.op, left, right)
    if isinstance(expr, Unary):
        operand = evaluate(expr.operand, bindings, env)
        if not _is_number(operand):
            raise EvaluationTypeError(f"can not negate {operand!r}")
        return -operand  # type: ignore[operator]
    if isinstance(expr, Call):
        return _call(
            expr.function, [evaluate(arg, bindings, env) for arg in expr.args]
        )
    if isinstance(expr, ListExpr):
        items = tuple(evaluate(item, bindings, env) for item in expr.items)
        if expr.tail is None:
            return items
        tail = evaluate(expr.tail, bindings, env)
        if not isinstance(tail, tuple):
            raise EvaluationTypeError(f"list tail {tail!r} is not a list")
        return items + tail
    if isinstance(expr, PairExpr):
        return Pair(
            evaluate(expr.first, bindings, env),
            evaluate(expr.second, bindings, env),
        )
    if isinstance(expr, Wildcard):
        raise EvaluationTypeError("_ can not be evaluated")
    raise EvaluationTypeError(f"unknown expression {expr!r}")


def _unify(
    expr: Expr,
    value: Value,
    bindings: ChainMap,
    env: Environment,
) -> bool:
    if isinstance(expr, Wildcard):
        return True
    if isinstance(expr, Var):
        if expr.name in bindings:
            return same_value(bindings[expr.name], value)
        bindings[expr.name] = value
        return True
    if isinstance(expr, ListExpr):
        if not isinstance(value, tuple):
            return False
        count = len(expr.items)
        if len(value) < count or (expr.tail is None and len(value) != count):
            return False
        for item, element in zip(expr.items, value):
            if not _unify(item, element, bindings, env):
                return False
        if expr.tail is not None:
            return _unify(expr.tail, value[count:], bindings, env)
        return True
    if isinstance(expr, PairExpr):
        if not isinstance(value, Pair):
            return False
        return _unify(expr.first, value.first, bindings, env) and _unify(
            expr.second, value.second, bindings, env
        )
    return same_value(evaluate(expr, bindings, env), value)


def unify(
    args: tuple[Expr, ...],
    values: tuple[Value, ...],
    bound: Mapping[str, Value],
    env: Environment,
) -> Optional[dict[str, Value]]:
    """
    Match template arguments against the arguments of a fact

    Variables already in ``bound`` must match their value, other variables
    get bound. Arguments that are not patterns are evaluated and compared.

    Returns:
        The new bindings or None if the arguments do not match
    """
    if len(args) != len(values):
        return None
    extension: dict[str, Value] = {}
    bindings = ChainMap(extension, bound)  # type: ignore[arg-type]
    for arg, value in zip(args, values):
        if not _unify(arg, value, bindings, env):
            return None
    return extension
