# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import dataclass, field
from typing import Optional

from linmeld.language.syntax import (
    BOOL,
    FLOAT,
    INT,
    NODE,
    STRING,
    PredicateDecl,
    TypeExpr,
    list_of,
    pair_of,
)
from linmeld.models.values import NodeId, Pair, Value

# element type of the empty list literal
ANY = TypeExpr("any")
NUMERIC = (INT, FLOAT)


def type_of_value(value: Value) -> TypeExpr:
    if isinstance(value, NodeId):
        return NODE
    if isinstance(value, bool):
        return BOOL
    if isinstance(value, int):
        return INT
    if isinstance(value, float):
        return FLOAT
    if isinstance(value, str):
        return STRING
    if isinstance(value, tuple):
        element = ANY
        for item in value:
            element = unify_types(element, type_of_value(item)) or element
        return list_of(element)
    if isinstance(value, Pair):
        return pair_of(type_of_value(value.first), type_of_value(value.second))
    raise TypeError(f"{value!r} is not an LM value")


def unify_types(left: TypeExpr, right: TypeExpr) -> Optional[TypeExpr]:
    """
    The more precise of two compatible types or None if they conflict
    """
    if left.kind == "any":
        return right
    if right.kind == "any":
        return left
    if left.kind != right.kind or len(left.args) != len(right.args):
        return None
    args = []
    for left_arg, right_arg in zip(left.args, right.args):
        arg = unify_types(left_arg, right_arg)
        if arg is None:
            return None
        args.append(arg)
    return TypeExpr(left.kind, tuple(args))


def compatible(left: TypeExpr, right: TypeExpr) -> bool:
    return unify_types(left, right) is not None


@dataclass
class TypeEnv:
    """
    Types known while checking one rule

    A variable gets exactly one type per rule. Sub-expressions of a head
    check in child environments that see the variables of their parent.
    """

    predicates: dict[str, PredicateDecl]
    constants: dict[str, Value]
    variables: dict[str, TypeExpr] = field(default_factory=dict)

    def child(self) -> "TypeEnv":
        return TypeEnv(
            predicates=self.predicates,
            constants=self.constants,
            variables=dict(self.variables),
        )

    def constant_type(self, name: str) -> Optional[TypeExpr]:
        if name not in self.constants:
            return None
        return type_of_value(self.constants[name])


def is_numeric(type_expr: Optional[TypeExpr]) -> bool:
    return type_expr in NUMERIC
