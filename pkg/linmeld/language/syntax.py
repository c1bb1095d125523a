# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Abstract syntax of LM programs.

Conjunctions are kept flat: a body or a head is a tuple of terms in source
order. Locations never take part in equality so that a reparsed program
compares equal to the original.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from linmeld.models.values import Value


@dataclass(frozen=True, slots=True)
class Location:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def _location() -> Optional[Location]:
    return field(default=None, compare=False, repr=False)


class Linearity(Enum):
    LINEAR = "linear"
    PERSISTENT = "persistent"


@dataclass(frozen=True, slots=True)
class TypeExpr:
    kind: str
    args: tuple["TypeExpr", ...] = ()

    def __str__(self) -> str:
        if self.kind == "list":
            return f"list {self.args[0]}"
        if self.kind == "pair":
            return f"pair {self.args[0]}; {self.args[1]}"
        return self.kind


NODE = TypeExpr("node")
INT = TypeExpr("int")
FLOAT = TypeExpr("float")
STRING = TypeExpr("string")
BOOL = TypeExpr("bool")
BASE_TYPES = {t.kind: t for t in (NODE, INT, FLOAT, STRING, BOOL)}


def list_of(element: TypeExpr) -> TypeExpr:
    return TypeExpr("list", (element,))


def pair_of(first: TypeExpr, second: TypeExpr) -> TypeExpr:
    return TypeExpr("pair", (first, second))


# Expressions


@dataclass(frozen=True, kw_only=True, slots=True)
class Var:
    name: str
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Wildcard:
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Literal:
    value: Value
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class ConstRef:
    name: str
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class World:
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Unary:
    op: str
    operand: "Expr"
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Call:
    function: str
    args: tuple["Expr", ...]
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class ListExpr:
    """
    List construction in heads and constraints, list pattern in fact
    templates of a body. ``[H1, H2 | T]`` has ``tail`` set, ``[]`` has
    neither items nor a tail.
    """

    items: tuple["Expr", ...] = ()
    tail: Optional["Expr"] = None
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class PairExpr:
    first: "Expr"
    second: "Expr"
    location: Optional[Location] = _location()


Expr = Union[
    Var, Wildcard, Literal, ConstRef, World, Unary, Binary, Call, ListExpr,
    PairExpr,
]

ARITHMETIC_OPERATORS = ("+", "-", "*", "/", "%")
COMPARISON_OPERATORS = ("=", "<>", "<", "<=", ">", ">=")
BOOLEAN_OPERATORS = ("||", "&&")
BUILTIN_FUNCTIONS = ("float", "int", "head", "tail", "fst", "snd")


# Body and head terms


@dataclass(frozen=True, kw_only=True, slots=True)
class FactTemplate:
    predicate: str
    args: tuple[Expr, ...]
    persistent: bool = False
    location: Optional[Location] = _location()

    @property
    def home(self) -> Expr:
        return self.args[0]


@dataclass(frozen=True, kw_only=True, slots=True)
class Constraint:
    expr: Expr
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class One:
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class BodyExists:
    variables: tuple[str, ...]
    body: tuple["BodyTerm", ...]
    location: Optional[Location] = _location()


BodyTerm = Union[FactTemplate, Constraint, One, BodyExists]
SubHeadTerm = Union[FactTemplate, One]


@dataclass(frozen=True, kw_only=True, slots=True)
class Exists:
    variables: tuple[str, ...]
    head: tuple[SubHeadTerm, ...]
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Comprehension:
    variables: tuple[str, ...]
    body: tuple[BodyTerm, ...]
    head: tuple[SubHeadTerm, ...]
    location: Optional[Location] = _location()


class AggregateOperation(Enum):
    MIN = "min"
    MAX = "max"
    SUM = "sum"
    COUNT = "count"


@dataclass(frozen=True, kw_only=True, slots=True)
class Accumulator:
    operation: AggregateOperation
    variable: str


@dataclass(frozen=True, kw_only=True, slots=True)
class Aggregate:
    accumulators: tuple[Accumulator, ...]
    variables: tuple[str, ...]
    body: tuple[BodyTerm, ...]
    head1: tuple[SubHeadTerm, ...]
    head2: tuple[SubHeadTerm, ...]
    location: Optional[Location] = _location()


HeadTerm = Union[FactTemplate, One, Exists, Comprehension, Aggregate]


class SelectorOperation(Enum):
    MIN = "min"
    MAX = "max"
    RANDOM = "random"


@dataclass(frozen=True, kw_only=True, slots=True)
class Selector:
    operation: SelectorOperation
    variable: str


# Program


@dataclass(frozen=True, kw_only=True, slots=True)
class PredicateDecl:
    name: str
    arg_types: tuple[TypeExpr, ...]
    linearity: Linearity = Linearity.PERSISTENT
    location: Optional[Location] = _location()

    @property
    def linear(self) -> bool:
        return self.linearity is Linearity.LINEAR


@dataclass(frozen=True, kw_only=True, slots=True)
class ConstDecl:
    name: str
    expr: Expr
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Rule:
    priority: int
    body: tuple[BodyTerm, ...]
    head: tuple[HeadTerm, ...]
    selector: Optional[Selector] = None
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Axiom:
    fact: FactTemplate
    location: Optional[Location] = _location()


@dataclass(frozen=True, kw_only=True, slots=True)
class Program:
    declarations: tuple[PredicateDecl, ...] = ()
    constants: tuple[ConstDecl, ...] = ()
    rules: tuple[Rule, ...] = ()
    axioms: tuple[Axiom, ...] = ()

    def declaration(self, name: str) -> Optional[PredicateDecl]:
        for decl in self.declarations:
            if decl.name == name:
                return decl
        return None


def expr_variables(expr: Expr) -> set[str]:
    """Names of all variables occurring in an expression"""
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Unary):
        return expr_variables(expr.operand)
    if isinstance(expr, Binary):
        return expr_variables(expr.left) | expr_variables(expr.right)
    if isinstance(expr, Call):
        names: set[str] = set()
        for arg in expr.args:
            names |= expr_variables(arg)
        return names
    if isinstance(expr, ListExpr):
        names = set()
        for item in expr.items:
            names |= expr_variables(item)
        if expr.tail is not None:
            names |= expr_variables(expr.tail)
        return names
    if isinstance(expr, PairExpr):
        return expr_variables(expr.first) | expr_variables(expr.second)
    return set()


def template_variables(template: FactTemplate) -> set[str]:
    names: set[str] = set()
    for arg in template.args:
        names |= expr_variables(arg)
    return names


def is_pattern(expr: Expr) -> bool:
    """
    True if the expression can bind variables when matched against a value
    """
    if isinstance(expr, (Var, Wildcard)):
        return True
    if isinstance(expr, ListExpr):
        return all(is_pattern(item) or not expr_variables(item)
                   for item in expr.items) and (
            expr.tail is None
            or is_pattern(expr.tail)
            or not expr_variables(expr.tail)
        )
    if isinstance(expr, PairExpr):
        return True
    return not expr_variables(expr)
