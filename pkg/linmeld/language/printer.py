# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Render syntax trees back to text.

``format_program`` produces LM source that parses to an equal Program.
``dump_ast`` produces the canonical s-expression rendering used by
``lm run --dump-ast``.
"""

import dataclasses
from enum import Enum
from typing import Any, Iterable

from linmeld.language.syntax import (
    Aggregate,
    Axiom,
    Binary,
    BodyExists,
    Call,
    Comprehension,
    ConstDecl,
    ConstRef,
    Constraint,
    Exists,
    Expr,
    FactTemplate,
    ListExpr,
    Literal,
    One,
    PairExpr,
    PredicateDecl,
    Program,
    Rule,
    Unary,
    Var,
    Wildcard,
    World,
)
from linmeld.models.values import format_value

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "=": 3,
    "<>": 3,
    "<": 3,
    "<=": 3,
    ">": 3,
    ">=": 3,
    "+": 4,
    "-": 4,
    "*": 5,
    "/": 5,
    "%": 5,
}
_UNARY_PRECEDENCE = 6


def _precedence(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return _UNARY_PRECEDENCE
    if isinstance(expr, Literal) and isinstance(expr.value, (int, float)):
        if not isinstance(expr.value, bool) and expr.value < 0:
            return _UNARY_PRECEDENCE
    return _UNARY_PRECEDENCE + 1


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Wildcard):
        return "_"
    if isinstance(expr, Literal):
        return format_value(expr.value)
    if isinstance(expr, ConstRef):
        return expr.name
    if isinstance(expr, World):
        return "@world"
    if isinstance(expr, Unary):
        operand = format_expr(expr.operand)
        if _precedence(expr.operand) < _UNARY_PRECEDENCE:
            operand = f"({operand})"
        return f"{expr.op}{operand}"
    if isinstance(expr, Binary):
        precedence = _PRECEDENCE[expr.op]
        left = format_expr(expr.left)
        right = format_expr(expr.right)
        # comparisons do not chain and every other operator is left
        # associative
        left_limit = precedence + 1 if precedence == 3 else precedence
        if _precedence(expr.left) < left_limit:
            left = f"({left})"
        if _precedence(expr.right) <= precedence:
            right = f"({right})"
        return f"{left} {expr.op} {right}"
    if isinstance(expr, Call):
        args = ", ".join(format_expr(arg) for arg in expr.args)
        return f"{expr.function}({args})"
    if isinstance(expr, ListExpr):
        items = ", ".join(format_expr(item) for item in expr.items)
        if expr.tail is not None:
            return f"[{items} | {format_expr(expr.tail)}]"
        return f"[{items}]"
    if isinstance(expr, PairExpr):
        return f"({format_expr(expr.first)}; {format_expr(expr.second)})"
    raise TypeError(f"unknown expression {expr!r}")


def format_template(template: FactTemplate) -> str:
    args = ", ".join(format_expr(arg) for arg in template.args)
    prefix = "!" if template.persistent else ""
    return f"{prefix}{template.predicate}({args})"


def _variables(names: tuple[str, ...]) -> str:
    return ", ".join(names) if names else "."


def format_term(term: Any) -> str:
    if isinstance(term, FactTemplate):
        return format_template(term)
    if isinstance(term, One):
        return "1"
    if isinstance(term, Constraint):
        return format_expr(term.expr)
    if isinstance(term, BodyExists):
        return (
            f"exists {', '.join(term.variables)}. "
            f"({format_terms(term.body)})"
        )
    if isinstance(term, Exists):
        return (
            f"exists {', '.join(term.variables)}. "
            f"({format_terms(term.head)})"
        )
    if isinstance(term, Comprehension):
        return (
            f"{{{_variables(term.variables)} | {format_terms(term.body)} | "
            f"{format_terms(term.head)}}}"
        )
    if isinstance(term, Aggregate):
        accumulators = ", ".join(
            f"{accumulator.operation.value} => {accumulator.variable}"
            for accumulator in term.accumulators
        )
        return (
            f"[{accumulators} | {_variables(term.variables)} | "
            f"{format_terms(term.body)} | {format_terms(term.head1)} | "
            f"{format_terms(term.head2)}]"
        )
    raise TypeError(f"unknown term {term!r}")


def format_terms(terms: Iterable[Any]) -> str:
    return ", ".join(format_term(term) for term in terms)


def format_declaration(decl: PredicateDecl) -> str:
    linear = "linear " if decl.linear else ""
    args = ", ".join(str(arg_type) for arg_type in decl.arg_types)
    return f"type {linear}{decl.name}({args})."


def format_constant(const: ConstDecl) -> str:
    return f"const {const.name} = {format_expr(const.expr)}."


def format_rule(rule: Rule) -> str:
    head = format_terms(rule.head)
    if rule.selector:
        return (
            f"[{rule.selector.operation.value} => {rule.selector.variable} | "
            f"{format_terms(rule.body)}] -o {head}."
        )
    return f"{format_terms(rule.body)}\n   -o {head}."


def format_axiom(axiom: Axiom) -> str:
    return f"{format_template(axiom.fact)}."


def format_program(program: Program) -> str:
    """
    Render a Program as LM source text

    Declarations come first, followed by constants, rules in priority order
    and finally the axioms.
    """
    sections = [
        [format_declaration(decl) for decl in program.declarations],
        [format_constant(const) for const in program.constants],
        [format_rule(rule) for rule in program.rules],
        [format_axiom(axiom) for axiom in program.axioms],
    ]
    return "\n\n".join("\n".join(lines) for lines in sections if lines) + "\n"


def _atom(value: Any) -> str:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, str):
        return value
    return format_value(value)


def _dump(node: Any, indent: int, lines: list[str]) -> None:
    prefix = "  " * indent
    if isinstance(node, tuple):
        for item in node:
            _dump(item, indent, lines)
        return

    fields = [field for field in dataclasses.fields(node) if field.compare]
    atoms = []
    children = []
    for field in fields:
        value = getattr(node, field.name)
        if value is None:
            continue
        if field.name == "value":
            atoms.append(f"value={format_value(value)}")
            continue
        if dataclasses.is_dataclass(value):
            children.append((field.name, value))
        elif isinstance(value, tuple) and any(
            dataclasses.is_dataclass(item) for item in value
        ):
            children.append((field.name, value))
        elif isinstance(value, tuple):
            atoms.append(
                f"{field.name}=({' '.join(_atom(item) for item in value)})"
            )
        else:
            atoms.append(f"{field.name}={_atom(value)}")

    header = " ".join([type(node).__name__] + atoms)
    if not children:
        lines.append(f"{prefix}({header})")
        return

    lines.append(f"{prefix}({header}")
    for name, child in children:
        lines.append(f"{prefix}  :{name}")
        _dump(child, indent + 2, lines)
    lines[-1] += ")"


def dump_ast(program: Program) -> str:
    """
    Canonical s-expression rendering of a Program, one node per line
    """
    lines: list[str] = []
    _dump(program, 0, lines)
    return "\n".join(lines) + "\n"
