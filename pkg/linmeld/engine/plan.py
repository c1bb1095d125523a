# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Ordering of body terms for matching.

Fact templates are matched in the order they are written. Every constraint
is evaluated at the earliest point where all of its variables are bound.
A constraint ``X = E`` whose variable X is not bound by any fact template
of the body is an assignment: it binds X as soon as E can be evaluated.
"""

from dataclasses import dataclass
from typing import Iterable, Union

from linmeld.language.syntax import (
    Binary,
    BodyExists,
    BodyTerm,
    Constraint,
    Expr,
    FactTemplate,
    Var,
    expr_variables,
    template_variables,
)


@dataclass(frozen=True, slots=True)
class MatchStep:
    template: FactTemplate


@dataclass(frozen=True, slots=True)
class CheckStep:
    constraint: Constraint


@dataclass(frozen=True, slots=True)
class AssignStep:
    variable: str
    expr: Expr
    constraint: Constraint


Step = Union[MatchStep, CheckStep, AssignStep]


class UnresolvedConstraints(Exception):
    """Constraints whose variables are never bound by the body"""

    def __init__(self, constraints: list[Constraint], bound: set[str]) -> None:
        super().__init__("unresolved constraints")
        self.constraints = constraints
        self.bound = bound


def flatten_body(
    body: Iterable[BodyTerm],
) -> list[Union[FactTemplate, Constraint]]:
    terms: list[Union[FactTemplate, Constraint]] = []
    for term in body:
        if isinstance(term, BodyExists):
            terms.extend(flatten_body(term.body))
        elif isinstance(term, (FactTemplate, Constraint)):
            terms.append(term)
    return terms


def body_templates(body: Iterable[BodyTerm]) -> list[FactTemplate]:
    return [
        term for term in flatten_body(body) if isinstance(term, FactTemplate)
    ]


def build_plan(
    body: Iterable[BodyTerm], bound: Iterable[str] = ()
) -> tuple[Step, ...]:
    """
    Order the terms of a body for matching

    Arguments:
        body: The body terms in source order
        bound: Variables bound before the body is matched

    Raises:
        UnresolvedConstraints: Some constraints can never be evaluated
    """
    terms = flatten_body(body)
    templates = [term for term in terms if isinstance(term, FactTemplate)]
    pending = [term for term in terms if isinstance(term, Constraint)]
    template_bound: set[str] = set()
    for template in templates:
        template_bound |= template_variables(template)

    known = set(bound)
    steps: list[Step] = []

    def flush() -> None:
        progress = True
        while progress:
            progress = False
            for constraint in pending:
                expr = constraint.expr
                if (
                    isinstance(expr, Binary)
                    and expr.op == "="
                    and isinstance(expr.left, Var)
                    and expr.left.name not in known
                    and expr.left.name not in template_bound
                ):
                    if expr_variables(expr.right) <= known:
                        steps.append(
                            AssignStep(expr.left.name, expr.right, constraint)
                        )
                        known.add(expr.left.name)
                        pending.remove(constraint)
                        progress = True
                        break
                elif expr_variables(expr) <= known:
                    steps.append(CheckStep(constraint))
                    pending.remove(constraint)
                    progress = True
                    break

    flush()
    for template in templates:
        steps.append(MatchStep(template))
        known |= template_variables(template)
        flush()

    if pending:
        raise UnresolvedConstraints(pending, known)
    return tuple(steps)

