# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from typing import Iterator

from linmeld.engine.plan import body_templates
from linmeld.errors import Diagnostic, LocalityViolation
from linmeld.language.printer import format_template
from linmeld.language.syntax import (
    Aggregate,
    Comprehension,
    FactTemplate,
    Rule,
    Var,
)


def matched_templates(rule: Rule) -> Iterator[FactTemplate]:
    """
    Every fact template matched against the database when the rule runs
    """
    yield from body_templates(rule.body)
    for term in rule.head:
        if isinstance(term, (Comprehension, Aggregate)):
            yield from body_templates(term.body)


def check_locality(rule: Rule) -> str:
    """
    Check that all matched templates of a rule live at the same node

    Returns:
        The name of the home variable

    Raises:
        LocalityViolation: Naming the first template with a different or
            non variable first argument
    """
    home = None
    for template in matched_templates(rule):
        first = template.home
        location = template.location
        if not isinstance(first, Var) or (
            home is not None and first.name != home
        ):
            raise LocalityViolation(
                Diagnostic(
                    code="LocalityViolation",
                    message=(
                        f"{format_template(template)} is not located at "
                        f"the home node {home or 'variable'} of rule "
                        f"{rule.priority}"
                    ),
                    line=location.line if location else 0,
                    column=location.column if location else 0,
                    rule=rule.priority,
                )
            )
        home = first.name

    if home is None:
        location = rule.location
        raise LocalityViolation(
            Diagnostic(
                code="LocalityViolation",
                message=f"rule {rule.priority} matches no fact",
                line=location.line if location else 0,
                column=location.column if location else 0,
                rule=rule.priority,
            )
        )
    return home
