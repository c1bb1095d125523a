# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
import random
from typing import Optional

from linmeld.checker.checker import TypedProgram, TypedRule
from linmeld.engine.bindings import Bindings, Consumption
from linmeld.engine.derivation import DerivationOutcome, Derivation, FreshNodes
from linmeld.engine.matcher import Match, Matcher
from linmeld.errors import InvariantViolation
from linmeld.language.syntax import SelectorOperation
from linmeld.models.database import NodeDatabase
from linmeld.models.values import nodes_in, value_key

logger = logging.getLogger(__name__)


class Engine:
    """
    Applies the rules of a program to single node databases

    The engine never modifies a database. ``run_node`` returns what the
    first applicable rule consumes and derives and leaves applying the
    outcome to the caller.

    Arguments:
        program: The checked program
        world: Number of nodes in the graph, the value of ``@world``
        fresh: Allocator for exists expressions, shared by all engines of a
            run. Defaults to ids above every node named in the axioms.
        seed: Seed for ``random`` selectors
        self_check: Verify maximality of every comprehension and the
            purity of failed rule attempts
    """

    def __init__(
        self,
        program: TypedProgram,
        *,
        world: int = 0,
        fresh: Optional[FreshNodes] = None,
        seed: int = 0,
        self_check: bool = False,
    ) -> None:
        self.program = program
        self.env = program.environment(world)
        self.fresh = fresh or FreshNodes.above(
            node
            for fact in program.axioms
            for arg in fact.args
            for node in nodes_in(arg)
        )
        self.seed = seed
        self.self_check = self_check

    def run_node(self, db: NodeDatabase) -> Optional[DerivationOutcome]:
        """
        Fire the first rule in priority order whose body matches

        Returns:
            The outcome of the rule that fired or None if the node is
            quiescent
        """
        for rule in self.program.rules:
            if not all(db.has_linear(name) for name in rule.linear_predicates):
                continue

            before = db.snapshot() if self.self_check else None
            outcome = self.apply_rule(db, rule)
            if outcome is not None:
                logger.debug(
                    "node %s rule %d: %s",
                    db.node,
                    rule.priority,
                    outcome.describe(),
                )
                return outcome
            if self.self_check and db.snapshot() != before:
                raise InvariantViolation(
                    f"failed attempt of rule {rule.priority} changed the "
                    f"database of {db.node}"
                )
        return None

    def match_body(
        self, db: NodeDatabase, rule: TypedRule
    ) -> Optional[Matcher]:
        """
        Find the first match of a rule body

        Returns:
            The matcher positioned on the match or None if the rule fails
        """
        matcher = Matcher(db, self.env, Bindings(), Consumption())
        if matcher.run(rule.plan):
            return matcher
        return None

    def apply_rule(
        self, db: NodeDatabase, rule: TypedRule
    ) -> Optional[DerivationOutcome]:
        if rule.rule.selector is not None:
            return self.apply_selector(db, rule)

        matcher = self.match_body(db, rule)
        if matcher is None:
            return None
        return self.derive_head(db, rule, matcher.current())

    def apply_selector(
        self, db: NodeDatabase, rule: TypedRule
    ) -> Optional[DerivationOutcome]:
        """
        Order all body matches by the selector variable and commit to the
        first one
        """
        selector = rule.rule.selector
        assert selector is not None
        matcher = Matcher(db, self.env, Bindings(), Consumption())
        matches = list(matcher.solutions(rule.plan))
        if not matches:
            return None

        if selector.operation is SelectorOperation.RANDOM:
            generator = random.Random(
                f"{self.seed}:{db.node.id}:{rule.priority}"
            )
            generator.shuffle(matches)
        else:
            matches.sort(
                key=lambda match: value_key(match.bindings[selector.variable]),
                reverse=selector.operation is SelectorOperation.MAX,
            )
        logger.debug(
            "Selector of rule %d at %s ordered %d matches",
            rule.priority,
            db.node,
            len(matches),
        )
        return self.derive_head(db, rule, matches[0])

    def derive_head(
        self, db: NodeDatabase, rule: TypedRule, match: Match
    ) -> DerivationOutcome:
        consumption = Consumption()
        for predicate, slot, fact in match.consumed:
            consumption.consume(predicate, slot, fact)
        consumption.commit()

        derivation = Derivation(
            db=db,
            env=self.env,
            program=self.program,
            rule=rule,
            bindings=Bindings(match.bindings),
            consumption=consumption,
            fresh=self.fresh,
            self_check=self.self_check,
        )
        derivation.derive(rule.rule.head)
        return derivation.outcome()
