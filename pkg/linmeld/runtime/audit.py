# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
from collections import Counter

from linmeld.engine.derivation import DerivationOutcome
from linmeld.errors import InvariantViolation
from linmeld.models.database import NodeDatabase

logger = logging.getLogger(__name__)


class Auditor:
    """
    Checks the conservation of linear facts for every rule application

    ``before`` records the state of a node right before its outcome is
    routed, ``after`` compares the new state against the expected one:
    linear facts are the old ones minus the consumed plus the derived local
    ones, persistent facts only ever grow.
    """

    def __init__(self) -> None:
        self.steps = 0
        self._linear: Counter = Counter()
        self._persistent: frozenset = frozenset()

    def before(self, db: NodeDatabase) -> None:
        self._linear = db.linear_multiset()
        self._persistent = db.persistent_set()

    def after(self, db: NodeDatabase, outcome: DerivationOutcome) -> None:
        consumed = Counter(outcome.consumed_facts)
        missing = consumed - self._linear
        if missing:
            raise InvariantViolation(
                f"node {db.node} rule {outcome.rule} consumed facts it did "
                f"not hold: {', '.join(str(fact) for fact in missing)}"
            )

        expected = self._linear.copy()
        expected.subtract(consumed)
        expected.update(
            fact for fact in outcome.derived_linear if fact.home == db.node
        )
        expected = +expected
        actual = db.linear_multiset()
        if actual != expected:
            raise InvariantViolation(
                f"node {db.node} rule {outcome.rule}: linear facts "
                f"{sorted(actual.elements())} differ from the expected "
                f"{sorted(expected.elements())}"
            )

        persistent = db.persistent_set()
        if not self._persistent <= persistent:
            lost = self._persistent - persistent
            raise InvariantViolation(
                f"node {db.node} lost persistent facts "
                f"{', '.join(str(fact) for fact in sorted(lost))}"
            )
        local = {
            fact for fact in outcome.derived_persistent if fact.home == db.node
        }
        if persistent != self._persistent | local:
            raise InvariantViolation(
                f"node {db.node} rule {outcome.rule}: persistent facts "
                "changed beyond the derived ones"
            )
        self.steps += 1
