# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
from dataclasses import dataclass
from itertools import count
from typing import Iterable, Iterator, Optional, Sequence

from linmeld.checker.checker import TypedProgram, TypedRule
from linmeld.engine.bindings import Bindings, Consumption
from linmeld.engine.evaluate import Environment, evaluate
from linmeld.engine.frames import ContinuationStack
from linmeld.engine.matcher import Matcher
from linmeld.engine.plan import MatchStep, Step
from linmeld.errors import EvaluationTypeError, InvariantViolation
from linmeld.language.syntax import (
    FLOAT,
    Aggregate,
    AggregateOperation,
    Comprehension,
    Exists,
    FactTemplate,
    HeadTerm,
    One,
)
from linmeld.models.database import NodeDatabase
from linmeld.models.fact import Fact
from linmeld.models.values import NodeId, Value

logger = logging.getLogger(__name__)


class FreshNodes:
    """
    Allocates node ids for exists expressions

    Ids are handed out from a monotone counter starting above every id
    known when the allocator was created.
    """

    def __init__(self, start: int = 0) -> None:
        self._counter = count(start)

    def __call__(self) -> NodeId:
        return NodeId(next(self._counter))

    @classmethod
    def above(cls, nodes: Iterable[NodeId]) -> "FreshNodes":
        return cls(max((node.id for node in nodes), default=-1) + 1)


@dataclass(frozen=True, kw_only=True)
class DerivationOutcome:
    """
    Result of one rule application at a node

    Arguments:
        node: The node the rule ran at
        rule: Priority of the rule that fired
        consumed: The consumed linear facts with their slots
        derived_linear: Derived linear facts in derivation order. The
            first argument of each fact is its target node.
        derived_persistent: Derived persistent facts
        new_nodes: Nodes created by exists expressions
    """

    node: NodeId
    rule: int
    consumed: tuple[tuple[str, int, Fact], ...]
    derived_linear: tuple[Fact, ...]
    derived_persistent: tuple[Fact, ...]
    new_nodes: tuple[NodeId, ...] = ()

    @property
    def consumed_facts(self) -> tuple[Fact, ...]:
        return tuple(fact for _, _, fact in self.consumed)

    def canonical(self) -> tuple:
        """
        Order independent form, equal for outcomes that differ only in
        which copy of a duplicated fact was consumed or in fact order
        """
        return (
            tuple(sorted(fact.key for fact in self.consumed_facts)),
            tuple(sorted(fact.key for fact in self.derived_linear)),
            tuple(sorted({fact.key for fact in self.derived_persistent})),
        )

    def describe(self) -> str:
        consumed = ", ".join(str(fact) for fact in self.consumed_facts)
        derived = ", ".join(
            str(fact)
            for fact in self.derived_linear + self.derived_persistent
        )
        return f"consumed {{{consumed}}} derived {{{derived}}}"


_FOLD_START = {
    AggregateOperation.SUM: 0,
    AggregateOperation.COUNT: 0,
}


class Derivation:
    """
    Derives the head of a matched rule at one node

    Comprehension and aggregate bodies are matched against the node's
    database minus everything consumed so far.
    """

    def __init__(
        self,
        *,
        db: NodeDatabase,
        env: Environment,
        program: TypedProgram,
        rule: TypedRule,
        bindings: Bindings,
        consumption: Consumption,
        fresh: FreshNodes,
        self_check: bool = False,
    ) -> None:
        self.db = db
        self.env = env
        self.program = program
        self.rule = rule
        self.bindings = bindings
        self.consumption = consumption
        self.fresh = fresh
        self.self_check = self_check
        self.derived_linear: list[Fact] = []
        self.derived_persistent: dict[Fact, None] = {}
        self.new_nodes: list[NodeId] = []

    def instantiate(self, template: FactTemplate) -> Fact:
        values = tuple(
            evaluate(arg, self.bindings, self.env) for arg in template.args
        )
        if not isinstance(values[0], NodeId):
            raise EvaluationTypeError(
                f"{template.predicate} must be derived at a node, "
                f"got {values[0]!r}"
            )
        return Fact(
            template.predicate,
            values,
            linear=self.program.is_linear(template.predicate),
        )

    def _emit(self, terms: Iterable[object]) -> None:
        for term in terms:
            if isinstance(term, FactTemplate):
                fact = self.instantiate(term)
                if fact.linear:
                    self.derived_linear.append(fact)
                else:
                    self.derived_persistent.setdefault(fact, None)
            elif not isinstance(term, One):
                raise TypeError(f"unexpected head term {term!r}")

    def derive(self, head: Sequence[HeadTerm]) -> None:
        for index, term in enumerate(head):
            if isinstance(term, (FactTemplate, One)):
                self._emit((term,))
            elif isinstance(term, Exists):
                self.instantiate_exists(term)
            elif isinstance(term, Comprehension):
                self.match_comprehension(
                    term, self.rule.sub_plans[index]
                )
            elif isinstance(term, Aggregate):
                self.apply_aggregate(index, term, self.rule.sub_plans[index])
            else:
                raise TypeError(f"unknown head term {term!r}")

    def instantiate_exists(self, term: Exists) -> None:
        mark = self.bindings.mark()
        for name in term.variables:
            node = self.fresh()
            self.new_nodes.append(node)
            self.bindings.bind(name, node)
        self._emit(term.head)
        self.bindings.undo(mark)

    def _applications(self, plan: Sequence[Step]) -> Iterator[None]:
        """
        Apply a sub-rule body for every match against the remaining facts

        Yields once per application, while the bindings of the match are in
        place. The facts consumed by an application are committed before
        the next match is searched.
        """
        mark = self.bindings.mark()
        stack = ContinuationStack(split=True)
        matcher = Matcher(
            self.db, self.env, self.bindings, self.consumption, stack
        )
        found = matcher.run(plan)
        while found:
            consumed = self.consumption.commit()
            yield
            stack.fix(slot for _, slot, _ in consumed)
            index = matcher.backtrack()
            if index is None:
                break
            found = matcher.run(plan, index)
        self.bindings.undo(mark)

        if self.self_check:
            self._check_maximal(plan)

    def _check_maximal(self, plan: Sequence[Step]) -> None:
        """
        A completed comprehension leaves no match that consumes a linear
        fact which is still available

        Bodies made only of persistent facts consume nothing and keep
        matching. They are complete after one pass over their candidates.
        """
        if not any(
            isinstance(step, MatchStep)
            and self.program.is_linear(step.template.predicate)
            for step in plan
        ):
            return

        mark = self.bindings.mark()
        remaining = Consumption()
        remaining.slots = set(self.consumption.slots)
        matcher = Matcher(self.db, self.env, self.bindings, remaining)
        leftover = matcher.run(plan)
        self.bindings.undo(mark)
        if leftover:
            raise InvariantViolation(
                f"rule {self.rule.priority} at {self.db.node}: a "
                "comprehension body still matches after it completed"
            )

    def match_comprehension(
        self, term: Comprehension, plan: Sequence[Step]
    ) -> int:
        applications = 0
        for _ in self._applications(plan):
            applications += 1
            self._emit(term.head)
        logger.debug(
            "Comprehension of rule %d at %s applied %d times",
            self.rule.priority,
            self.db.node,
            applications,
        )
        return applications

    def _start(
        self, index: int, operation: AggregateOperation, name: str
    ) -> Optional[Value]:
        value_type = self.rule.accumulator_types.get((index, name))
        start = _FOLD_START.get(operation)
        if start is not None and value_type == FLOAT:
            return 0.0
        return start

    def apply_aggregate(
        self, index: int, term: Aggregate, plan: Sequence[Step]
    ) -> int:
        accumulators: dict[str, Optional[Value]] = {
            accumulator.variable: self._start(
                index, accumulator.operation, accumulator.variable
            )
            for accumulator in term.accumulators
        }
        applications = 0
        for _ in self._applications(plan):
            applications += 1
            for accumulator in term.accumulators:
                name = accumulator.variable
                current = accumulators[name]
                operation = accumulator.operation
                if operation is AggregateOperation.COUNT:
                    accumulators[name] = current + 1  # type: ignore[operator]
                    continue
                value = self.bindings[name]
                if operation is AggregateOperation.SUM:
                    accumulators[name] = current + value  # type: ignore
                elif current is None:
                    accumulators[name] = value
                elif operation is AggregateOperation.MIN:
                    accumulators[name] = min(current, value)  # type: ignore
                else:
                    accumulators[name] = max(current, value)  # type: ignore
            self._emit(term.head1)

        if any(value is None for value in accumulators.values()):
            # min and max have no neutral element
            return applications

        mark = self.bindings.mark()
        for name, value in accumulators.items():
            self.bindings.bind(name, value)  # type: ignore[arg-type]
        self._emit(term.head2)
        self.bindings.undo(mark)
        return applications

    def outcome(self) -> DerivationOutcome:
        return DerivationOutcome(
            node=self.db.node,
            rule=self.rule.priority,
            consumed=tuple(self.consumption.committed),
            derived_linear=tuple(self.derived_linear),
            derived_persistent=tuple(self.derived_persistent),
            new_nodes=tuple(self.new_nodes),
        )
