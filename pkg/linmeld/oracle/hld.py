# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Exhaustive enumeration of rule outcomes on small databases.

Every way a rule can be applied is enumerated: every choice of stored facts
for the body templates, and for comprehensions and aggregates every number
of unfoldings on the facts still available. The result is the set of all
possible outcomes in canonical form. It serves as the reference the
deterministic engine is tested against and is deliberately simple rather
than fast.
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Optional

from linmeld.checker.checker import TypedProgram, TypedRule
from linmeld.engine.derivation import DerivationOutcome
from linmeld.engine.evaluate import Environment, evaluate, unify
from linmeld.engine.plan import flatten_body
from linmeld.errors import BoundExceeded, ConstraintError
from linmeld.language.syntax import (
    FLOAT,
    Aggregate,
    AggregateOperation,
    Binary,
    BodyTerm,
    Comprehension,
    Constraint,
    Exists,
    FactTemplate,
    One,
    Var,
    expr_variables,
)
from linmeld.models.database import NodeDatabase
from linmeld.models.fact import Fact
from linmeld.models.values import NodeId, Value

logger = logging.getLogger(__name__)

CanonicalOutcome = tuple
HldOutcomeSet = frozenset


@dataclass(frozen=True)
class _State:
    """One partial derivation of a head"""

    used: frozenset[int]
    consumed: tuple[Fact, ...]
    linear: tuple[Fact, ...]
    persistent: frozenset[Fact]
    next_node: int

    def canonical(self) -> CanonicalOutcome:
        return (
            tuple(sorted(fact.key for fact in self.consumed)),
            tuple(sorted(fact.key for fact in self.linear)),
            tuple(sorted(fact.key for fact in self.persistent)),
        )

    def key(self) -> tuple:
        return (self.used, self.canonical(), self.next_node)


@dataclass(frozen=True)
class _BodyMatch:
    bindings: Mapping[str, Value]
    slots: frozenset[int]
    consumed: tuple[Fact, ...]


def _assignment(constraint: Constraint) -> Optional[str]:
    expr = constraint.expr
    if (
        isinstance(expr, Binary)
        and expr.op == "="
        and isinstance(expr.left, Var)
    ):
        return expr.left.name
    return None


def _settle(
    constraints: list[Constraint],
    bindings: dict[str, Value],
    env: Environment,
    final: bool,
) -> Optional[list[Constraint]]:
    """
    Evaluate every constraint that can be evaluated under the bindings

    Returns:
        The constraints still pending or None if one of them is false
    """
    pending = list(constraints)
    progress = True
    while progress:
        progress = False
        for constraint in list(pending):
            variable = _assignment(constraint)
            expr = constraint.expr
            if variable is not None and variable not in bindings:
                assert isinstance(expr, Binary)
                if expr_variables(expr.right) <= bindings.keys():
                    bindings[variable] = evaluate(expr.right, bindings, env)
                    pending.remove(constraint)
                    progress = True
                continue
            if expr_variables(expr) <= bindings.keys():
                if evaluate(expr, bindings, env) is not True:
                    return None
                pending.remove(constraint)
                progress = True
    if final and pending:
        return None
    return pending


class HighLevelOracle:
    """
    Enumerates all outcomes of applying a rule at a node

    Arguments:
        program: The checked program
        world: Value of ``@world``
        bound: Largest number of linear facts a database may hold
    """

    def __init__(
        self, program: TypedProgram, *, world: int = 0, bound: int = 8
    ) -> None:
        self.program = program
        self.env = program.environment(world)
        self.bound = bound

    def _facts(
        self, db: NodeDatabase, template: FactTemplate
    ) -> Iterator[tuple[Optional[int], Fact]]:
        if template.persistent:
            for fact in db.persistent_facts(template.predicate):
                yield None, fact
        else:
            yield from db.linear_slots(template.predicate)

    def matches(
        self,
        db: NodeDatabase,
        body: Iterable[BodyTerm],
        bindings: Mapping[str, Value],
        used: frozenset[int] = frozenset(),
    ) -> list[_BodyMatch]:
        """
        Every match of a body against the facts not in ``used``
        """
        terms = flatten_body(body)
        templates = [term for term in terms if isinstance(term, FactTemplate)]
        constraints = [term for term in terms if isinstance(term, Constraint)]
        results: list[_BodyMatch] = []

        def search(
            index: int,
            current: dict[str, Value],
            slots: frozenset[int],
            consumed: tuple[Fact, ...],
            pending: list[Constraint],
        ) -> None:
            settled = _settle(
                pending, current, self.env, final=index == len(templates)
            )
            if settled is None:
                return
            if index == len(templates):
                results.append(_BodyMatch(current, slots, consumed))
                return

            template = templates[index]
            for slot, fact in self._facts(db, template):
                if slot is not None and (slot in used or slot in slots):
                    continue
                extension = unify(template.args, fact.args, current, self.env)
                if extension is None:
                    continue
                if slot is None:
                    search(
                        index + 1,
                        {**current, **extension},
                        slots,
                        consumed,
                        settled,
                    )
                else:
                    search(
                        index + 1,
                        {**current, **extension},
                        slots | {slot},
                        consumed + (fact,),
                        settled,
                    )

        search(0, dict(bindings), frozenset(), (), constraints)
        return results

    def _instantiate(
        self, template: FactTemplate, bindings: Mapping[str, Value]
    ) -> Fact:
        values = tuple(
            evaluate(arg, bindings, self.env) for arg in template.args
        )
        return Fact(
            template.predicate,
            values,
            linear=self.program.is_linear(template.predicate),
        )

    def _emit(
        self,
        state: _State,
        terms: Iterable[object],
        bindings: Mapping[str, Value],
    ) -> _State:
        linear = list(state.linear)
        persistent = set(state.persistent)
        for term in terms:
            if isinstance(term, FactTemplate):
                fact = self._instantiate(term, bindings)
                if fact.linear:
                    linear.append(fact)
                else:
                    persistent.add(fact)
            elif not isinstance(term, One):
                raise TypeError(f"unexpected head term {term!r}")
        return replace(
            state, linear=tuple(linear), persistent=frozenset(persistent)
        )

    def _unfold(
        self,
        db: NodeDatabase,
        state: _State,
        body: Iterable[BodyTerm],
        bindings: Mapping[str, Value],
    ) -> Iterator[tuple[_State, tuple[_BodyMatch, ...]]]:
        """
        Every non empty sequence of applications of a sub-rule body

        Yields the state after each sequence together with the matches
        applied. The length of a sequence is bounded by the number of
        matches available on entry.
        """
        body = tuple(body)
        depth = len(self.matches(db, body, bindings, state.used))
        frontier: list[tuple[_State, tuple[_BodyMatch, ...]]] = [(state, ())]
        for _ in range(depth):
            following: list[tuple[_State, tuple[_BodyMatch, ...]]] = []
            for current, history in frontier:
                for match in self.matches(db, body, bindings, current.used):
                    step = replace(
                        current,
                        used=current.used | match.slots,
                        consumed=current.consumed + match.consumed,
                    )
                    sequence = history + (match,)
                    following.append((step, sequence))
                    yield step, sequence
            frontier = following

    def _comprehension(
        self,
        db: NodeDatabase,
        state: _State,
        term: Comprehension,
        bindings: Mapping[str, Value],
    ) -> set[_State]:
        results = {state.key(): state}
        for step, history in self._unfold(db, state, term.body, bindings):
            derived = step
            for match in history:
                derived = self._emit(derived, term.head, match.bindings)
            results.setdefault(derived.key(), derived)
        return set(results.values())

    def _fold(
        self,
        index: int,
        rule: TypedRule,
        term: Aggregate,
        history: tuple[_BodyMatch, ...],
    ) -> Optional[dict[str, Value]]:
        values: dict[str, Value] = {}
        for accumulator in term.accumulators:
            name = accumulator.variable
            operation = accumulator.operation
            if operation is AggregateOperation.COUNT:
                values[name] = len(history)
                continue
            folded = [match.bindings[name] for match in history]
            if operation is AggregateOperation.SUM:
                total: Value = (
                    0.0
                    if rule.accumulator_types.get((index, name)) == FLOAT
                    else 0
                )
                for value in folded:
                    total = total + value  # type: ignore[operator]
                values[name] = total
            elif not folded:
                return None
            elif operation is AggregateOperation.MIN:
                values[name] = min(folded)  # type: ignore[type-var]
            else:
                values[name] = max(folded)  # type: ignore[type-var]
        return values

    def _aggregate(
        self,
        db: NodeDatabase,
        state: _State,
        index: int,
        rule: TypedRule,
        term: Aggregate,
        bindings: Mapping[str, Value],
    ) -> set[_State]:
        results: dict[tuple, _State] = {}
        sequences: list[tuple[_State, tuple[_BodyMatch, ...]]] = [(state, ())]
        sequences.extend(self._unfold(db, state, term.body, bindings))
        for step, history in sequences:
            values = self._fold(index, rule, term, history)
            derived = step
            for match in history:
                derived = self._emit(derived, term.head1, match.bindings)
            if values is not None:
                derived = self._emit(
                    derived, term.head2, {**bindings, **values}
                )
            results.setdefault(derived.key(), derived)
        return set(results.values())

    def _exists(
        self, state: _State, term: Exists, bindings: Mapping[str, Value]
    ) -> _State:
        scope = dict(bindings)
        next_node = state.next_node
        for name in term.variables:
            scope[name] = NodeId(next_node)
            next_node += 1
        return self._emit(
            replace(state, next_node=next_node), term.head, scope
        )

    def derive(
        self,
        db: NodeDatabase,
        rule: TypedRule,
        match: _BodyMatch,
        fresh_base: int,
    ) -> set[_State]:
        states = {
            _State(
                used=match.slots,
                consumed=match.consumed,
                linear=(),
                persistent=frozenset(),
                next_node=fresh_base,
            )
        }
        for index, term in enumerate(rule.rule.head):
            following: set[_State] = set()
            for state in states:
                if isinstance(term, (FactTemplate, One)):
                    following.add(self._emit(state, (term,), match.bindings))
                elif isinstance(term, Exists):
                    following.add(self._exists(state, term, match.bindings))
                elif isinstance(term, Comprehension):
                    following |= self._comprehension(
                        db, state, term, match.bindings
                    )
                elif isinstance(term, Aggregate):
                    following |= self._aggregate(
                        db, state, index, rule, term, match.bindings
                    )
            states = following
        return states

    def apply(
        self, db: NodeDatabase, rule: TypedRule, fresh_base: int = 0
    ) -> HldOutcomeSet:
        """
        All canonical outcomes of applying ``rule`` at ``db``

        Raises:
            BoundExceeded: The database holds more linear facts than the
                bound allows
        """
        if db.linear_count() > self.bound:
            raise BoundExceeded(
                f"{db.linear_count()} linear facts exceed the bound "
                f"of {self.bound}"
            )
        outcomes = set()
        try:
            for match in self.matches(db, rule.rule.body, {}):
                for state in self.derive(db, rule, match, fresh_base):
                    outcomes.add(state.canonical())
        except ConstraintError:
            logger.debug(
                "Evaluation failed while enumerating rule %d", rule.priority
            )
            raise
        return frozenset(outcomes)


def hld_apply(
    db: NodeDatabase,
    program: TypedProgram,
    rule: TypedRule,
    bound: int = 8,
    *,
    world: int = 0,
    fresh_base: int = 0,
) -> HldOutcomeSet:
    return HighLevelOracle(program, world=world, bound=bound).apply(
        db, rule, fresh_base
    )


def check_soundness(
    lld: Optional[DerivationOutcome], hld: HldOutcomeSet
) -> bool:
    """
    True iff the deterministic outcome is one of the enumerated outcomes

    A quiescent engine result is sound iff nothing can be derived at all.
    """
    if lld is None:
        return not hld
    return lld.canonical() in hld

