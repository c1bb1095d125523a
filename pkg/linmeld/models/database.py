# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import count
from typing import Container, Iterable, Iterator, Mapping, Optional

from linmeld.engine.evaluate import Environment, unify
from linmeld.errors import NotPresent, PersistentRetract, WrongNode
from linmeld.language.syntax import FactTemplate
from linmeld.models.fact import Fact
from linmeld.models.values import NodeId, Value

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Candidate:
    """
    A stored fact unifiable with a template

    ``slot`` identifies one copy of a linear fact inside its bucket, it is
    None for persistent facts.
    """

    fact: Fact
    bindings: dict[str, Value]
    slot: Optional[int]


class NodeDatabase:
    """
    The facts of a single node

    Linear facts form a multiset kept in insertion order per predicate.
    Persistent facts form a set.
    """

    def __init__(self, node: NodeId) -> None:
        self.node = node
        self.dirty = False
        self._linear: dict[str, dict[int, Fact]] = {}
        self._persistent: dict[str, dict[tuple, Fact]] = {}
        self._slots = count()

    def __repr__(self) -> str:
        return (
            f"<NodeDatabase {self.node} linear={self.linear_count()} "
            f"persistent={self.persistent_count()}>"
        )

    def _check_home(self, fact: Fact) -> None:
        if fact.home != self.node:
            raise WrongNode(f"{fact} does not belong to node {self.node}")

    def assert_fact(self, fact: Fact) -> "NodeDatabase":
        """
        Add a fact

        A linear fact raises its multiplicity by one, a persistent fact is
        only stored once. The database is marked dirty.

        Raises:
            WrongNode: The fact's first argument is another node
        """
        self._check_home(fact)
        if fact.linear:
            bucket = self._linear.setdefault(fact.predicate, {})
            bucket[next(self._slots)] = fact
        else:
            self._persistent.setdefault(fact.predicate, {}).setdefault(
                fact.key, fact
            )
        self.dirty = True
        return self

    def retract_fact(self, fact: Fact) -> "NodeDatabase":
        """
        Remove one copy of a linear fact

        Raises:
            PersistentRetract: Persistent facts are never removed
            NotPresent: The fact is not stored at this node
        """
        if not fact.linear:
            raise PersistentRetract(f"{fact} is persistent")
        bucket = self._linear.get(fact.predicate, {})
        for slot, stored in bucket.items():
            if stored == fact:
                return self.retract_slot(fact.predicate, slot)
        raise NotPresent(f"{fact} is not stored at node {self.node}")

    def retract_slot(self, predicate: str, slot: int) -> "NodeDatabase":
        bucket = self._linear.get(predicate, {})
        if slot not in bucket:
            raise NotPresent(f"no {predicate} fact in slot {slot}")
        del bucket[slot]
        if not bucket:
            del self._linear[predicate]
        return self

    def linear_slots(self, predicate: str) -> Iterator[tuple[int, Fact]]:
        yield from self._linear.get(predicate, {}).items()

    def linear_facts(self, predicate: Optional[str] = None) -> list[Fact]:
        if predicate is not None:
            return list(self._linear.get(predicate, {}).values())
        return [
            fact for bucket in self._linear.values() for fact in bucket.values()
        ]

    def persistent_facts(self, predicate: Optional[str] = None) -> list[Fact]:
        if predicate is not None:
            return list(self._persistent.get(predicate, {}).values())
        return [
            fact
            for bucket in self._persistent.values()
            for fact in bucket.values()
        ]

    def has_linear(self, predicate: str) -> bool:
        return bool(self._linear.get(predicate))

    def multiplicity(self, fact: Fact) -> int:
        if not fact.linear:
            bucket = self._persistent.get(fact.predicate, {})
            return 1 if fact.key in bucket else 0
        return sum(
            1
            for stored in self._linear.get(fact.predicate, {}).values()
            if stored == fact
        )

    def linear_count(self) -> int:
        return sum(len(bucket) for bucket in self._linear.values())

    def persistent_count(self) -> int:
        return sum(len(bucket) for bucket in self._persistent.values())

    def is_empty(self) -> bool:
        return not self._linear and not self._persistent

    def candidates(
        self,
        template: FactTemplate,
        bound: Mapping[str, Value],
        env: Environment,
        exclude: Container[int] = (),
    ) -> list[Candidate]:
        """
        All stored facts unifiable with a template under the bound variables

        Arguments:
            template: The fact template, its ``!`` marker selects the store
            bound: Variables bound by earlier templates
            env: Constants and graph size for non pattern arguments
            exclude: Linear slots already consumed by the current match

        Returns:
            Candidates in insertion order of the facts
        """
        result = []
        if template.persistent:
            for fact in self._persistent.get(template.predicate, {}).values():
                bindings = unify(template.args, fact.args, bound, env)
                if bindings is not None:
                    result.append(Candidate(fact, bindings, None))
            return result

        for slot, fact in self._linear.get(template.predicate, {}).items():
            if slot in exclude:
                continue
            bindings = unify(template.args, fact.args, bound, env)
            if bindings is not None:
                result.append(Candidate(fact, bindings, slot))
        return result

    def linear_multiset(self) -> Counter:
        return Counter(self.linear_facts())

    def persistent_set(self) -> frozenset[Fact]:
        return frozenset(self.persistent_facts())

    def snapshot(self) -> tuple:
        """
        Exact state of the database including slot order, for purity checks
        """
        return (
            tuple(
                (predicate, tuple(bucket.items()))
                for predicate, bucket in self._linear.items()
            ),
            tuple(sorted(fact.key for fact in self.persistent_facts())),
        )

    def copy(self) -> "NodeDatabase":
        other = NodeDatabase(self.node)
        for fact in self.persistent_facts():
            other.assert_fact(fact)
        for fact in self.linear_facts():
            other.assert_fact(fact)
        other.dirty = self.dirty
        return other

    def facts(self) -> Iterable[Fact]:
        yield from self.persistent_facts()
        yield from self.linear_facts()

    def dump_lines(self) -> list[str]:
        """
        Sorted ``node <id>: fact xN`` lines of all facts
        """
        counts = Counter(self.facts())
        return [
            f"node {self.node}: {fact} x{counts[fact]}"
            for fact in sorted(counts)
        ]
