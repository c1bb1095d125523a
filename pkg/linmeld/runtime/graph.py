# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
from collections import deque
from typing import Iterable, Iterator, Optional

from sortedcontainers import SortedDict

from linmeld.checker.checker import TypedProgram
from linmeld.engine.derivation import DerivationOutcome
from linmeld.engine.evaluate import evaluate
from linmeld.models.database import NodeDatabase
from linmeld.models.fact import Fact
from linmeld.models.values import NodeId, nodes_in

logger = logging.getLogger(__name__)


class Graph:
    """
    The node databases of a run and the facts in flight between them

    Facts derived for another node are appended to the inbox of the target
    and only become visible once the inbox is delivered. Each inbox keeps
    the order in which facts were routed to it.
    """

    def __init__(self, program: TypedProgram) -> None:
        self.program = program
        self.nodes: SortedDict = SortedDict()
        self.inboxes: dict[NodeId, deque[Fact]] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node: NodeId) -> bool:
        return node in self.nodes

    def __getitem__(self, node: NodeId) -> NodeDatabase:
        return self.nodes[node]

    def __iter__(self) -> Iterator[NodeDatabase]:
        return iter(self.nodes.values())

    @property
    def world(self) -> int:
        return len(self.nodes)

    def add_node(self, node: NodeId) -> NodeDatabase:
        db = self.nodes.get(node)
        if db is None:
            db = NodeDatabase(node)
            db.dirty = True
            self.nodes[node] = db
            self.inboxes[node] = deque()
        return db

    def _universal(self, db: NodeDatabase) -> None:
        env = self.program.environment(self.world)
        for template in self.program.universal_axioms:
            home = template.home
            bindings = {home.name: db.node}  # type: ignore[attr-defined]
            values = tuple(
                evaluate(arg, bindings, env) for arg in template.args
            )
            db.assert_fact(
                Fact(
                    template.predicate,
                    values,
                    linear=self.program.is_linear(template.predicate),
                )
            )

    @classmethod
    def load(
        cls, program: TypedProgram, nodes: Iterable[NodeId] = ()
    ) -> "Graph":
        """
        Create the graph of a program and populate it with the axioms

        Every node mentioned anywhere in an axiom is created, including
        nodes that only appear as arguments. Universal axioms are asserted
        at every node. All nodes start dirty.
        """
        graph = cls(program)
        for node in nodes:
            graph.add_node(node)
        for fact in program.axioms:
            for arg in fact.args:
                for node in nodes_in(arg):
                    graph.add_node(node)
        for fact in program.axioms:
            graph[fact.home].assert_fact(fact)
        if program.universal_axioms:
            for db in graph:
                graph._universal(db)

        logger.info(
            "Loaded %d nodes with %d axioms", len(graph), len(program.axioms)
        )
        return graph

    def route(self, outcome: DerivationOutcome) -> list[NodeId]:
        """
        Apply the outcome of a rule application

        Consumed facts are removed and derived facts for the node itself
        are asserted immediately. Facts for other nodes are appended to
        their inboxes.

        Returns:
            The nodes that became dirty
        """
        db = self.nodes[outcome.node]
        for predicate, slot, _ in outcome.consumed:
            db.retract_slot(predicate, slot)

        for node in outcome.new_nodes:
            self.add_node(node)

        touched: dict[NodeId, None] = {}
        for fact in outcome.derived_linear + outcome.derived_persistent:
            target = fact.home
            if target == db.node:
                db.assert_fact(fact)
            else:
                if target not in self.nodes:
                    self.add_node(target)
                self.inboxes[target].append(fact)
                self.nodes[target].dirty = True
            touched[target] = None
        for node in outcome.new_nodes:
            touched[node] = None
        return list(touched)

    def deliver(self, node: NodeId) -> int:
        """
        Move every fact of the node's inbox into its database

        Returns:
            The number of facts delivered
        """
        inbox = self.inboxes[node]
        db = self.nodes[node]
        delivered = len(inbox)
        while inbox:
            db.assert_fact(inbox.popleft())
        return delivered

    def in_flight(self) -> int:
        return sum(len(inbox) for inbox in self.inboxes.values())

    def get(self, node: NodeId) -> Optional[NodeDatabase]:
        return self.nodes.get(node)

    def facts(self) -> Iterator[Fact]:
        for db in self:
            yield from db.facts()

    def dump_lines(self) -> list[str]:
        lines = []
        for db in self:
            lines.extend(db.dump_lines())
        return lines

    def dump(self) -> str:
        return "".join(f"{line}\n" for line in self.dump_lines())
