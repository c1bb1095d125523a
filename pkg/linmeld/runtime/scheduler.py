# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Run a loaded graph to quiescence.

Workers are asyncio tasks. A worker takes a dirty node from its queue,
delivers the node's inbox and applies rules for a short burst. The length
of a burst is drawn from the run's seeded random generator and the worker
yields to the others afterwards, so the seed decides how the workers
interleave. A visit never awaits, which makes each rule application atomic
with respect to all other workers.
"""

import asyncio
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from linmeld.engine.derivation import DerivationOutcome, FreshNodes
from linmeld.engine.engine import Engine
from linmeld.errors import LinearMeldError, NonTermination
from linmeld.models.database import NodeDatabase
from linmeld.models.values import NodeId
from linmeld.runtime.audit import Auditor
from linmeld.runtime.graph import Graph

logger = logging.getLogger(__name__)

MAX_BURST = 3

TraceCallback = Callable[[str], None]


@dataclass(frozen=True, kw_only=True)
class RunOptions:
    workers: int = 1
    seed: int = 0
    max_steps: Optional[int] = None
    trace: bool = False
    audit: bool = False
    self_check: bool = False


@dataclass(kw_only=True)
class WorkerState:
    index: int
    owned: set[NodeId] = field(default_factory=set)
    queue: deque[NodeId] = field(default_factory=deque)
    fired: int = 0
    steals: int = 0


@dataclass(frozen=True, kw_only=True)
class RunStatistics:
    steps: int
    fired: tuple[int, ...]
    steals: int
    nodes: int


def partition(nodes: Iterable[NodeId], workers: int) -> list[set[NodeId]]:
    """
    Split the nodes into contiguous ranges of ids, one per worker
    """
    ordered = sorted(nodes)
    size = -(-len(ordered) // workers) if ordered else 0
    return [
        set(ordered[index * size : (index + 1) * size])
        for index in range(workers)
    ]


def steal(
    thief: WorkerState, victims: Iterable[WorkerState]
) -> Optional[NodeId]:
    """
    Move one queued node from the worker with the longest queue to the thief

    The node is taken from the tail of the victim's queue and ownership of
    the node passes to the thief.

    Returns:
        The stolen node or None if no other worker has queued nodes
    """
    candidates = [
        victim for victim in victims if victim is not thief and victim.queue
    ]
    if not candidates:
        return None
    victim = max(candidates, key=lambda worker: len(worker.queue))
    node = victim.queue.pop()
    victim.owned.discard(node)
    thief.owned.add(node)
    thief.steals += 1
    logger.debug(
        "Worker %d stole %s from worker %d", thief.index, node, victim.index
    )
    return node


class Scheduler:
    """
    Drives the rule engine over all nodes of a graph

    Arguments:
        graph: The loaded graph
        options: Worker count, seed and checks of the run
        trace: Called with one line per rule application when tracing is
            enabled
    """

    def __init__(
        self,
        graph: Graph,
        options: RunOptions = RunOptions(),
        trace: Optional[TraceCallback] = None,
    ) -> None:
        if options.workers < 1:
            raise LinearMeldError("at least one worker is required")
        self.graph = graph
        self.options = options
        self._trace = trace
        self._random = random.Random(options.seed)
        self.engine = Engine(
            graph.program,
            world=graph.world,
            fresh=FreshNodes.above(graph.nodes.keys()),
            seed=options.seed,
            self_check=options.self_check,
        )
        self.auditor = Auditor() if options.audit else None
        self.workers = [
            WorkerState(index=index, owned=owned)
            for index, owned in enumerate(
                partition(graph.nodes.keys(), options.workers)
            )
        ]
        self._owner = {
            node: worker.index
            for worker in self.workers
            for node in worker.owned
        }
        self._queued: set[NodeId] = set()
        self.steps = 0

    def owner(self, node: NodeId) -> int:
        return self._owner[node]

    def enqueue(self, node: NodeId) -> None:
        if node in self._queued:
            return
        self.workers[self._owner[node]].queue.append(node)
        self._queued.add(node)

    def _next(self, worker: WorkerState) -> Optional[NodeId]:
        if worker.queue:
            return worker.queue.popleft()
        node = steal(worker, self.workers)
        if node is not None:
            self._owner[node] = worker.index
        return node

    def quiescent(self) -> bool:
        return not self._queued and self.graph.in_flight() == 0

    def _apply(
        self, worker: WorkerState, db: NodeDatabase, outcome: DerivationOutcome
    ) -> None:
        max_steps = self.options.max_steps
        if max_steps is not None and self.steps >= max_steps:
            raise NonTermination(self.steps)

        if self.auditor:
            self.auditor.before(db)
        touched = self.graph.route(outcome)
        if self.auditor:
            self.auditor.after(db, outcome)

        self.steps += 1
        worker.fired += 1
        if self._trace and self.options.trace:
            self._trace(
                f"node {outcome.node} rule {outcome.rule}: "
                f"{outcome.describe()}"
            )

        for node in touched:
            if node not in self._owner:
                # nodes created by this application belong to the worker
                self._owner[node] = worker.index
                worker.owned.add(node)
            if node != db.node:
                self.enqueue(node)

    def visit(self, worker: WorkerState, node: NodeId) -> None:
        """
        Apply rules at a node until it is quiescent or the burst ends

        The inbox is delivered before every rule application. A node that
        is still active at the end of its burst is queued again.
        """
        self._queued.discard(node)
        db = self.graph[node]
        burst = self._random.randint(1, MAX_BURST)
        for _ in range(burst):
            self.graph.deliver(node)
            outcome = self.engine.run_node(db)
            if outcome is None:
                db.dirty = False
                return
            self._apply(worker, db, outcome)
        db.dirty = True
        self.enqueue(node)

    async def _work(self, worker: WorkerState) -> None:
        while True:
            node = self._next(worker)
            if node is None:
                if self.quiescent():
                    return
                await asyncio.sleep(0)
                continue
            self.visit(worker, node)
            await asyncio.sleep(0)

    async def run(self) -> RunStatistics:
        for db in self.graph:
            if db.dirty:
                self.enqueue(db.node)

        tasks = [
            asyncio.create_task(self._work(worker)) for worker in self.workers
        ]
        try:
            await asyncio.gather(*tasks)
        except BaseException:
            for task in tasks:
                task.cancel()
            raise

        statistics = RunStatistics(
            steps=self.steps,
            fired=tuple(worker.fired for worker in self.workers),
            steals=sum(worker.steals for worker in self.workers),
            nodes=len(self.graph),
        )
        logger.info(
            "Quiescence after %d rule applications on %d nodes, %d steals",
            statistics.steps,
            statistics.nodes,
            statistics.steals,
        )
        return statistics


def run_to_quiescence(
    graph: Graph,
    options: RunOptions = RunOptions(),
    trace: Optional[TraceCallback] = None,
) -> RunStatistics:
    """
    Run the graph until no node can apply a rule and no fact is in flight

    Raises:
        NonTermination: ``options.max_steps`` rule applications happened
            without reaching quiescence
    """
    return asyncio.run(Scheduler(graph, options, trace).run())
