# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Independent reference computations for the corpus programs.

An oracle reads the input of a run from the final graph, usually the
persistent facts, recomputes the result without the rule engine and
compares it with the facts the program derived.
"""

import heapq
import logging
from abc import ABC, abstractmethod
from collections import defaultdict
from typing import Iterable, Optional

from linmeld.errors import LinearMeldError
from linmeld.models.values import NodeId
from linmeld.runtime.graph import Graph

logger = logging.getLogger(__name__)

PAGERANK_TOLERANCE = 1e-9


class Oracle(ABC):
    name: str

    @abstractmethod
    def check(self, graph: Graph) -> Optional[str]:
        """
        Compare the final graph of a run against the reference

        Returns:
            None if the graph is correct, otherwise a description of the
            first difference
        """


ORACLES: dict[str, Oracle] = {}


def register(oracle: Oracle) -> Oracle:
    ORACLES[oracle.name] = oracle
    return oracle


def get_oracle(name: str) -> Oracle:
    try:
        return ORACLES[name]
    except KeyError:
        raise LinearMeldError(f"unknown oracle {name!r}") from None


def _constant(graph: Graph, name: str) -> object:
    try:
        return graph.program.constants[name]
    except KeyError:
        raise LinearMeldError(
            f"the {name} constant is required, pass --const {name}=..."
        ) from None


def dijkstra(
    edges: Iterable[tuple[NodeId, NodeId, int]],
    start: NodeId,
    final: Optional[NodeId] = None,
) -> dict[NodeId, int]:
    """
    Shortest distances from ``start``

    Edges leaving ``final`` are never relaxed, the node is a sink.
    """
    adjacency: dict[NodeId, list[tuple[NodeId, int]]] = defaultdict(list)
    for source, target, weight in edges:
        adjacency[source].append((target, weight))

    distances: dict[NodeId, int] = {}
    queue = [(0, start)]
    while queue:
        distance, node = heapq.heappop(queue)
        if node in distances:
            continue
        distances[node] = distance
        if node == final:
            continue
        for target, weight in adjacency[node]:
            if target not in distances:
                heapq.heappush(queue, (distance + weight, target))
    return distances


class ShortestDistance(Oracle):
    name = "dijkstra"

    def check(self, graph: Graph) -> Optional[str]:
        start = _constant(graph, "startnode")
        final = _constant(graph, "finalnode")
        edges = [
            (fact.args[0], fact.args[1], fact.args[2])
            for fact in graph.facts()
            if fact.predicate == "edge"
        ]
        expected = dijkstra(edges, start, final)  # type: ignore[arg-type]

        for db in graph:
            paths = db.linear_facts("path")
            if db.node not in expected:
                if paths:
                    return f"{db.node} is unreachable but has {paths[0]}"
                continue
            if len(paths) != 1:
                return (
                    f"{db.node} has {len(paths)} path facts instead of one"
                )
            distance = paths[0].args[1]
            if distance != expected[db.node]:
                return (
                    f"{db.node} has distance {distance}, the shortest "
                    f"distance is {expected[db.node]}"
                )
        return None


def pagerank(
    edges: Iterable[tuple[NodeId, NodeId]], iterations: int
) -> dict[NodeId, float]:
    """
    Rank of every node after the given number of iterations

    The first rank is ``1 / N``, each iteration computes
    ``0.85 + 0.15 * sum(rank(B) / links(B))`` over the incoming links.
    Incoming contributions are added in the order the program adds them,
    which is exact for nodes with at most two incoming links.
    """
    edges = list(edges)
    nodes = sorted({node for edge in edges for node in edge})
    links: dict[NodeId, int] = defaultdict(int)
    incoming: dict[NodeId, list[NodeId]] = defaultdict(list)
    for source, target in edges:
        links[source] += 1
        incoming[target].append(source)

    ranks = {node: 1.0 / float(len(nodes)) for node in nodes}
    for _ in range(iterations):
        following = {}
        for node in nodes:
            accumulated = 0.0
            for source in incoming[node]:
                accumulated = accumulated + ranks[source] / float(
                    links[source]
                )
            following[node] = 0.85 + 0.15 * accumulated
        ranks = following
    return ranks


class PageRank(Oracle):
    name = "pagerank"

    def check(self, graph: Graph) -> Optional[str]:
        iterations = _constant(graph, "iterations")
        edges = [
            (fact.args[0], fact.args[1])
            for fact in graph.facts()
            if fact.predicate == "output"
        ]
        expected = pagerank(edges, iterations)  # type: ignore[arg-type]

        for node, rank in expected.items():
            db = graph.get(node)
            facts = db.linear_facts("pagerank") if db else []
            if len(facts) != 1:
                return f"{node} has {len(facts)} pagerank facts"
            _, value, iteration = facts[0].args
            if iteration != iterations:
                return f"{node} stopped at iteration {iteration}"
            if abs(value - rank) > PAGERANK_TOLERANCE:  # type: ignore
                return f"{node} has rank {value!r}, expected {rank!r}"
        return None


def queens(size: int) -> list[tuple[int, ...]]:
    """
    All solutions of the N-Queens problem by backtracking

    A solution lists the column of the queen in every row.
    """
    solutions = []

    def place(columns: tuple[int, ...]) -> None:
        row = len(columns)
        if row == size:
            solutions.append(columns)
            return
        for column in range(size):
            if all(
                column != other and abs(column - other) != row - index
                for index, other in enumerate(columns)
            ):
                place(columns + (column,))

    place(())
    return solutions


def no_attack(coordinates: Iterable[tuple[int, int]]) -> bool:
    placed = list(coordinates)
    for index, (x1, y1) in enumerate(placed):
        for x2, y2 in placed[index + 1 :]:
            if x1 == x2 or y1 == y2 or abs(x1 - x2) == abs(y1 - y2):
                return False
    return True


class NQueens(Oracle):
    name = "nqueens"

    def check(self, graph: Graph) -> Optional[str]:
        size = _constant(graph, "size")
        expected = len(queens(size))  # type: ignore[arg-type]
        states = [
            fact
            for fact in graph.facts()
            if fact.predicate == "final-state"
        ]
        if len(states) != expected:
            return (
                f"{len(states)} final states, the board has {expected} "
                "solutions"
            )

        solutions = set()
        for fact in states:
            coords = fact.args[2]
            pairs = list(zip(coords[0::2], coords[1::2]))  # type: ignore
            if len(pairs) != size or not no_attack(pairs):
                return f"{fact} is not a solution"
            solutions.add(tuple(sorted(pairs)))
        if len(solutions) != expected:
            return "some solutions were found more than once"
        return None


register(ShortestDistance())
register(PageRank())
register(NQueens())
