# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Axiom files for the corpus programs that need an input graph.

Each generator returns LM source text consisting of axioms only. The text
is meant to be appended to the program it belongs to.
"""

import random
from typing import Callable, Optional, Protocol

from linmeld.errors import LinearMeldError


class Generator(Protocol):
    def __call__(self, size: int, seed: int = 0) -> str:
        ...


GENERATORS: dict[str, Generator] = {}


def generator(name: str) -> Callable[[Generator], Generator]:
    def register(function: Generator) -> Generator:
        GENERATORS[name] = function
        return function

    return register


def generate(name: str, size: int, seed: int = 0) -> str:
    """
    Raises:
        LinearMeldError: No generator with this name exists
    """
    try:
        function = GENERATORS[name]
    except KeyError:
        raise LinearMeldError(
            f"unknown generator {name!r}, choose one of "
            f"{', '.join(sorted(GENERATORS))}"
        ) from None
    return function(size, seed)


def _lines(facts: list[str]) -> str:
    return "".join(f"{fact}.\n" for fact in facts)


def board_node(x: int, y: int, size: int) -> int:
    return x * size + y


@generator("nqueens")
def nqueens(size: int, seed: int = 0) -> str:
    """
    The board of the N-Queens program

    Cell ``(x, y)`` is node ``x * size + y``. Its left and right links point
    to the neighbours in the same row, the down links point two columns
    aside in the next row because the cells in between are attacked by a
    queen at ``(x, y)``. Links leaving the board point back to the cell
    itself.
    """
    if size < 1:
        raise LinearMeldError("the board needs at least one row")

    def link(x: int, y: int) -> Optional[int]:
        if 0 <= x < size and 0 <= y < size:
            return board_node(x, y, size)
        return None

    facts = []
    for x in range(size):
        for y in range(size):
            node = board_node(x, y, size)
            neighbours = {
                "left": link(x, y - 1),
                "right": link(x, y + 1),
                "down-left": link(x + 1, y - 2),
                "down-right": link(x + 1, y + 2),
            }
            for predicate, target in neighbours.items():
                target = node if target is None else target
                facts.append(f"!{predicate}(@{node}, @{target})")
            facts.append(f"!coord(@{node}, {x}, {y})")
    return _lines(facts)


def ring_edges(size: int) -> list[tuple[int, int]]:
    """
    Edges of the pagerank ring on nodes ``1..size``

    Every node links to its successor, nodes at even positions also link
    two positions ahead. No node has more than two incoming links.
    """
    edges = []
    for index in range(size):
        edges.append((index + 1, (index + 1) % size + 1))
        if index % 2 == 0:
            edges.append((index + 1, (index + 2) % size + 1))
    return edges


@generator("pagerank-ring")
def pagerank_ring(size: int, seed: int = 0) -> str:
    if size < 3:
        raise LinearMeldError("the pagerank ring needs at least three nodes")

    edges = ring_edges(size)
    outgoing = {node: 0 for node in range(1, size + 1)}
    incoming = {node: 0 for node in range(1, size + 1)}
    facts = []
    for source, target in edges:
        outgoing[source] += 1
        incoming[target] += 1
        facts.append(f"!output(@{source}, @{target}, 1.0)")
    for node in range(1, size + 1):
        facts.append(f"!numLinks(@{node}, {outgoing[node]})")
        facts.append(f"!numInput(@{node}, {incoming[node]})")
    return _lines(facts)


def random_weighted_edges(
    size: int, seed: int = 0, edges: Optional[int] = None
) -> dict[tuple[int, int], int]:
    """
    A random directed graph on nodes ``1..size`` with weights 1 to 9

    Every node is reachable from node 1. The graph has ``edges`` edges,
    three times the number of nodes but at most 60 if not given.
    """
    rng = random.Random(seed)
    wanted = edges if edges is not None else min(3 * size, 60)
    wanted = min(wanted, size * (size - 1))
    graph: dict[tuple[int, int], int] = {}
    for node in range(2, size + 1):
        graph[(rng.randint(1, node - 1), node)] = rng.randint(1, 9)
    while len(graph) < wanted:
        source = rng.randint(1, size)
        target = rng.randint(1, size)
        if source != target:
            graph.setdefault((source, target), rng.randint(1, 9))
    return graph


@generator("weighted-graph")
def weighted_graph(size: int, seed: int = 0) -> str:
    if size < 2:
        raise LinearMeldError("the graph needs at least two nodes")
    facts = [
        f"!edge(@{source}, @{target}, {weight})"
        for (source, target), weight in sorted(
            random_weighted_edges(size, seed).items()
        )
    ]
    return _lines(facts)
