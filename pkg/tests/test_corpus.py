# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import replace
from pathlib import Path

import pytest

from linmeld.corpus.fixtures import (
    PROGRAMS,
    Fixture,
    cleanup,
    first_difference,
    fixtures,
    load_fixture,
    run_fixture,
    verify_fixture,
)
from linmeld.errors import LinearMeldError
from linmeld.models.values import NodeId
from linmeld.runtime.scheduler import RunOptions

FAST = [
    "message",
    "visit",
    "shortest",
    "pagerank",
    "prices",
    "picked",
    "work",
    "nqueens4",
    "nqueens5",
    "nqueens6",
]


def fixture(name: str) -> Fixture:
    return load_fixture(PROGRAMS / f"{name}.conf")


@pytest.mark.parametrize("name", FAST)
def test_fixture(name):
    results = list(verify_fixture(fixture(name)))

    assert results
    for result in results:
        assert result.passed, (
            f"{result.name} with {result.workers} workers and seed "
            f"{result.seed}: {result.error}"
        )


@pytest.mark.slow
def test_nqueens_eight():
    (result,) = verify_fixture(fixture("nqueens8"))
    assert result.passed, result.error


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_shortest_distance_on_random_graphs(seed):
    random_graph = replace(fixture("shortest-random"), size=12)
    sources = random_graph.sources()
    assert "!edge(@1," in sources[-1]

    results = list(verify_fixture(random_graph, workers=[1, 2], seeds=[seed]))

    assert all(result.passed for result in results), results


def test_every_shipped_fixture_loads():
    names = {item.name for item in fixtures()}
    assert set(FAST) | {"nqueens8", "shortest-random"} <= names


def test_fixture_selection_by_name():
    assert [item.name for item in fixtures(names=["visit"])] == ["visit"]


def test_load_fixture_keys():
    shortest = fixture("shortest")

    assert shortest.program == "shortest.lm"
    assert shortest.axioms == ("shortest-edges.lm",)
    assert shortest.constants == {"startnode": "@1", "finalnode": "@4"}
    assert shortest.workers == (1, 2, 4)
    assert shortest.seeds == (0, 1, 2)
    assert shortest.oracle == "dijkstra"
    assert shortest.overrides() == {
        "startnode": NodeId(1),
        "finalnode": NodeId(4),
    }


def test_load_fixture_rejects_unknown_keys(tmp_path: Path):
    path = tmp_path / "broken.conf"
    path.write_text("program = visit.lm\ncolour = blue\n")
    with pytest.raises(LinearMeldError, match="unknown key"):
        load_fixture(path)


def test_load_fixture_needs_program(tmp_path: Path):
    path = tmp_path / "empty.conf"
    path.write_text("# nothing here\n")
    with pytest.raises(LinearMeldError, match="no program"):
        load_fixture(path)


@pytest.mark.parametrize(
    "text,expected",
    [("'a b'", "a b"), ('"a"', "a"), (" plain ", "plain")],
)
def test_cleanup(text, expected):
    assert cleanup(text) == expected


def test_first_difference():
    assert first_difference(["a", "b"], ["a", "b"]) is None
    assert first_difference(["a", "c"], ["a", "b"]) == (
        "line 2: expected 'b', got 'c'"
    )
    assert first_difference(["a"], ["a", "b"]) == "line 2: missing 'b'"
    assert first_difference(["a", "b"], ["a"]) == "line 2: unexpected 'b'"


def test_wrong_expectation_is_reported(tmp_path: Path):
    (tmp_path / "visit.lm").write_text(
        (PROGRAMS / "visit.lm").read_text(), encoding="utf8"
    )
    (tmp_path / "visit.expected").write_text("node @1: visited(@1) x1\n")
    (tmp_path / "visit.conf").write_text(
        "program = visit.lm\nexpected = visit.expected\n"
    )

    (result,) = verify_fixture(load_fixture(tmp_path / "visit.conf"))

    assert not result.passed
    assert result.error is not None
    assert result.error.startswith("line 1:")


def test_missing_constant_is_reported():
    broken = replace(fixture("shortest"), constants={})
    results = list(verify_fixture(broken, workers=[1], seeds=[0]))
    assert [result.passed for result in results] == [False]


def test_shortest_final_database():
    graph, steps = run_fixture(fixture("shortest"), RunOptions(workers=2))

    assert steps > 0
    assert graph[NodeId(4)].linear_facts("path")[0].args == (
        NodeId(4),
        2,
        0,
    )


def test_pagerank_ranks():
    graph, _ = run_fixture(fixture("pagerank"))
    for db in graph:
        (rank,) = db.linear_facts("pagerank")
        assert rank.args[2] == 10
        assert db.linear_facts("newrank") == []


@pytest.mark.parametrize("name", ["nqueens4", "nqueens5", "nqueens6"])
def test_small_boards_run_with_several_workers(name):
    board = fixture(name)
    assert board.workers == (1, 2, 4)
    assert board.seeds == (0, 1, 2)
