# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

from linmeld.checker.checker import compile_program, parse_override
from linmeld.corpus.generators import generate
from linmeld.corpus.oracles import get_oracle
from linmeld.errors import LinearMeldError
from linmeld.models.values import Value
from linmeld.runtime.graph import Graph
from linmeld.runtime.scheduler import RunOptions, run_to_quiescence

logger = logging.getLogger(__name__)

PROGRAMS = Path(__file__).parent / "programs"
CONFIG_SUFFIX = ".conf"
CONST_PREFIX = "const."


def cleanup(item: str) -> str:
    """
    Values can use double or single quotes
    """
    item = item.strip()
    if item.startswith('"'):
        item = item.strip('"')
    elif item.startswith("'"):
        item = item.strip("'")
    return item


def _numbers(text: str) -> tuple[int, ...]:
    return tuple(int(item) for item in text.split(",") if item.strip())


@dataclass(frozen=True, kw_only=True)
class Fixture:
    name: str
    directory: Path
    program: str
    axioms: tuple[str, ...] = ()
    generator: Optional[str] = None
    size: int = 0
    constants: dict[str, str] = field(default_factory=dict)
    workers: tuple[int, ...] = (1,)
    seeds: tuple[int, ...] = (0,)
    oracle: Optional[str] = None
    expected: Optional[str] = None

    def sources(self) -> list[str]:
        texts = [(self.directory / self.program).read_text(encoding="utf8")]
        texts.extend(
            (self.directory / name).read_text(encoding="utf8")
            for name in self.axioms
        )
        if self.generator:
            texts.append(generate(self.generator, self.size))
        return texts

    def overrides(self) -> dict[str, Value]:
        return dict(
            parse_override(f"{name}={value}")
            for name, value in self.constants.items()
        )

    def expected_lines(self) -> Optional[list[str]]:
        if not self.expected:
            return None
        text = (self.directory / self.expected).read_text(encoding="utf8")
        return [line for line in text.splitlines() if line.strip()]


def load_fixture(path: Path) -> Fixture:
    """
    Read a fixture from ``key = value`` lines

    Raises:
        LinearMeldError: An unknown key or a missing program
    """
    values: dict = {"constants": {}}
    for number, line in enumerate(
        path.read_text(encoding="utf8").splitlines(), start=1
    ):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, separator, value = line.partition("=")
        key = key.strip()
        value = cleanup(value)
        if not separator:
            raise LinearMeldError(f"{path}:{number}: expected key = value")

        if key.startswith(CONST_PREFIX):
            values["constants"][key[len(CONST_PREFIX) :]] = value
        elif key in ("program", "generator", "oracle", "expected"):
            values[key] = value
        elif key == "axioms":
            values[key] = tuple(
                cleanup(name) for name in value.split(",") if name.strip()
            )
        elif key == "size":
            values[key] = int(value)
        elif key in ("workers", "seeds"):
            values[key] = _numbers(value)
        else:
            raise LinearMeldError(f"{path}:{number}: unknown key {key!r}")

    if "program" not in values:
        raise LinearMeldError(f"{path}: no program given")
    return Fixture(
        name=path.name.removesuffix(CONFIG_SUFFIX),
        directory=path.parent,
        **values,
    )


def fixtures(
    directory: Path = PROGRAMS, names: Iterable[str] = ()
) -> list[Fixture]:
    wanted = set(names)
    return [
        load_fixture(path)
        for path in sorted(directory.glob(f"*{CONFIG_SUFFIX}"))
        if not wanted or path.name.removesuffix(CONFIG_SUFFIX) in wanted
    ]


@dataclass(frozen=True, kw_only=True)
class FixtureResult:
    name: str
    workers: int
    seed: int
    steps: int
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None


def first_difference(actual: list[str], expected: list[str]) -> Optional[str]:
    for number, (got, wanted) in enumerate(zip(actual, expected), start=1):
        if got != wanted:
            return f"line {number}: expected {wanted!r}, got {got!r}"
    if len(actual) > len(expected):
        extra = actual[len(expected)]
        return f"line {len(expected) + 1}: unexpected {extra!r}"
    if len(actual) < len(expected):
        return f"line {len(actual) + 1}: missing {expected[len(actual)]!r}"
    return None


def run_fixture(
    fixture: Fixture, options: RunOptions = RunOptions()
) -> tuple[Graph, int]:
    program = compile_program(fixture.sources(), fixture.overrides())
    graph = Graph.load(program)
    statistics = run_to_quiescence(graph, options)
    return graph, statistics.steps


def verify_fixture(
    fixture: Fixture,
    workers: Optional[Iterable[int]] = None,
    seeds: Optional[Iterable[int]] = None,
) -> Iterator[FixtureResult]:
    """
    Run a fixture for every worker count and seed and check the result

    Each run is audited. The final database is compared line by line with
    the expected dump and handed to the fixture's oracle.
    """
    expected = fixture.expected_lines()
    oracle = get_oracle(fixture.oracle) if fixture.oracle else None

    for count in workers or fixture.workers:
        for seed in seeds or fixture.seeds:
            options = RunOptions(workers=count, seed=seed, audit=True)
            try:
                graph, steps = run_fixture(fixture, options)
            except LinearMeldError as e:
                yield FixtureResult(
                    name=fixture.name,
                    workers=count,
                    seed=seed,
                    steps=0,
                    error=str(e),
                )
                continue

            error = None
            if oracle:
                error = oracle.check(graph)
            if error is None and expected is not None:
                error = first_difference(graph.dump_lines(), expected)

            logger.info(
                "Fixture %s with %d workers and seed %d: %s",
                fixture.name,
                count,
                seed,
                error or "passed",
            )
            yield FixtureResult(
                name=fixture.name,
                workers=count,
                seed=seed,
                steps=steps,
                error=error,
            )
