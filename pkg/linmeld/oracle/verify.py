# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from linmeld.checker.checker import TypedProgram, check_program
from linmeld.engine.derivation import FreshNodes
from linmeld.engine.engine import Engine
from linmeld.errors import (
    BoundExceeded,
    ConstraintError,
    InvariantViolation,
    LinearMeldError,
)
from linmeld.language.parser import parse
from linmeld.models.fact import Fact
from linmeld.oracle.hld import HighLevelOracle, check_soundness
from linmeld.oracle.random_programs import (
    HOME,
    build_database,
    random_facts,
    random_program,
)

logger = logging.getLogger(__name__)

# node ids handed out by exists expressions during verification
_FRESH_BASE = 100
_WORLD = 3


@dataclass(frozen=True, kw_only=True)
class Counterexample:
    seed: int
    source: str
    facts: tuple[Fact, ...]
    reason: str

    def describe(self) -> str:
        facts = "\n".join(f"{fact}." for fact in self.facts)
        return (
            f"seed {self.seed}: {self.reason}\n\n{self.source.strip()}\n\n"
            f"// database at {HOME}\n{facts}"
        )


@dataclass(kw_only=True)
class VerificationReport:
    samples: int = 0
    firings: int = 0
    quiescent: int = 0
    skipped: int = 0
    failures: list[Counterexample] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def check_step(
    program: TypedProgram, facts: Iterable[Fact], *, bound: int = 8
) -> Optional[str]:
    """
    Compare one engine step at ``@1`` against the exhaustive oracle

    The engine runs with its self checks enabled, so comprehension
    maximality and the purity of failed rule attempts are verified as well.

    Returns:
        None if the step is sound or a description of the failure

    Raises:
        BoundExceeded: The database is too large for the oracle
        ConstraintError: Evaluating a rule failed
    """
    facts = list(facts)
    oracle = HighLevelOracle(program, world=_WORLD, bound=bound)
    engine = Engine(
        program,
        world=_WORLD,
        fresh=FreshNodes(_FRESH_BASE),
        self_check=True,
    )

    db = build_database(facts)
    if db.linear_count() > bound:
        raise BoundExceeded(
            f"{db.linear_count()} linear facts exceed the bound of {bound}"
        )
    try:
        outcome = engine.run_node(db)
    except InvariantViolation as e:
        return str(e)

    fired = outcome.rule if outcome is not None else len(program.rules)
    for rule in program.rules[:fired]:
        if oracle.apply(db, rule, _FRESH_BASE):
            return (
                f"rule {rule.priority} can fire but the engine "
                + (
                    f"fired rule {fired}"
                    if outcome is not None
                    else "found no rule"
                )
            )

    if outcome is None:
        return None

    rule = program.rules[outcome.rule]
    outcomes = oracle.apply(db, rule, _FRESH_BASE)
    if not check_soundness(outcome, outcomes):
        return (
            f"rule {rule.priority} {outcome.describe()} is not among the "
            f"{len(outcomes)} possible outcomes"
        )
    return None


def minimize(
    program: TypedProgram,
    facts: list[Fact],
    *,
    bound: int = 8,
) -> list[Fact]:
    """
    Drop facts from a failing database as long as the failure persists
    """

    def fails(candidate: list[Fact]) -> bool:
        try:
            return check_step(program, candidate, bound=bound) is not None
        except LinearMeldError:
            return False

    current = list(facts)
    shrunk = True
    while shrunk:
        shrunk = False
        for index in range(len(current)):
            candidate = current[:index] + current[index + 1 :]
            if fails(candidate):
                current = candidate
                shrunk = True
                break
    return current


class Verifier:
    """
    Property based comparison of the engine against the oracle

    Arguments:
        bound: Largest database handed to the oracle
        source: Fixed program text. Random programs are generated when it
            is None.
        comprehensions: Allow comprehensions and aggregates in generated
            programs
    """

    def __init__(
        self,
        *,
        bound: int = 6,
        source: Optional[str] = None,
        overrides: Optional[dict] = None,
        comprehensions: bool = True,
    ) -> None:
        self.bound = bound
        self.source = source
        self.overrides = overrides or {}
        self.comprehensions = comprehensions
        self._program = (
            check_program(parse(source), self.overrides)
            if source is not None
            else None
        )

    def _sample(self, seed: int) -> tuple[str, TypedProgram, list[Fact]]:
        rng = random.Random(seed)
        if self._program is not None:
            assert self.source is not None
            facts = random_facts(self._program, rng, size=self.bound)
            return self.source, self._program, facts

        source = random_program(seed, comprehensions=self.comprehensions)
        program = check_program(parse(source))
        return source, program, list(program.axioms)

    def run(
        self,
        samples: int,
        seed: int = 0,
        progress: Optional[Callable[[], None]] = None,
    ) -> VerificationReport:
        report = VerificationReport()
        for sample in range(seed, seed + samples):
            report.samples += 1
            source, program, facts = self._sample(sample)
            try:
                reason = check_step(program, facts, bound=self.bound)
            except (BoundExceeded, ConstraintError) as e:
                logger.debug("Skipping sample %d: %s", sample, e)
                report.skipped += 1
                reason = None
            else:
                db = build_database(facts)
                engine = Engine(program, world=_WORLD)
                if engine.run_node(db) is None:
                    report.quiescent += 1
                else:
                    report.firings += 1

            if reason is not None:
                logger.info("Sample %d failed: %s", sample, reason)
                report.failures.append(
                    Counterexample(
                        seed=sample,
                        source=source,
                        facts=tuple(
                            minimize(program, facts, bound=self.bound)
                        ),
                        reason=reason,
                    )
                )
            if progress:
                progress()
        return report
