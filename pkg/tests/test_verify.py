# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import random
from dataclasses import replace

from linmeld.checker.checker import check_program
from linmeld.corpus.fixtures import PROGRAMS
from linmeld.engine.engine import Engine
from linmeld.language.parser import parse
from linmeld.models.values import NodeId
from linmeld.oracle import verify
from linmeld.oracle.random_programs import (
    ProgramGenerator,
    random_facts,
    random_program,
)
from linmeld.oracle.verify import Verifier, check_step, minimize

VISIT_SOURCE = (PROGRAMS / "visit.lm").read_text(encoding="utf8")


def visit_facts_at_home():
    program = check_program(parse(VISIT_SOURCE))
    facts = [fact for fact in program.axioms if fact.home == NodeId(1)]
    return program, facts


class DroppingEngine(Engine):
    def run_node(self, db):
        outcome = super().run_node(db)
        if outcome is None:
            return None
        return replace(outcome, derived_linear=())


def test_generated_programs_check():
    for seed in range(20):
        check_program(parse(random_program(seed)))


def test_generation_is_reproducible():
    assert ProgramGenerator(3).generate() == ProgramGenerator(3).generate()


def test_random_facts_respect_declarations():
    program = check_program(parse(VISIT_SOURCE))
    facts = random_facts(program, random.Random(1), size=6)
    assert len(facts) <= 6
    for fact in facts:
        assert fact.home == NodeId(1)
        assert fact.linear == program.is_linear(fact.predicate)


def test_engine_step_is_sound():
    program, facts = visit_facts_at_home()
    assert check_step(program, facts) is None


def test_unsound_engine_is_detected(monkeypatch):
    monkeypatch.setattr(verify, "Engine", DroppingEngine)
    program, facts = visit_facts_at_home()

    reason = check_step(program, facts)

    assert reason is not None
    assert "is not among" in reason


def test_minimize_keeps_the_failure(monkeypatch):
    monkeypatch.setattr(verify, "Engine", DroppingEngine)
    program, facts = visit_facts_at_home()

    smallest = minimize(program, facts)

    assert check_step(program, smallest) is not None
    assert len(smallest) < len(facts)


def test_random_programs_pass():
    report = Verifier(bound=6).run(40, seed=0)

    assert report.samples == 40
    assert report.passed, "\n\n".join(
        failure.describe() for failure in report.failures
    )
    assert report.firings + report.quiescent + report.skipped == 40


def test_thousand_random_programs_pass():
    report = Verifier(bound=6).run(1000, seed=0)

    assert report.samples == 1000
    assert report.passed, "\n\n".join(
        failure.describe() for failure in report.failures[:3]
    )
    assert report.firings > 0
    assert report.quiescent > 0


def test_random_programs_without_comprehensions_pass():
    report = Verifier(bound=6, comprehensions=False).run(20, seed=100)
    assert report.passed


def test_fixed_program_with_random_databases():
    calls = []
    report = Verifier(bound=6, source=VISIT_SOURCE).run(
        25, seed=3, progress=lambda: calls.append(1)
    )
    assert report.passed
    assert len(calls) == 25


def test_counterexample_description(monkeypatch):
    monkeypatch.setattr(verify, "Engine", DroppingEngine)
    report = Verifier(bound=6, source=VISIT_SOURCE).run(40, seed=0)

    assert not report.passed
    text = report.failures[0].describe()
    assert text.startswith(f"seed {report.failures[0].seed}:")
    assert "type linear visit(node)." in text
