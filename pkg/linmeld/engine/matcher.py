# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from linmeld.engine.bindings import Bindings, Consumption
from linmeld.engine.evaluate import Environment, evaluate
from linmeld.engine.frames import (
    ContinuationStack,
    Frame,
    LinearFrame,
    PersistentFrame,
)
from linmeld.engine.plan import AssignStep, CheckStep, MatchStep, Step
from linmeld.errors import EvaluationTypeError
from linmeld.models.database import Candidate, NodeDatabase
from linmeld.models.fact import Fact
from linmeld.models.values import Value

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Match:
    """A complete match of a body"""

    bindings: dict[str, Value]
    consumed: tuple[tuple[str, int, Fact], ...]
    persistent: tuple[Fact, ...]


class Matcher:
    """
    Matches the steps of a plan against a node database

    The database itself is never modified. Consumed linear facts are
    tracked in a Consumption and excluded from later candidate lookups.
    """

    def __init__(
        self,
        db: NodeDatabase,
        env: Environment,
        bindings: Bindings,
        consumption: Consumption,
        stack: Optional[ContinuationStack] = None,
    ) -> None:
        self.db = db
        self.env = env
        self.bindings = bindings
        self.consumption = consumption
        self.stack = stack if stack is not None else ContinuationStack()
        # facts matched by linear and persistent templates
        self.linear_matched: list[Fact] = []
        self.persistent_matched: list[Fact] = []

    def _choose(self, frame: Frame, candidate: Candidate) -> None:
        self.bindings.extend(candidate.bindings)
        if candidate.slot is None:
            self.persistent_matched.append(candidate.fact)
        else:
            self.consumption.consume(
                frame.template.predicate, candidate.slot, candidate.fact
            )
            self.linear_matched.append(candidate.fact)

    def _restore(self, frame: Frame) -> None:
        self.bindings.undo(frame.bindings_mark)
        self.consumption.undo(frame.consumed_mark)
        del self.linear_matched[frame.linear_mark :]
        del self.persistent_matched[frame.persistent_mark :]

    def _push(self, step: MatchStep, resume: int) -> bool:
        template = step.template
        candidates = self.db.candidates(
            template, self.bindings, self.env, self.consumption.slots
        )
        if not candidates:
            return False

        frame_type = PersistentFrame if template.persistent else LinearFrame
        frame = frame_type(
            template=template,
            resume=resume,
            alternatives=deque(candidates[1:]),
            consumed_mark=self.consumption.mark(),
            bindings_mark=self.bindings.mark(),
            linear_mark=len(self.linear_matched),
            persistent_mark=len(self.persistent_matched),
        )
        self.stack.push(frame)
        self._choose(frame, candidates[0])
        return True

    def _check(self, step: CheckStep) -> bool:
        result = evaluate(step.constraint.expr, self.bindings, self.env)
        if not isinstance(result, bool):
            raise EvaluationTypeError(
                f"constraint evaluated to {result!r} instead of a bool"
            )
        return result

    def backtrack(self) -> Optional[int]:
        """
        Resume at the most recent frame with an untried alternative

        Returns:
            The plan index to continue matching at or None when every
            frame is exhausted
        """
        while self.stack:
            frame = self.stack.top()
            assert frame is not None
            self._restore(frame)
            if frame.alternatives:
                self._choose(frame, frame.alternatives.popleft())
                return frame.resume
            self.stack.pop()
        return None

    def run(self, plan: Sequence[Step], start: int = 0) -> bool:
        """
        Match the plan from ``start`` on, backtracking on failure

        Returns:
            True when the whole plan matched, False when the continuation
            stack ran empty
        """
        index: Optional[int] = start
        while True:
            if index is None:
                return False
            if index == len(plan):
                return True

            step = plan[index]
            if isinstance(step, MatchStep):
                matched = self._push(step, index + 1)
            elif isinstance(step, CheckStep):
                matched = self._check(step)
            elif isinstance(step, AssignStep):
                matched = self.bindings.bind(
                    step.variable,
                    evaluate(step.expr, self.bindings, self.env),
                )
            else:
                raise TypeError(f"unknown plan step {step!r}")

            index = index + 1 if matched else self.backtrack()

    def solutions(self, plan: Sequence[Step]) -> Iterator[Match]:
        """
        Enumerate every match of the plan in candidate order
        """
        found = self.run(plan)
        while found:
            yield self.current()
            index = self.backtrack()
            if index is None:
                return
            found = self.run(plan, index)

    def current(self) -> Match:
        return Match(
            bindings=self.bindings.snapshot(),
            consumed=tuple(self.consumption.trail),
            persistent=tuple(self.persistent_matched),
        )
