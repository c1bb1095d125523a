# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Continuation frames of the matcher.

A frame is pushed for every fact template that has at least one candidate.
It remembers the untried candidates and the state to restore before the
next one is tried. Restoring a persistent frame never releases consumed
facts of earlier templates because a persistent frame consumes nothing.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from linmeld.language.syntax import FactTemplate
from linmeld.models.database import Candidate


@dataclass(slots=True, kw_only=True)
class LinearFrame:
    template: FactTemplate
    # index of the plan step following the template
    resume: int
    alternatives: deque[Candidate] = field(default_factory=deque)
    consumed_mark: int = 0
    bindings_mark: int = 0
    linear_mark: int = 0
    persistent_mark: int = 0

    def purge(self, slots: set[int]) -> None:
        """Drop alternatives that were consumed in the meantime"""
        self.alternatives = deque(
            candidate
            for candidate in self.alternatives
            if candidate.slot not in slots
        )


@dataclass(slots=True, kw_only=True)
class PersistentFrame:
    template: FactTemplate
    resume: int
    alternatives: deque[Candidate] = field(default_factory=deque)
    consumed_mark: int = 0
    bindings_mark: int = 0
    linear_mark: int = 0
    persistent_mark: int = 0


Frame = Union[LinearFrame, PersistentFrame]


class ContinuationStack:
    """
    The frames of an ongoing match

    A plain stack for rule bodies. For comprehension and aggregate bodies
    the stack is split: persistent frames pushed before the first linear
    frame form the prefix P, everything from the first linear frame on
    forms C. Backtracking works on C first and falls back to P once C is
    empty.
    """

    def __init__(self, split: bool = False) -> None:
        self.split = split
        self.prefix: list[PersistentFrame] = []
        self.frames: list[Frame] = []

    def __len__(self) -> int:
        return len(self.prefix) + len(self.frames)

    def __bool__(self) -> bool:
        return bool(self.prefix) or bool(self.frames)

    def __iter__(self):  # type: ignore[no-untyped-def]
        yield from self.prefix
        yield from self.frames

    def push(self, frame: Frame) -> None:
        persistent = isinstance(frame, PersistentFrame)
        if self.split and not self.frames and persistent:
            self.prefix.append(frame)
        else:
            self.frames.append(frame)

    def top(self) -> Optional[Frame]:
        if self.frames:
            return self.frames[-1]
        if self.prefix:
            return self.prefix[-1]
        return None

    def pop(self) -> Frame:
        if self.frames:
            return self.frames.pop()
        return self.prefix.pop()

    def fix(self, consumed: Iterable[int]) -> None:
        """
        Prepare the stacks for the next application of a comprehension

        Only the first linear frame of C survives, without the facts just
        consumed among its alternatives. Frames of P are kept and see the
        database without the consumed facts from now on.
        """
        slots = set(consumed)
        bottom = next(
            (frame for frame in self.frames if isinstance(frame, LinearFrame)),
            None,
        )
        if bottom is None:
            self.frames = []
        else:
            bottom.purge(slots)
            self.frames = [bottom]
        for frame in self:
            frame.consumed_mark = 0
