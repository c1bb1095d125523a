# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from collections import deque

from linmeld.engine.frames import (
    ContinuationStack,
    LinearFrame,
    PersistentFrame,
)
from linmeld.language.parser import parse
from linmeld.models.database import Candidate
from linmeld.models.fact import linear, persistent
from linmeld.models.values import NodeId

A = NodeId(1)


def template(source: str):
    (axiom,) = parse(f"{source}.").axioms
    return axiom.fact


def linear_frame(predicate: str, slots: list[int]) -> LinearFrame:
    return LinearFrame(
        template=template(f"{predicate}(A, X)"),
        resume=1,
        alternatives=deque(
            Candidate(linear(predicate, A, slot), {"X": slot}, slot)
            for slot in slots
        ),
        consumed_mark=2,
    )


def persistent_frame(predicate: str) -> PersistentFrame:
    return PersistentFrame(
        template=template(f"!{predicate}(A, X)"),
        resume=1,
        alternatives=deque(
            [Candidate(persistent(predicate, A, 1), {"X": 1}, None)]
        ),
        consumed_mark=1,
    )


def test_persistent_prefix_of_split_stack():
    stack = ContinuationStack(split=True)
    a = persistent_frame("a")
    b = linear_frame("b", [2, 3])
    c = persistent_frame("c")

    stack.push(a)
    stack.push(b)
    stack.push(c)

    assert stack.prefix == [a]
    assert stack.frames == [b, c]
    assert len(stack) == 3
    assert stack.top() is c


def test_plain_stack_has_no_prefix():
    stack = ContinuationStack()
    stack.push(persistent_frame("a"))
    assert stack.prefix == []
    assert len(stack.frames) == 1


def test_fix_keeps_first_linear_frame_only():
    stack = ContinuationStack(split=True)
    a = persistent_frame("a")
    b = linear_frame("b", [2, 3])
    c = linear_frame("c", [5])
    stack.push(a)
    stack.push(b)
    stack.push(c)

    stack.fix([2, 5])

    assert stack.prefix == [a]
    assert stack.frames == [b]
    assert [candidate.slot for candidate in b.alternatives] == [3]
    assert b.consumed_mark == 0
    assert a.consumed_mark == 0


def test_fix_without_linear_frame_empties_c():
    stack = ContinuationStack(split=True)
    a = persistent_frame("a")
    stack.push(a)

    stack.fix([])

    assert stack.frames == []
    assert stack.prefix == [a]
    assert a.alternatives


def test_fix_with_every_alternative_consumed():
    stack = ContinuationStack(split=True)
    b = linear_frame("b", [2])
    stack.push(b)

    stack.fix([2])

    assert stack.frames == [b]
    assert not b.alternatives


def test_pop_prefers_c_over_p():
    stack = ContinuationStack(split=True)
    a = persistent_frame("a")
    b = linear_frame("b", [2])
    stack.push(a)
    stack.push(b)

    assert stack.pop() is b
    assert stack.pop() is a
    assert not stack
