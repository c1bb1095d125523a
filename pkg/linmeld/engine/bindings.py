# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from collections.abc import Mapping
from typing import Iterator

from linmeld.models.fact import Fact
from linmeld.models.values import Value, same_value


class Bindings(Mapping[str, Value]):
    """
    Variable substitution with an undo log

    ``mark`` returns a position in the log, ``undo`` drops every binding
    made after it. Binding an already bound variable only checks that the
    values agree.
    """

    def __init__(self, initial: Mapping[str, Value] | None = None) -> None:
        self._values: dict[str, Value] = dict(initial or {})
        self._trail: list[str] = []

    def __getitem__(self, name: str) -> Value:
        return self._values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"Bindings({self._values!r})"

    def mark(self) -> int:
        return len(self._trail)

    def bind(self, name: str, value: Value) -> bool:
        if name in self._values:
            return same_value(self._values[name], value)
        self._values[name] = value
        self._trail.append(name)
        return True

    def extend(self, values: Mapping[str, Value]) -> bool:
        for name, value in values.items():
            if not self.bind(name, value):
                return False
        return True

    def undo(self, mark: int) -> None:
        while len(self._trail) > mark:
            del self._values[self._trail.pop()]

    def snapshot(self) -> dict[str, Value]:
        return dict(self._values)


class Consumption:
    """
    The linear facts consumed so far

    Facts consumed by a completed match are committed and stay excluded
    from matching. Facts of the match in progress are tentative and are
    released again by ``undo``.
    """

    def __init__(self) -> None:
        self.committed: list[tuple[str, int, Fact]] = []
        self.trail: list[tuple[str, int, Fact]] = []
        self.slots: set[int] = set()

    def mark(self) -> int:
        return len(self.trail)

    def consume(self, predicate: str, slot: int, fact: Fact) -> None:
        self.trail.append((predicate, slot, fact))
        self.slots.add(slot)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            _, slot, _ = self.trail.pop()
            self.slots.discard(slot)

    def commit(self) -> list[tuple[str, int, Fact]]:
        """
        Make the tentative consumption permanent and return it
        """
        consumed = self.trail
        self.committed.extend(consumed)
        self.trail = []
        return consumed

    def facts(self) -> list[Fact]:
        return [fact for _, _, fact in self.committed + self.trail]
