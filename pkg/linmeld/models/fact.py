# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import dataclass, field

from linmeld.models.values import NodeId, Value, format_value, value_key


@dataclass(frozen=True, slots=True, eq=False)
class Fact:
    """
    A predicate applied to argument values

    The first argument is the node the fact lives at. Two facts are equal
    iff predicate, linearity and the identity keys of all arguments are
    equal.
    """

    predicate: str
    args: tuple[Value, ...]
    linear: bool = True
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "_key",
            (self.predicate, tuple(value_key(arg) for arg in self.args)),
        )

    @property
    def key(self) -> tuple:
        return self._key

    @property
    def home(self) -> NodeId:
        return self.args[0]  # type: ignore[return-value]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Fact):
            return NotImplemented
        return self.linear == other.linear and self._key == other._key

    def __hash__(self) -> int:
        return hash((self.linear, self._key))

    def __lt__(self, other: "Fact") -> bool:
        return (self._key, self.linear) < (other._key, other.linear)

    def __str__(self) -> str:
        args = ", ".join(format_value(arg) for arg in self.args)
        prefix = "" if self.linear else "!"
        return f"{prefix}{self.predicate}({args})"


def persistent(predicate: str, *args: Value) -> Fact:
    return Fact(predicate, tuple(args), linear=False)


def linear(predicate: str, *args: Value) -> Fact:
    return Fact(predicate, tuple(args), linear=True)
