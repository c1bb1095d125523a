# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Runtime values of LM programs.

Values are plain Python objects wherever possible: ``int``, ``float``,
``bool`` and ``str`` map onto themselves, lists are tuples so that facts
stay hashable. Node addresses and pairs get their own small types because
neither can be expressed with a builtin without losing information.
"""

import struct
from dataclasses import dataclass
from typing import Any, Iterator, Union


@dataclass(frozen=True, order=True, slots=True)
class NodeId:
    id: int

    def __str__(self) -> str:
        return f"@{self.id}"

    def __repr__(self) -> str:
        return f"NodeId({self.id})"


@dataclass(frozen=True, slots=True)
class Pair:
    first: Any
    second: Any

    def __str__(self) -> str:
        return f"({format_value(self.first)}; {format_value(self.second)})"


Value = Union[NodeId, int, float, bool, str, tuple, Pair]

# leading tags keep keys of different kinds comparable when sorting
_NODE, _INT, _FLOAT, _BOOL, _STRING, _LIST, _PAIR = range(7)


def _float_bits(value: float) -> int:
    return struct.unpack("<q", struct.pack("<d", value))[0]


def value_key(value: Value) -> tuple:
    """
    Identity key of a value

    Two values denote the same database entry iff their keys are equal.
    Floats are compared by their bit pattern and booleans never collapse
    into integers.
    """
    if isinstance(value, NodeId):
        return (_NODE, value.id)
    if isinstance(value, bool):
        return (_BOOL, value)
    if isinstance(value, int):
        return (_INT, value)
    if isinstance(value, float):
        return (_FLOAT, value, _float_bits(value))
    if isinstance(value, str):
        return (_STRING, value)
    if isinstance(value, tuple):
        return (_LIST, tuple(value_key(item) for item in value))
    if isinstance(value, Pair):
        return (_PAIR, value_key(value.first), value_key(value.second))
    raise TypeError(f"{value!r} is not an LM value")


def same_value(left: Value, right: Value) -> bool:
    if type(left) is type(right) and isinstance(left, (int, str, NodeId)):
        return left == right
    return value_key(left) == value_key(right)


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return "[" + ", ".join(format_value(item) for item in value) + "]"
    return str(value)


def nodes_in(value: Value) -> Iterator[NodeId]:
    """
    Every node address in a value, including those nested in lists and
    pairs
    """
    if isinstance(value, NodeId):
        yield value
    elif isinstance(value, tuple):
        for item in value:
            yield from nodes_in(item)
    elif isinstance(value, Pair):
        yield from nodes_in(value.first)
        yield from nodes_in(value.second)
