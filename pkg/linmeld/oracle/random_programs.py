# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Seeded generators of small programs and databases.

The programs stay within the reach of the exhaustive oracle: at most three
predicates over ``node`` and ``int``, at most two rules and at most six
axioms, all of them at node ``@1``.
"""

import random
from dataclasses import dataclass
from typing import Optional

from linmeld.checker.checker import TypedProgram
from linmeld.language.syntax import TypeExpr
from linmeld.models.database import NodeDatabase
from linmeld.models.fact import Fact
from linmeld.models.values import NodeId, Pair, Value

HOME = NodeId(1)

_PREDICATE_NAMES = ("a", "b", "c")
_SMALL_INTS = (0, 1, 2)


@dataclass(frozen=True)
class _Predicate:
    name: str
    linear: bool
    with_value: bool

    def declaration(self) -> str:
        linear = "linear " if self.linear else ""
        args = "node, int" if self.with_value else "node"
        return f"type {linear}{self.name}({args})."

    def template(self, home: str, value: Optional[str]) -> str:
        prefix = "" if self.linear else "!"
        if self.with_value:
            return f"{prefix}{self.name}({home}, {value})"
        return f"{prefix}{self.name}({home})"

    def head(self, home: str, value: Optional[str]) -> str:
        if self.with_value:
            return f"{self.name}({home}, {value})"
        return f"{self.name}({home})"


class ProgramGenerator:
    """
    Writes random but well typed LM programs

    Arguments:
        seed: Seed of the generator, equal seeds give equal programs
        comprehensions: Allow one comprehension or count aggregate per
            program
    """

    def __init__(self, seed: int, *, comprehensions: bool = True) -> None:
        self.seed = seed
        self.comprehensions = comprehensions
        self._random = random.Random(seed)

    def _predicates(self) -> list[_Predicate]:
        rng = self._random
        count = rng.randint(1, len(_PREDICATE_NAMES))
        predicates = [
            _Predicate(
                name=name,
                linear=rng.random() < 0.7,
                with_value=rng.random() < 0.7,
            )
            for name in _PREDICATE_NAMES[:count]
        ]
        if not any(predicate.linear for predicate in predicates):
            first = predicates[0]
            predicates[0] = _Predicate(
                name=first.name, linear=True, with_value=first.with_value
            )
        return predicates

    def _value(self, bound: list[str], fresh: str) -> str:
        rng = self._random
        choice = rng.random()
        if bound and choice < 0.3:
            return rng.choice(bound)
        if choice < 0.5:
            return str(rng.choice(_SMALL_INTS))
        bound.append(fresh)
        return fresh

    def _head_value(self, bound: list[str]) -> str:
        if bound and self._random.random() < 0.7:
            return self._random.choice(bound)
        return str(self._random.choice(_SMALL_INTS))

    def _comprehension(
        self, predicates: list[_Predicate], outer: list[str]
    ) -> str:
        rng = self._random
        source = rng.choice(predicates)
        target = rng.choice(predicates)
        scope = list(outer)
        value = self._value(scope, "Y") if source.with_value else None
        local = [name for name in scope if name not in outer]
        body = source.template("A", value)

        if rng.random() < 0.5 and any(p.with_value for p in predicates):
            counter = rng.choice([p for p in predicates if p.with_value])
            variables = ", ".join(local) if local else "."
            return (
                f"[count => C | {variables} | {body} | 1 | "
                f"{counter.head('A', 'C')}]"
            )

        head = target.head(
            "A", self._head_value(scope) if target.with_value else None
        )
        variables = ", ".join(local) if local else "."
        return f"{{{variables} | {body} | {head}}}"

    def _rule(self, predicates: list[_Predicate], comprehension: bool) -> str:
        rng = self._random
        bound: list[str] = []
        body = []
        for index in range(rng.randint(1, 3)):
            predicate = rng.choice(predicates)
            value = (
                self._value(bound, f"X{index}")
                if predicate.with_value
                else None
            )
            body.append(predicate.template("A", value))
        if bound and rng.random() < 0.3:
            variable = rng.choice(bound)
            operator = rng.choice(("<", "<>", ">="))
            body.append(f"{variable} {operator} {rng.choice(_SMALL_INTS)}")

        head = []
        for _ in range(rng.randint(0, 2)):
            predicate = rng.choice(predicates)
            value = self._head_value(bound) if predicate.with_value else None
            head.append(predicate.head("A", value))
        if comprehension:
            head.append(self._comprehension(predicates, bound))
        if not head:
            head.append("1")
        return f"{', '.join(body)}\n   -o {', '.join(head)}."

    def _axioms(self, predicates: list[_Predicate]) -> list[str]:
        rng = self._random
        axioms = []
        for _ in range(rng.randint(0, 6)):
            predicate = rng.choice(predicates)
            value = str(rng.choice(_SMALL_INTS))
            fact = predicate.head(
                str(HOME), value if predicate.with_value else None
            )
            prefix = "" if predicate.linear else "!"
            axioms.append(f"{prefix}{fact}.")
        return axioms

    def generate(self) -> str:
        """
        Return the source text of a new program
        """
        rng = self._random
        predicates = self._predicates()
        rules = rng.randint(1, 2)
        with_comprehension = -1
        if self.comprehensions and rng.random() < 0.5:
            with_comprehension = rng.randrange(rules)
        lines = [predicate.declaration() for predicate in predicates]
        lines.append("")
        lines.extend(
            self._rule(predicates, index == with_comprehension)
            for index in range(rules)
        )
        lines.append("")
        lines.extend(self._axioms(predicates))
        return "\n".join(lines) + "\n"


def random_program(seed: int, *, comprehensions: bool = True) -> str:
    return ProgramGenerator(seed, comprehensions=comprehensions).generate()


def _random_value(
    type_expr: TypeExpr, rng: random.Random, nodes: int
) -> Value:
    if type_expr.kind == "node":
        return NodeId(rng.randint(1, nodes))
    if type_expr.kind == "int":
        return rng.choice(_SMALL_INTS)
    if type_expr.kind == "float":
        return rng.choice((0.0, 0.5, 1.0))
    if type_expr.kind == "bool":
        return rng.random() < 0.5
    if type_expr.kind == "string":
        return rng.choice(("a", "b"))
    if type_expr.kind == "list":
        return tuple(
            _random_value(type_expr.args[0], rng, nodes)
            for _ in range(rng.randint(0, 2))
        )
    if type_expr.kind == "pair":
        return Pair(
            _random_value(type_expr.args[0], rng, nodes),
            _random_value(type_expr.args[1], rng, nodes),
        )
    raise ValueError(f"can not generate values of type {type_expr}")


def random_facts(
    program: TypedProgram,
    rng: random.Random,
    *,
    node: NodeId = HOME,
    size: int = 6,
    nodes: int = 3,
) -> list[Fact]:
    """
    Random facts at a single node for the predicates of a program

    At most ``size`` facts are created. Linear and persistent facts are
    mixed according to the declarations.
    """
    declarations = list(program.predicates.values())
    if not declarations:
        return []
    facts = []
    for _ in range(rng.randint(0, size)):
        decl = rng.choice(declarations)
        args = (node,) + tuple(
            _random_value(arg_type, rng, nodes)
            for arg_type in decl.arg_types[1:]
        )
        facts.append(Fact(decl.name, args, linear=decl.linear))
    return facts


def build_database(facts: list[Fact], node: NodeId = HOME) -> NodeDatabase:
    db = NodeDatabase(node)
    for fact in facts:
        db.assert_fact(fact)
    return db
