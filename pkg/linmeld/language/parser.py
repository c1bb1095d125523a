# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

"""Recursive descent parser for LM programs.

Statements end with ``.``. A statement is a predicate declaration, a
constant declaration, a rule ``Body -o Head.``, a selector rule
``[op => Y | Body] -o Head.`` or one or more comma separated axioms.

Expression precedence from loosest to tightest: ``||``, ``&&``,
comparisons, ``+ -``, ``* / %``, unary minus.
"""

from enum import Enum
from typing import Callable, Optional, Sequence, TypeVar

from linmeld.errors import ParseError
from linmeld.language.lexer import Token, TokenKind, tokenize
from linmeld.language.syntax import (
    BASE_TYPES,
    BUILTIN_FUNCTIONS,
    COMPARISON_OPERATORS,
    Accumulator,
    Aggregate,
    AggregateOperation,
    Axiom,
    Binary,
    BodyExists,
    BodyTerm,
    Call,
    Comprehension,
    ConstDecl,
    ConstRef,
    Constraint,
    Exists,
    Expr,
    FactTemplate,
    HeadTerm,
    Linearity,
    ListExpr,
    Literal,
    Location,
    One,
    PairExpr,
    PredicateDecl,
    Program,
    Rule,
    Selector,
    SelectorOperation,
    SubHeadTerm,
    TypeExpr,
    Unary,
    Var,
    Wildcard,
    World,
    list_of,
    pair_of,
)

T = TypeVar("T")
E = TypeVar("E", bound=Enum)

# tokens that may follow the unit ``1`` when it is used as a term
_TERM_END = (",", ".", "-o", "|", ")", "}", "]")


class Parser:
    def __init__(self, tokens: Sequence[Token]) -> None:
        self._tokens = tokens
        self._index = 0

    # token helpers

    def _peek(self, offset: int = 0) -> Optional[Token]:
        index = self._index + offset
        if index < len(self._tokens):
            return self._tokens[index]
        return None

    def _location(self) -> Location:
        token = self._peek()
        if token:
            return Location(token.line, token.column)
        if self._tokens:
            last = self._tokens[-1]
            return Location(last.line, last.column + len(last.text))
        return Location(1, 1)

    def _error(self, expected: str) -> ParseError:
        token = self._peek()
        location = self._location()
        found = token.describe() if token else "end of input"
        return ParseError(expected, found, location.line, location.column)

    def _next(self) -> Token:
        token = self._peek()
        if token is None:
            raise self._error("more input")
        self._index += 1
        return token

    def _at_punct(self, text: str, offset: int = 0) -> bool:
        token = self._peek(offset)
        return token is not None and token.is_punct(text)

    def _at_keyword(self, text: str) -> bool:
        token = self._peek()
        return token is not None and token.is_keyword(text)

    def _at_kind(self, kind: TokenKind, offset: int = 0) -> bool:
        token = self._peek(offset)
        return token is not None and token.kind is kind

    def _accept(self, text: str) -> bool:
        if self._at_punct(text):
            self._index += 1
            return True
        return False

    def _expect(self, text: str) -> Token:
        if not self._at_punct(text):
            raise self._error(f"'{text}'")
        return self._next()

    def _expect_kind(self, kind: TokenKind, expected: str) -> Token:
        if not self._at_kind(kind):
            raise self._error(expected)
        return self._next()

    def _separated(
        self, item: Callable[[], T], separator: str = ","
    ) -> list[T]:
        items = [item()]
        while self._accept(separator):
            items.append(item())
        return items

    # statements

    def parse_program(self) -> Program:
        declarations: list[PredicateDecl] = []
        constants: list[ConstDecl] = []
        rules: list[Rule] = []
        axioms: list[Axiom] = []

        while self._peek() is not None:
            if self._at_keyword("type"):
                declarations.append(self._declaration())
            elif self._at_keyword("const"):
                constants.append(self._constant())
            elif self._at_punct("["):
                rules.append(self._selector_rule(len(rules)))
            else:
                location = self._location()
                body = self._body()
                if self._accept("-o"):
                    head = self._head()
                    self._expect(".")
                    rules.append(
                        Rule(
                            priority=len(rules),
                            body=tuple(body),
                            head=tuple(head),
                            location=location,
                        )
                    )
                else:
                    self._expect_axiom_end(body)
                    axioms.extend(
                        Axiom(fact=term, location=term.location)
                        for term in body
                        if isinstance(term, FactTemplate)
                    )

        return Program(
            declarations=tuple(declarations),
            constants=tuple(constants),
            rules=tuple(rules),
            axioms=tuple(axioms),
        )

    def _expect_axiom_end(self, body: list[BodyTerm]) -> None:
        if not self._at_punct("."):
            raise self._error("'-o' or '.'")
        for term in body:
            if not isinstance(term, FactTemplate):
                raise ParseError(
                    "a fact",
                    "a non fact term in an axiom",
                    term.location.line if term.location else 0,
                    term.location.column if term.location else 0,
                )
        self._next()

    def _declaration(self) -> PredicateDecl:
        location = self._location()
        self._next()
        linearity = Linearity.PERSISTENT
        if self._at_keyword("linear"):
            self._next()
            linearity = Linearity.LINEAR
        name = self._expect_kind(TokenKind.IDENT, "a predicate name")
        self._expect("(")
        arg_types = self._separated(self._type)
        self._expect(")")
        self._expect(".")
        return PredicateDecl(
            name=name.text,
            arg_types=tuple(arg_types),
            linearity=linearity,
            location=location,
        )

    def _type(self) -> TypeExpr:
        token = self._expect_kind(TokenKind.IDENT, "a type")
        if token.text == "list":
            return list_of(self._type())
        if token.text == "pair":
            first = self._type()
            self._expect(";")
            return pair_of(first, self._type())
        if token.text in BASE_TYPES:
            return BASE_TYPES[token.text]
        self._index -= 1
        raise self._error("a type")

    def _constant(self) -> ConstDecl:
        location = self._location()
        self._next()
        name = self._expect_kind(TokenKind.IDENT, "a constant name")
        self._expect("=")
        expr = self._expr()
        self._expect(".")
        return ConstDecl(name=name.text, expr=expr, location=location)

    def _selector_rule(self, priority: int) -> Rule:
        location = self._location()
        self._expect("[")
        operation = self._operation(SelectorOperation, "a selector operation")
        self._expect("=>")
        variable = self._expect_kind(TokenKind.VARIABLE, "a variable")
        self._expect("|")
        body = self._body()
        self._expect("]")
        self._expect("-o")
        head = self._head()
        self._expect(".")
        return Rule(
            priority=priority,
            body=tuple(body),
            head=tuple(head),
            selector=Selector(operation=operation, variable=variable.text),
            location=location,
        )

    def _operation(self, enum: type[E], expected: str) -> E:
        token = self._expect_kind(TokenKind.IDENT, expected)
        try:
            return enum(token.text)
        except ValueError:
            self._index -= 1
            raise self._error(expected) from None

    # bodies

    def _body(self) -> list[BodyTerm]:
        return self._separated(self._body_term)

    def _at_unit(self) -> bool:
        token = self._peek()
        if token is None or token.kind is not TokenKind.INT:
            return False
        if token.value != 1:
            return False
        following = self._peek(1)
        return following is None or any(
            following.is_punct(text) for text in _TERM_END
        )

    def _at_template(self) -> bool:
        if self._at_punct("!"):
            return True
        token = self._peek()
        return (
            token is not None
            and token.kind is TokenKind.IDENT
            and token.text not in BUILTIN_FUNCTIONS
            and self._at_punct("(", 1)
        )

    def _body_term(self) -> BodyTerm:
        location = self._location()
        if self._at_unit():
            self._next()
            return One(location=location)
        if self._at_template():
            return self._template()
        if self._at_keyword("exists"):
            variables = self._exists_variables()
            self._expect("(")
            body = self._body()
            self._expect(")")
            return BodyExists(
                variables=variables, body=tuple(body), location=location
            )
        return Constraint(expr=self._expr(), location=location)

    def _exists_variables(self) -> tuple[str, ...]:
        self._next()
        variables = self._separated(self._variable_name)
        self._expect(".")
        return tuple(variables)

    def _variable_name(self) -> str:
        return self._expect_kind(TokenKind.VARIABLE, "a variable").text

    def _template(self) -> FactTemplate:
        location = self._location()
        persistent = self._accept("!")
        name = self._expect_kind(TokenKind.IDENT, "a predicate name")
        self._expect("(")
        args = self._separated(self._expr)
        self._expect(")")
        return FactTemplate(
            predicate=name.text,
            args=tuple(args),
            persistent=persistent,
            location=location,
        )

    # heads

    def _head(self) -> list[HeadTerm]:
        return self._separated(self._head_term)

    def _head_term(self) -> HeadTerm:
        location = self._location()
        if self._at_punct("{"):
            return self._comprehension()
        if self._at_punct("["):
            return self._aggregate()
        if self._at_keyword("exists"):
            variables = self._exists_variables()
            self._expect("(")
            head = self._sub_head()
            self._expect(")")
            return Exists(variables=variables, head=head, location=location)
        return self._sub_head_term()

    def _sub_head(self) -> tuple[SubHeadTerm, ...]:
        return tuple(self._separated(self._sub_head_term))

    def _sub_head_term(self) -> SubHeadTerm:
        location = self._location()
        if self._at_unit():
            self._next()
            return One(location=location)
        if self._at_template():
            return self._template()
        raise self._error("a fact or '1'")

    def _variable_list(self) -> tuple[str, ...]:
        if self._accept("."):
            return ()
        return tuple(self._separated(self._variable_name))

    def _comprehension(self) -> Comprehension:
        location = self._location()
        self._expect("{")
        variables = self._variable_list()
        self._expect("|")
        body = self._body()
        self._expect("|")
        head = self._sub_head()
        self._expect("}")
        return Comprehension(
            variables=variables,
            body=tuple(body),
            head=head,
            location=location,
        )

    def _accumulator(self) -> Accumulator:
        operation = self._operation(
            AggregateOperation, "an aggregate operation"
        )
        self._expect("=>")
        return Accumulator(
            operation=operation, variable=self._variable_name()
        )

    def _aggregate(self) -> Aggregate:
        location = self._location()
        self._expect("[")
        accumulators = self._separated(self._accumulator)
        self._expect("|")
        variables = self._variable_list()
        self._expect("|")
        body = self._body()
        self._expect("|")
        head1 = self._sub_head()
        self._expect("|")
        head2 = self._sub_head()
        self._expect("]")
        return Aggregate(
            accumulators=tuple(accumulators),
            variables=variables,
            body=tuple(body),
            head1=head1,
            head2=head2,
            location=location,
        )

    # expressions

    def _expr(self) -> Expr:
        return self._binary_left(("||",), self._and)

    def _and(self) -> Expr:
        return self._binary_left(("&&",), self._comparison)

    def _binary_left(
        self, operators: tuple[str, ...], operand: Callable[[], Expr]
    ) -> Expr:
        left = operand()
        while True:
            token = self._peek()
            if not (
                token is not None
                and token.kind is TokenKind.PUNCT
                and token.text in operators
            ):
                return left
            self._next()
            right = operand()
            left = Binary(
                op=token.text,
                left=left,
                right=right,
                location=Location(token.line, token.column),
            )

    def _comparison(self) -> Expr:
        left = self._additive()
        token = self._peek()
        if (
            token is not None
            and token.kind is TokenKind.PUNCT
            and token.text in COMPARISON_OPERATORS
        ):
            self._next()
            right = self._additive()
            return Binary(
                op=token.text,
                left=left,
                right=right,
                location=Location(token.line, token.column),
            )
        return left

    def _additive(self) -> Expr:
        return self._binary_left(("+", "-"), self._multiplicative)

    def _multiplicative(self) -> Expr:
        return self._binary_left(("*", "/", "%"), self._unary)

    def _unary(self) -> Expr:
        if self._at_punct("-"):
            location = self._location()
            self._next()
            operand = self._unary()
            if isinstance(operand, Literal) and isinstance(
                operand.value, (int, float)
            ) and not isinstance(operand.value, bool):
                return Literal(value=-operand.value, location=location)
            return Unary(op="-", operand=operand, location=location)
        return self._primary()

    def _primary(self) -> Expr:
        location = self._location()
        token = self._peek()
        if token is None:
            raise self._error("an expression")

        if token.kind in (
            TokenKind.INT,
            TokenKind.FLOAT,
            TokenKind.STRING,
            TokenKind.NODE,
        ):
            self._next()
            return Literal(value=token.value, location=location)
        if token.is_keyword("true") or token.is_keyword("false"):
            self._next()
            return Literal(value=token.text == "true", location=location)
        if token.kind is TokenKind.WORLD:
            self._next()
            return World(location=location)
        if token.kind is TokenKind.VARIABLE:
            self._next()
            return Var(name=token.text, location=location)
        if token.kind is TokenKind.WILDCARD:
            self._next()
            return Wildcard(location=location)
        if token.kind is TokenKind.IDENT:
            self._next()
            if not self._accept("("):
                return ConstRef(name=token.text, location=location)
            if token.text not in BUILTIN_FUNCTIONS:
                self._index -= 2
                raise self._error("a builtin function")
            args = self._separated(self._expr)
            self._expect(")")
            return Call(
                function=token.text, args=tuple(args), location=location
            )
        if token.is_punct("("):
            self._next()
            expr = self._expr()
            if self._accept(";"):
                second = self._expr()
                self._expect(")")
                return PairExpr(first=expr, second=second, location=location)
            self._expect(")")
            return expr
        if token.is_punct("["):
            return self._list()
        raise self._error("an expression")

    def _list(self) -> ListExpr:
        location = self._location()
        self._expect("[")
        if self._accept("]"):
            return ListExpr(location=location)
        items = self._separated(self._expr)
        tail = None
        if self._accept("|"):
            tail = self._expr()
        self._expect("]")
        return ListExpr(items=tuple(items), tail=tail, location=location)


def parse_program(tokens: Sequence[Token]) -> Program:
    """
    Build a Program from a token sequence

    Rules get their priority from their position in the source, the first
    rule has priority 0.

    Raises:
        ParseError: At the first token that does not fit the grammar
    """
    return Parser(tokens).parse_program()


def parse(source: str) -> Program:
    return parse_program(tokenize(source))


def parse_expression(source: str) -> Expr:
    """
    Parse a single expression such as a ``--const`` value
    """
    parser = Parser(tokenize(source))
    expr = parser._expr()
    if parser._peek() is not None:
        raise parser._error("end of input")
    return expr
