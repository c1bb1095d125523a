# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator, Optional

from linmeld.errors import IllegalCharacter, UnterminatedString
from linmeld.models.values import NodeId


class TokenKind(Enum):
    IDENT = "identifier"
    VARIABLE = "variable"
    WILDCARD = "_"
    NODE = "node"
    WORLD = "@world"
    INT = "integer"
    FLOAT = "float"
    STRING = "string"
    KEYWORD = "keyword"
    PUNCT = "punctuation"


KEYWORDS = frozenset(("type", "linear", "const", "exists", "true", "false"))

_ESCAPES = {"n": "\n", "t": "\t", "'": "'", "\\": "\\"}

_TOKEN_PATTERN = re.compile(
    r"""
    (?P<space>[ \t\r\n]+)
    | (?P<comment>//[^\n]*)
    | (?P<world>@world\b)
    | (?P<node>@[0-9]+)
    | (?P<number>[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)
    | (?P<ident>[a-z][A-Za-z0-9_]*(?:-[A-Za-z][A-Za-z0-9_]*)*)
    | (?P<variable>[A-Z_][A-Za-z0-9_]*)
    | (?P<string>')
    | (?P<arrow>-o(?![A-Za-z0-9_]))
    | (?P<punct>=>|<>|<=|>=|\|\||&&|[()\[\]{},.|;!=<>+\-*/%])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    value: Any
    line: int
    column: int

    def is_punct(self, text: str) -> bool:
        return self.kind is TokenKind.PUNCT and self.text == text

    def is_keyword(self, text: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.text == text

    def describe(self) -> str:
        if self.kind in (TokenKind.PUNCT, TokenKind.KEYWORD):
            return f"'{self.text}'"
        return f"{self.kind.value} '{self.text}'"


def _read_string(source: str, start: int, line: int, column: int) -> int:
    """
    Returns the index just behind the closing quote of the string starting
    at ``start``
    """
    index = start + 1
    while index < len(source):
        char = source[index]
        if char == "'":
            return index + 1
        if char == "\n":
            break
        if char == "\\":
            index += 1
        index += 1
    raise UnterminatedString("unterminated string literal", line, column)


def _unescape(text: str) -> str:
    chars = []
    index = 0
    while index < len(text):
        char = text[index]
        if char == "\\" and index + 1 < len(text):
            index += 1
            char = _ESCAPES.get(text[index], text[index])
        chars.append(char)
        index += 1
    return "".join(chars)


def iter_tokens(source: str) -> Iterator[Token]:
    position = 0
    line = 1
    line_start = 0
    while position < len(source):
        column = position - line_start + 1
        match = _TOKEN_PATTERN.match(source, position)
        if not match:
            raise IllegalCharacter(
                f"illegal character {source[position]!r}", line, column
            )

        kind_name = match.lastgroup
        text = match.group()
        end = match.end()
        token: Optional[Token] = None

        if kind_name == "string":
            end = _read_string(source, position, line, column)
            text = source[position:end]
            token = Token(
                TokenKind.STRING, text, _unescape(text[1:-1]), line, column
            )
        elif kind_name == "world":
            token = Token(TokenKind.WORLD, text, None, line, column)
        elif kind_name == "node":
            token = Token(
                TokenKind.NODE, text, NodeId(int(text[1:])), line, column
            )
        elif kind_name == "number":
            if "." in text or "e" in text or "E" in text:
                token = Token(TokenKind.FLOAT, text, float(text), line, column)
            else:
                token = Token(TokenKind.INT, text, int(text), line, column)
        elif kind_name == "ident":
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            token = Token(kind, text, text, line, column)
        elif kind_name == "variable":
            kind = TokenKind.WILDCARD if text == "_" else TokenKind.VARIABLE
            token = Token(kind, text, text, line, column)
        elif kind_name in ("arrow", "punct"):
            token = Token(TokenKind.PUNCT, text, text, line, column)

        newlines = source.count("\n", position, end)
        if newlines:
            line += newlines
            line_start = source.rindex("\n", position, end) + 1
        position = end

        if token:
            yield token


def tokenize(source: str) -> list[Token]:
    """
    Split LM source text into tokens

    Arguments:
        source: The program text

    Returns:
        A list of tokens without whitespace and comments. An empty source
        results in an empty list.

    Raises:
        UnterminatedString: A string literal is not closed on its line
        IllegalCharacter: A character that can not start any token
    """
    return list(iter_tokens(source))
