# SPDX-FileCopyrightText: 2023 Greenbone AG
#
# SPDX-License-Identifier: AGPL-3.0-or-later

from dataclasses import dataclass
from typing import Iterable, Optional


class LinearMeldError(Exception):
    """
    Base class for all errors originating in linmeld
    """


class LexError(LinearMeldError):
    """A problem while splitting source text into tokens"""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class UnterminatedString(LexError):
    pass


class IllegalCharacter(LexError):
    pass


class ParseError(LinearMeldError):
    """The token sequence does not form a valid program"""

    def __init__(
        self, expected: str, found: str, line: int, column: int
    ) -> None:
        super().__init__(
            f"{line}:{column}: expected {expected}, found {found}"
        )
        self.expected = expected
        self.found = found
        self.line = line
        self.column = column


@dataclass(frozen=True, kw_only=True)
class Diagnostic:
    code: str
    message: str
    line: int = 0
    column: int = 0
    rule: Optional[int] = None

    def format(self, file_name: str = "<input>") -> str:
        return (
            f"{file_name}:{self.line}:{self.column}: "
            f"{self.code}: {self.message}"
        )


class CheckError(LinearMeldError):
    """The program is not well typed or breaks the locality restriction"""

    def __init__(self, diagnostics: Iterable[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        super().__init__(
            "\n".join(diagnostic.format() for diagnostic in self.diagnostics)
        )


class LocalityViolation(LinearMeldError):
    """
    Body fact templates of a rule do not share a single home node
    """

    def __init__(self, diagnostic: Diagnostic) -> None:
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


class DatabaseError(LinearMeldError):
    """An invalid operation on a node database"""


class WrongNode(DatabaseError):
    pass


class NotPresent(DatabaseError):
    pass


class PersistentRetract(DatabaseError):
    pass


class ConstraintError(LinearMeldError):
    """Evaluating an expression failed"""


class DivisionByZero(ConstraintError):
    pass


class HeadOfEmptyList(ConstraintError):
    pass


class EvaluationTypeError(ConstraintError):
    pass


class BoundExceeded(LinearMeldError):
    """
    A database is too large for exhaustive enumeration of outcomes
    """


class NonTermination(LinearMeldError):
    """The run did not reach quiescence within the allowed steps"""

    def __init__(self, steps: int) -> None:
        super().__init__(f"no quiescence after {steps} rule applications")
        self.steps = steps


class InvariantViolation(LinearMeldError):
    """
    An internal invariant of the engine or the runtime did not hold
    """
