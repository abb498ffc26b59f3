"""Error and diagnostic types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


class FcError(Exception):
    """Base class for all field-calculus errors."""


@dataclass(frozen=True, slots=True)
class SourcePos:
    """1-based line/column of a token or AST node."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """A parse or validation problem with a position and a distinct kind.

    Kinds in use: lexical, syntax, duplicate-function, arity-mismatch,
    duplicate-parameter, missing-main, unbound-variable, unknown-function.
    """

    kind: str
    message: str
    pos: Optional[SourcePos] = None

    def __str__(self) -> str:
        where = f"{self.pos}: " if self.pos else ""
        return f"{where}{self.kind}: {self.message}"


class ParseError(FcError):
    """Raised when parsing or validation fails; carries all diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class FcRuntimeError(FcError):
    """A runtime failure during a round, tagged with the evaluation path."""

    def __init__(self, kind: str, message: str, path: tuple = ()):
        self.kind = kind
        self.path = path
        super().__init__(f"{kind}: {message} (at path {format_path(path)})")


class ScenarioError(FcError):
    """Invalid scenario configuration."""


def format_path(path: tuple) -> str:
    """Render an evaluation path compactly, e.g. /0/then/f:hopcount#2/1."""
    if not path:
        return "/"
    parts = []
    for step in path:
        if isinstance(step, int):
            parts.append(str(step))
        elif isinstance(step, str):
            parts.append({"T": "then", "E": "else"}.get(step, step))
        else:
            parts.append(f"f:{step[1]}#{step[2]}")
    return "/" + "/".join(parts)
