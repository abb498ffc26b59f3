"""Lexer, recursive-descent parser and structural validation for `.fc` text.

Operator precedence (loosest to tightest): `||`, `&&`, `== !=`,
`< <= > >=`, `+ -`, `* / %`, unary `- !`. All binary operators are
left-associative. Comments run from `//` to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ast import (
    Call, Expr, FunctionDecl, If, Let, Lit, Nbr, Program, Rep, Scope,
    TupleLit, Var, number_call_sites, walk,
)
from .errors import Diagnostic, ParseError, SourcePos
from .values import Constructor

KEYWORDS = {"def", "if", "nbr", "nbrLocal", "nbrRemote", "rep", "let", "in", "infinity"}

_PUNCT = [
    "==", "!=", "<=", ">=", "=>", "&&", "||",
    "(", ")", "{", "}", "[", "]", ",", "=", "<", ">", "+", "-", "*", "/", "%", "!",
]

_ORDINAL_RE = re.compile(r"[0-9]+(st|nd|rd|th)")
_NUMBER_RE = re.compile(r"[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # number, string, ident, constructor, keyword, punct, eof
    text: str
    pos: SourcePos
    value: object = None


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        pos = SourcePos(line, col)
        if c == '"':
            j = i + 1
            out = []
            while j < n and source[j] != '"':
                if source[j] == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                elif source[j] == "\n":
                    raise ParseError([Diagnostic("lexical", "unterminated string", pos)])
                else:
                    out.append(source[j])
                    j += 1
            if j >= n:
                raise ParseError([Diagnostic("lexical", "unterminated string", pos)])
            tokens.append(Token("string", source[i:j + 1], pos, "".join(out)))
            col += j + 1 - i
            i = j + 1
            continue
        m = _ORDINAL_RE.match(source, i)
        if m:
            tokens.append(Token("ident", m.group(0), pos))
            col += len(m.group(0))
            i = m.end()
            continue
        if c.isdigit():
            m = _NUMBER_RE.match(source, i)
            text = m.group(0)
            if m.end() < n and (source[m.end()].isalpha() or source[m.end()] == "_"):
                raise ParseError([Diagnostic("lexical", f"malformed number near {text!r}", pos)])
            tokens.append(Token("number", text, pos, float(text)))
            col += len(text)
            i = m.end()
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            text = m.group(0)
            if text in KEYWORDS:
                kind = "keyword"
            elif text[0].isupper():
                kind = "constructor"
            else:
                kind = "ident"
            tokens.append(Token(kind, text, pos))
            col += len(text)
            i = m.end()
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                tokens.append(Token("punct", p, pos))
                col += len(p)
                i += len(p)
                break
        else:
            raise ParseError([Diagnostic("lexical", f"unexpected character {c!r}", pos)])
    tokens.append(Token("eof", "", SourcePos(line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, message: str) -> ParseError:
        return ParseError([Diagnostic("syntax", message, self.cur.pos)])

    def expect(self, text: str) -> Token:
        if self.cur.text != text or self.cur.kind == "eof":
            raise self.fail(f"expected {text!r}, found {self.cur.text or 'end of input'!r}")
        return self.advance()

    def at(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind != "eof"

    # program := function* expr
    def program(self) -> Program:
        functions: dict[str, FunctionDecl] = {}
        diags: list[Diagnostic] = []
        while self.at("def"):
            f = self.function()
            if f.name in functions:
                diags.append(Diagnostic(
                    "duplicate-function", f"function {f.name!r} is declared twice", f.pos))
            functions[f.name] = f
        if self.cur.kind == "eof":
            raise ParseError(diags + [Diagnostic("missing-main", "a main expression is required",
                                                 self.cur.pos)])
        main = self.expr()
        if self.cur.kind != "eof":
            raise ParseError(diags + [Diagnostic(
                "syntax", f"unexpected {self.cur.text!r} after main expression", self.cur.pos)])
        program = Program(functions, main)
        diags.extend(validate(program))
        if diags:
            raise ParseError(diags)
        number_call_sites(program)
        return program

    def function(self) -> FunctionDecl:
        pos = self.expect("def").pos
        name_tok = self.advance()
        if name_tok.kind != "ident":
            raise ParseError([Diagnostic("syntax", "expected function name", name_tok.pos)])
        self.expect("(")
        params: list[str] = []
        if not self.at(")"):
            while True:
                p = self.advance()
                if p.kind != "ident":
                    raise ParseError([Diagnostic("syntax", "expected parameter name", p.pos)])
                params.append(p.text)
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect(")")
        self.expect("{")
        body = self.expr()
        self.expect("}")
        return FunctionDecl(name_tok.text, params, body, pos=pos)

    def expr(self) -> Expr:
        return self.binary(0)

    _LEVELS = [["||"], ["&&"], ["==", "!="], ["<", "<=", ">", ">="],
               ["+", "-"], ["*", "/", "%"]]

    def binary(self, level: int) -> Expr:
        if level == len(self._LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = self._LEVELS[level]
        while self.cur.kind == "punct" and self.cur.text in ops:
            op = self.advance()
            right = self.binary(level + 1)
            left = Call(op.text, [left, right], pos=op.pos)
        return left

    def unary(self) -> Expr:
        if self.cur.kind == "punct" and self.cur.text in ("-", "!"):
            op = self.advance()
            operand = self.unary()
            if op.text == "-" and isinstance(operand, Lit) and isinstance(operand.value, float):
                return Lit(-operand.value, pos=op.pos)
            return Call(op.text, [operand], pos=op.pos)
        return self.primary()

    def args_until(self, closing: str) -> list[Expr]:
        out: list[Expr] = []
        if not self.at(closing):
            while True:
                out.append(self.expr())
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect(closing)
        return out

    def primary(self) -> Expr:
        t = self.cur
        if t.kind == "number":
            self.advance()
            return Lit(t.value, pos=t.pos)
        if t.kind == "string":
            self.advance()
            return Lit(t.value, pos=t.pos)
        if t.text == "infinity":
            self.advance()
            return Lit(float("inf"), pos=t.pos)
        if t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.text == "[":
            self.advance()
            return TupleLit(self.args_until("]"), pos=t.pos)
        if t.text == "if":
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.expect("{")
            then_branch = self.expr()
            self.expect("}")
            self.expect("{")
            else_branch = self.expr()
            self.expect("}")
            return If(cond, then_branch, else_branch, pos=t.pos)
        if t.text in ("nbr", "nbrLocal", "nbrRemote"):
            self.advance()
            scope = {"nbr": Scope.ALL, "nbrLocal": Scope.LOCAL,
                     "nbrRemote": Scope.REMOTE}[t.text]
            self.expect("{")
            body = self.expr()
            self.expect("}")
            return Nbr(scope, body, pos=t.pos)
        if t.text == "rep":
            return self.rep()
        if t.text == "let":
            self.advance()
            name = self.advance()
            if name.kind != "ident":
                raise ParseError([Diagnostic("syntax", "expected name after let", name.pos)])
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            body = self.expr()
            return Let(name.text, bound, body, pos=t.pos)
        if t.kind == "constructor":
            self.advance()
            if self.at("("):
                self.advance()
                return Call(t.text, self.args_until(")"), pos=t.pos)
            if t.text == "True":
                return Lit(True, pos=t.pos)
            if t.text == "False":
                return Lit(False, pos=t.pos)
            if t.text == "Null":
                return Lit(None, pos=t.pos)
            return Lit(Constructor(t.text), pos=t.pos)
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                self.advance()
                return Call(t.text, self.args_until(")"), pos=t.pos)
            return Var(t.text, pos=t.pos)
        raise self.fail(f"expected an expression, found {t.text or 'end of input'!r}")

    def rep(self) -> Expr:
        t = self.expect("rep")
        self.expect("(")
        inits = self.args_until(")")
        self.expect("{")
        self.expect("(")
        params: list[str] = []
        if not self.at(")"):
            while True:
                p = self.advance()
                if p.kind != "ident":
                    raise ParseError([Diagnostic("syntax", "expected rep parameter name", p.pos)])
                params.append(p.text)
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect(")")
        self.expect("=>")
        bodies = self.args_until("}")
        return Rep(inits, params, bodies, pos=t.pos)


def validate(program: Program) -> list[Diagnostic]:
    """Structural checks: rep arity, parameter uniqueness, user-call arity."""
    diags: list[Diagnostic] = []
    for f in program.functions.values():
        if len(set(f.params)) != len(f.params):
            diags.append(Diagnostic(
                "duplicate-parameter",
                f"function {f.name!r} repeats a parameter name", f.pos))
    for e in [x for root in program.children() for x in walk(root)]:
        if isinstance(e, Rep):
            if not (len(e.inits) == len(e.params) == len(e.bodies)):
                diags.append(Diagnostic(
                    "arity-mismatch",
                    f"rep has {len(e.inits)} inits, {len(e.params)} params, "
                    f"{len(e.bodies)} bodies", e.pos))
            if len(set(e.params)) != len(e.params):
                diags.append(Diagnostic(
                    "duplicate-parameter", "rep repeats a parameter name", e.pos))
        elif isinstance(e, Call) and e.fname in program.functions:
            want = len(program.functions[e.fname].params)
            if len(e.args) != want:
                diags.append(Diagnostic(
                    "arity-mismatch",
                    f"{e.fname!r} takes {want} argument(s), got {len(e.args)}", e.pos))
    return diags


def parse(source: str) -> Program:
    """Parse and validate `.fc` text; raises ParseError with diagnostics."""
    return _Parser(tokenize(source)).program()


def try_parse(source: str) -> tuple[Optional[Program], list[Diagnostic]]:
    try:
        return parse(source), []
    except ParseError as err:
        return None, err.diagnostics
