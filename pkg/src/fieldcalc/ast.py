"""Abstract syntax of the surface language.

Structural equality ignores source positions and call-site numbers, so a
pretty-printed round trip compares equal to the original parse.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .errors import SourcePos
from .values import LocalValue


class Scope(enum.Enum):
    """Which neighbours an nbr construct talks to."""

    ALL = "nbr"
    LOCAL = "nbrLocal"
    REMOTE = "nbrRemote"


@dataclass(eq=True)
class Expr:
    pos: Optional[SourcePos] = field(default=None, compare=False, kw_only=True)


@dataclass(eq=True)
class Var(Expr):
    name: str = ""


@dataclass(eq=True)
class Lit(Expr):
    value: LocalValue = None


@dataclass(eq=True)
class Call(Expr):
    fname: str = ""
    args: list[Expr] = field(default_factory=list)
    # Stable per-program call-site index, assigned by number_call_sites();
    # user-function alignment keys on (fname, site).
    site: int = field(default=-1, compare=False)


@dataclass(eq=True)
class If(Expr):
    cond: Expr = None
    then_branch: Expr = None
    else_branch: Expr = None


@dataclass(eq=True)
class Nbr(Expr):
    scope: Scope = Scope.ALL
    body: Expr = None


@dataclass(eq=True)
class Rep(Expr):
    inits: list[Expr] = field(default_factory=list)
    params: list[str] = field(default_factory=list)
    bodies: list[Expr] = field(default_factory=list)

    def is_single(self) -> bool:
        return len(self.inits) == 1


@dataclass(eq=True)
class Let(Expr):
    name: str = ""
    bound: Expr = None
    body: Expr = None


@dataclass(eq=True)
class TupleLit(Expr):
    elems: list[Expr] = field(default_factory=list)


@dataclass(eq=True)
class FunctionDecl:
    name: str
    params: list[str]
    body: Expr
    pos: Optional[SourcePos] = field(default=None, compare=False)


@dataclass(eq=True)
class Program:
    functions: dict[str, FunctionDecl]
    main: Expr

    def children(self) -> list[Expr]:
        return [f.body for f in self.functions.values()] + [self.main]


def child_exprs(e: Expr) -> list[Expr]:
    if isinstance(e, Call):
        return list(e.args)
    if isinstance(e, If):
        return [e.cond, e.then_branch, e.else_branch]
    if isinstance(e, Nbr):
        return [e.body]
    if isinstance(e, Rep):
        return list(e.inits) + list(e.bodies)
    if isinstance(e, Let):
        return [e.bound, e.body]
    if isinstance(e, TupleLit):
        return list(e.elems)
    return []


def walk(e: Expr):
    yield e
    for c in child_exprs(e):
        yield from walk(c)


def free_vars(e: Expr, bound: frozenset[str] = frozenset()) -> list[str]:
    """Free variables in first-occurrence order."""
    out: list[str] = []
    seen: set[str] = set()

    def go(node: Expr, env: frozenset[str]):
        if isinstance(node, Var):
            if node.name not in env and node.name not in seen:
                seen.add(node.name)
                out.append(node.name)
        elif isinstance(node, Let):
            go(node.bound, env)
            go(node.body, env | {node.name})
        elif isinstance(node, Rep):
            for i in node.inits:
                go(i, env)
            inner = env | set(node.params)
            for b in node.bodies:
                go(b, inner)
        else:
            for c in child_exprs(node):
                go(c, env)

    go(e, bound)
    return out


def number_call_sites(program: Program) -> None:
    """Assign deterministic call-site indices in declaration/traversal order."""
    counter = 0

    def go(e: Expr):
        nonlocal counter
        if isinstance(e, Call):
            e.site = counter
            counter += 1
        for c in child_exprs(e):
            go(c)

    for f in program.functions.values():
        go(f.body)
    go(program.main)


def substitute_free(e: Expr, bindings: dict[str, LocalValue]) -> Expr:
    """Replace free variables and nullary constructor literals from a
    constants table, respecting binders. Returns a new expression."""
    from .values import Constructor

    def go(node: Expr, env: frozenset[str]) -> Expr:
        if isinstance(node, Var):
            if node.name in bindings and node.name not in env:
                return Lit(bindings[node.name], pos=node.pos)
            return node
        if isinstance(node, Lit):
            v = node.value
            if isinstance(v, Constructor) and not v.args and v.name in bindings:
                return Lit(bindings[v.name], pos=node.pos)
            return node
        if isinstance(node, Call):
            return Call(node.fname, [go(a, env) for a in node.args], pos=node.pos)
        if isinstance(node, If):
            return If(go(node.cond, env), go(node.then_branch, env),
                      go(node.else_branch, env), pos=node.pos)
        if isinstance(node, Nbr):
            return Nbr(node.scope, go(node.body, env), pos=node.pos)
        if isinstance(node, Rep):
            inner = env | set(node.params)
            return Rep([go(i, env) for i in node.inits], list(node.params),
                       [go(b, inner) for b in node.bodies], pos=node.pos)
        if isinstance(node, Let):
            return Let(node.name, go(node.bound, env),
                       go(node.body, env | {node.name}), pos=node.pos)
        if isinstance(node, TupleLit):
            return TupleLit([go(x, env) for x in node.elems], pos=node.pos)
        return node

    return go(e, frozenset())


def resolve_constants(program: Program, constants: dict[str, LocalValue]) -> Program:
    """Bind scenario constants into a parsed program (before desugaring)."""
    if not constants:
        return program
    funcs = {}
    for name, f in program.functions.items():
        body = substitute_free(f.body, {k: v for k, v in constants.items()
                                        if k not in f.params})
        funcs[name] = FunctionDecl(f.name, list(f.params), body, pos=f.pos)
    return Program(funcs, substitute_free(program.main, constants))
