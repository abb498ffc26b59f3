"""Pretty-printer. Output reparses to a structurally identical program."""

from __future__ import annotations

import math

from .ast import Call, Expr, If, Let, Lit, Nbr, Program, Rep, TupleLit, Var
from .errors import FcError
from .values import Constructor, DeviceId

# Binding strength; higher binds tighter. Binary operators are left
# associative, so a right child at equal precedence needs parentheses.
_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7

_BINARY = set(_PREC)


def pretty_print(program: Program) -> str:
    parts = []
    for f in program.functions.values():
        parts.append(f"def {f.name}({', '.join(f.params)}) {{\n  {pp_expr(f.body)}\n}}")
    parts.append(pp_expr(program.main))
    return "\n".join(parts) + "\n"


def pp_expr(e: Expr, context_prec: int = 0) -> str:
    text, prec = _render(e)
    if prec < context_prec:
        return f"({text})"
    return text


def _render(e: Expr) -> tuple[str, int]:
    atom = 100
    if isinstance(e, Var):
        return e.name, atom
    if isinstance(e, Lit):
        return _literal(e.value), atom
    if isinstance(e, Call):
        if e.fname in _BINARY and len(e.args) == 2:
            p = _PREC[e.fname]
            left = pp_expr(e.args[0], p)
            right = pp_expr(e.args[1], p + 1)
            return f"{left} {e.fname} {right}", p
        if e.fname in ("-", "!") and len(e.args) == 1:
            return f"{e.fname}{pp_expr(e.args[0], _UNARY_PREC)}", _UNARY_PREC
        return f"{e.fname}({', '.join(pp_expr(a) for a in e.args)})", atom
    if isinstance(e, If):
        return (f"if ({pp_expr(e.cond)}) {{{pp_expr(e.then_branch)}}} "
                f"{{{pp_expr(e.else_branch)}}}"), atom
    if isinstance(e, Nbr):
        return f"{e.scope.value}{{{pp_expr(e.body)}}}", atom
    if isinstance(e, Rep):
        inits = ", ".join(pp_expr(i) for i in e.inits)
        bodies = ", ".join(pp_expr(b) for b in e.bodies)
        return f"rep ({inits}) {{ ({', '.join(e.params)}) => {bodies} }}", atom
    if isinstance(e, Let):
        return f"let {e.name} = {pp_expr(e.bound)} in {pp_expr(e.body)}", 0
    if isinstance(e, TupleLit):
        return "[" + ", ".join(pp_expr(x) for x in e.elems) + "]", atom
    raise FcError(f"cannot print {e!r}")


def _literal(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, float):
        if math.isinf(v):
            return "infinity" if v > 0 else "-infinity"
        if v.is_integer() and abs(v) < 2**53:
            return str(int(v)) if v >= 0 else f"-{int(-v)}"
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if v is None:
        return "Null"
    if isinstance(v, Constructor):
        if v.args:
            return v.name + "(" + ", ".join(_literal(a) for a in v.args) + ")"
        return v.name
    if isinstance(v, DeviceId):
        raise FcError("device ids have no literal syntax")
    raise FcError(f"no literal syntax for {v!r}")
