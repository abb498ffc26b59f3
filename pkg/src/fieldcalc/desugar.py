"""Lowering to core form: no Let, no TupleLit, no multi-valued Rep.

Tuple literals become ``Tuple(...)`` calls. A multi-valued rep becomes a
single rep over a tuple whose body rebinds each name to an ordinal
projection. A ``let`` becomes a call to a deterministically fresh function
whose parameters are the bound name followed by the free variables of the
body, so alignment still distinguishes the body's sites per call position.
"""

from __future__ import annotations

from .ast import (
    Call, Expr, FunctionDecl, If, Let, Nbr, Program, Rep, TupleLit, Var,
    free_vars, number_call_sites,
)


def ordinal_name(k: int) -> str:
    """1 -> 1st, 2 -> 2nd, 3 -> 3rd, 4 -> 4th, 11 -> 11th, 22 -> 22nd."""
    if 10 <= k % 100 <= 13:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(k % 10, "th")
    return f"{k}{suffix}"


class _Fresh:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)

    def name(self, prefix: str) -> str:
        n = 0
        while f"{prefix}{n}" in self.taken:
            n += 1
        out = f"{prefix}{n}"
        self.taken.add(out)
        return out


def desugar(program: Program) -> Program:
    """Lower to core form; idempotent and deterministic."""
    fresh = _Fresh(set(program.functions))
    new_functions: dict[str, FunctionDecl] = {}

    def lower(e: Expr) -> Expr:
        if isinstance(e, TupleLit):
            return Call("Tuple", [lower(x) for x in e.elems], pos=e.pos)
        if isinstance(e, Rep) and not e.is_single():
            return lower(_expand_multi_rep(e, fresh))
        if isinstance(e, Rep):
            return Rep([lower(e.inits[0])], list(e.params), [lower(e.bodies[0])], pos=e.pos)
        if isinstance(e, Let):
            bound = lower(e.bound)
            body = lower(e.body)
            extras = [v for v in free_vars(body) if v != e.name]
            fname = fresh.name("_let")
            new_functions[fname] = FunctionDecl(fname, [e.name] + extras, body, pos=e.pos)
            return Call(fname, [bound] + [Var(v, pos=e.pos) for v in extras], pos=e.pos)
        if isinstance(e, Call):
            return Call(e.fname, [lower(a) for a in e.args], pos=e.pos)
        if isinstance(e, If):
            return If(lower(e.cond), lower(e.then_branch), lower(e.else_branch), pos=e.pos)
        if isinstance(e, Nbr):
            return Nbr(e.scope, lower(e.body), pos=e.pos)
        return e

    functions: dict[str, FunctionDecl] = {}
    for name, f in program.functions.items():
        functions[name] = FunctionDecl(name, list(f.params), lower(f.body), pos=f.pos)
    main = lower(program.main)
    functions.update(new_functions)
    out = Program(functions, main)
    number_call_sites(out)
    return out


def _expand_multi_rep(e: Rep, fresh: _Fresh) -> Expr:
    """rep (v1..vn) {(x1..xn) => e1..en} over a single tuple-valued rep."""
    t = fresh.name("_rep")
    body: Expr = TupleLit(list(e.bodies), pos=e.pos)
    for k in range(len(e.params), 0, -1):
        body = Let(e.params[k - 1],
                   Call(ordinal_name(k), [Var(t, pos=e.pos)], pos=e.pos),
                   body, pos=e.pos)
    return Rep([TupleLit(list(e.inits), pos=e.pos)], [t], [body], pos=e.pos)


def is_core(program: Program) -> bool:
    from .ast import walk

    for root in program.children():
        for node in walk(root):
            if isinstance(node, (Let, TupleLit)):
                return False
            if isinstance(node, Rep) and not node.is_single():
                return False
    return True
