"""Per-round operational semantics.

``eval_round`` evaluates a core-form program at one device against sensors,
previous state and neighbour exports, producing the export to broadcast.
The export tree mirrors every evaluated sub-expression; untaken if-branches
contribute nothing.

Alignment is positional: while evaluating, a cursor into each neighbour's
export (and into the device's own previous export) descends the same path
steps as the evaluation, so an nbr gather simply reads the surviving
cursors and a rep reads its previous node. This is equivalent to
``vt_lookup`` over materialized paths and avoids building them.

Broadcast refresh: after evaluation, the tree's values are recomputed with
every rep variable rebound to the rep's just-computed state (branch
structure frozen, gathers keep their neighbour entries, the self entry is
updated). Rep state still advances exactly once per round; the refresh only
makes the *broadcast* carry this round's states, which is what lets
gradient-style programs propagate one hop per round.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .ast import Call, Expr, If, Lit, Nbr, Program, Rep, Scope, Var
from .builtins import (
    BuiltinError, FOLD_NAMES, apply_lifted, hood_fold, lookup_pure,
    make_constructor, nbr_vector,
)
from .desugar import is_core
from .errors import FcError, FcRuntimeError
from .values import DeviceId, LocalValue, NeighbouringValue, Value
from .vtree import ABSENT, ValueTree, frame_step, vt_lookup

_MIN_RECURSION_LIMIT = 120_000


@dataclass(frozen=True)
class RoundContext:
    """Everything one device perceives at the start of a round."""

    self_id: int
    time: float
    sensors: Mapping[str, Value]
    neighbour_exports: Mapping[int, tuple[ValueTree, float]] = field(default_factory=dict)
    previous_self_export: Optional[ValueTree] = None
    location_of: Mapping[int, str] = field(default_factory=dict)
    position_of: Mapping[int, tuple[float, float]] = field(default_factory=dict)
    constants: Mapping[str, LocalValue] = field(default_factory=dict)

    def __post_init__(self):
        if self.self_id in self.neighbour_exports:
            raise FcError("neighbour exports must not contain the device itself")


@dataclass(frozen=True)
class Export:
    """The round's result: the full tree and its root value."""

    tree: ValueTree
    root_value: Value


def rep_prev(ctx: RoundContext, path: tuple):
    """Previous value recorded at a rep site, or ABSENT on the first round
    (or when the site was not visited last round)."""
    return vt_lookup(ctx.previous_self_export, path)


def gather_nbr(ctx: RoundContext, path: tuple, scope: Scope, own: Value) -> NeighbouringValue:
    """The neighbouring value at an nbr site whose body lives at ``path``.

    Entries come from neighbour exports containing the exact same path
    (same branches, same call frames); the scope filters by location.
    """
    entries = {ctx.self_id: own}
    self_loc = ctx.location_of.get(ctx.self_id)
    for d in sorted(ctx.neighbour_exports):
        tree, _receipt = ctx.neighbour_exports[d]
        v = vt_lookup(tree, path)
        if v is ABSENT:
            continue
        if scope is Scope.LOCAL and ctx.location_of.get(d) != self_loc:
            continue
        if scope is Scope.REMOTE and ctx.location_of.get(d) == self_loc:
            continue
        entries[d] = v
    return NeighbouringValue(ctx.self_id, entries)


def _materialize(pl) -> tuple:
    steps = []
    while pl is not None:
        pl, step = pl
        steps.append(step)
    steps.reverse()
    return tuple(steps)


def _annotate(program: Program) -> None:
    """Mark each node with whether its subtree can reach an nbr or rep site
    (through user-function calls, recursion included). The evaluator only
    threads neighbour cursors into nbr-reaching subtrees and the previous
    export into rep-reaching ones; everything else aligns trivially."""
    from .ast import child_exprs

    fn_nbr = {name: False for name in program.functions}
    fn_rep = dict(fn_nbr)

    def scan(e) -> tuple[bool, bool]:
        nbr = isinstance(e, Nbr)
        rep = isinstance(e, Rep)
        if isinstance(e, Call) and e.fname in fn_nbr:
            nbr = nbr or fn_nbr[e.fname]
            rep = rep or fn_rep[e.fname]
        for c in child_exprs(e):
            cn, cr = scan(c)
            nbr = nbr or cn
            rep = rep or cr
        return nbr, rep

    changed = True
    while changed:
        changed = False
        for name, f in program.functions.items():
            nbr, rep = scan(f.body)
            if nbr != fn_nbr[name] or rep != fn_rep[name]:
                fn_nbr[name], fn_rep[name] = nbr, rep
                changed = True

    def mark(e) -> tuple[bool, bool]:
        nbr = isinstance(e, Nbr)
        rep = isinstance(e, Rep)
        if isinstance(e, Call):
            e._frame = frame_step(e.fname, e.site)
            if e.fname in fn_nbr:
                nbr = nbr or fn_nbr[e.fname]
                rep = rep or fn_rep[e.fname]
        for c in child_exprs(e):
            cn, cr = mark(c)
            nbr = nbr or cn
            rep = rep or cr
        e._needs_cursors = nbr
        e._needs_prev = rep
        return nbr, rep

    for f in program.functions.values():
        mark(f.body)
    mark(program.main)
    program._annotated = True


class _Evaluator:
    __slots__ = ("program", "ctx", "self_id", "self_loc", "consts", "sensors")

    def __init__(self, program: Program, ctx: RoundContext):
        self.program = program
        self.ctx = ctx
        self.self_id = ctx.self_id
        self.self_loc = ctx.location_of.get(ctx.self_id)
        self.consts = ctx.constants
        self.sensors = ctx.sensors

    # ------------------------------------------------------------------
    # Evaluation pass

    def run(self) -> Export:
        if not getattr(self.program, "_annotated", False):
            _annotate(self.program)
        cursors = []
        if self.program.main._needs_cursors:
            for d in sorted(self.ctx.neighbour_exports):
                tree, _ = self.ctx.neighbour_exports[d]
                cursors.append((d, tree))
        prev = self.ctx.previous_self_export if self.program.main._needs_prev else None
        value, tree = self._eval(self.program.main, {}, cursors, prev, None)
        if _has_rep(self.program):
            self._refresh(self.program.main, {}, tree)
        return Export(tree, tree.value)

    def _sub(self, e: Expr, env, cursors, prev, pl, step):
        """Evaluate a child at ``step``, threading cursors and the previous
        export only where the subtree can use them."""
        return self._eval(
            e, env,
            _desc(cursors, step) if (cursors and e._needs_cursors) else (),
            _descp(prev, step) if (prev is not None and e._needs_prev) else None,
            (pl, step))

    def _eval(self, e: Expr, env, cursors, prev, pl):
        t = type(e)
        if t is Lit:
            leaf = e.__dict__.get("_leaf")
            if leaf is None:
                leaf = e._leaf = ValueTree(e.value)
            return e.value, leaf
        if t is Var:
            name = e.name
            if name in env:
                v = env[name]
            elif name in self.consts:
                v = self.consts[name]
            else:
                raise FcRuntimeError("unbound-variable",
                                     f"variable {name!r} is not bound", _materialize(pl))
            return v, ValueTree(v)
        if t is Call:
            return self._call(e, env, cursors, prev, pl)
        if t is If:
            cv, ct = self._sub(e.cond, env, cursors, prev, pl, 0)
            if not isinstance(cv, bool):
                raise FcRuntimeError("type-error", "if condition must be a local boolean",
                                     _materialize(pl))
            tag = "T" if cv else "E"
            branch = e.then_branch if cv else e.else_branch
            bv, bt = self._sub(branch, env, cursors, prev, pl, tag)
            return bv, ValueTree(bv, {0: ct, tag: bt})
        if t is Nbr:
            bv, bt = self._sub(e.body, env, cursors, prev, pl, 0)
            if isinstance(bv, NeighbouringValue):
                raise FcRuntimeError("type-error", "nbr body must evaluate to a local value",
                                     _materialize(pl))
            entries = {self.self_id: bv}
            scope = e.scope
            if scope is Scope.ALL:
                for d, node in _desc(cursors, 0):
                    entries[d] = node.value
            else:
                loc = self.ctx.location_of
                for d, node in _desc(cursors, 0):
                    if (loc.get(d) == self.self_loc) != (scope is Scope.LOCAL):
                        continue
                    entries[d] = node.value
            phi = NeighbouringValue(self.self_id, entries)
            return phi, ValueTree(phi, {0: bt})
        if t is Rep:
            kids = {}
            if prev is not None:
                x = prev.value
            else:
                x, it = self._sub(e.inits[0], env, cursors, None, pl, 0)
                kids[0] = it
            env2 = dict(env)
            env2[e.params[0]] = x
            bv, bt = self._sub(e.bodies[0], env2, cursors, prev, pl, 1)
            kids[1] = bt
            return bv, ValueTree(bv, kids)
        raise FcRuntimeError("internal", f"non-core expression {type(e).__name__}",
                             _materialize(pl))

    def _call(self, e: Call, env, cursors, prev, pl):
        vals = []
        kids = {}
        for i, a in enumerate(e.args):
            v, tr = self._sub(a, env, cursors, prev, pl, i)
            vals.append(v)
            kids[i] = tr
        impl = e.__dict__.get("_impl")
        if impl is None:
            impl = e._impl = self._resolve(e)
        tag = impl[0]
        if tag == "user":
            decl = impl[1]
            fr = e._frame
            env2 = dict(zip(decl.params, vals))
            bv, bt = self._sub(decl.body, env2, cursors, prev, pl, fr)
            kids[fr] = bt
            return bv, ValueTree(bv, kids)
        try:
            if tag == "pure":
                v = apply_lifted(impl[1], vals, self.self_id)
            elif tag == "fold":
                v = hood_fold(impl[1], impl[2], vals[0])
            elif tag == "ctor":
                v = apply_lifted(impl[1], vals, self.self_id)
            else:
                v = self._dynamic(e.fname, vals)
        except BuiltinError as err:
            raise FcRuntimeError(err.kind, str(err), _materialize(pl)) from None
        return v, ValueTree(v, kids)

    def _resolve(self, e: Call):
        decl = self.program.functions.get(e.fname)
        if decl is not None:
            return ("user", decl)
        fold = FOLD_NAMES.get(e.fname)
        if fold is not None:
            if len(e.args) != 1:
                return ("dyn",)  # surfaces an arity error at application
            return ("fold", fold[0], fold[1])
        if e.fname[0].isupper():
            return ("ctor", make_constructor(e.fname))
        try:
            pure = lookup_pure(e.fname, len(e.args))
        except BuiltinError:
            return ("dyn",)
        if pure is not None:
            return ("pure", pure)
        return ("dyn",)

    def _dynamic(self, fname: str, vals: list[Value]) -> Value:
        if fname in FOLD_NAMES:
            raise BuiltinError("arity", f"{fname!r} takes 1 argument, got {len(vals)}")
        if fname == "myID":
            if vals:
                raise BuiltinError("arity", "myID takes no arguments")
            return DeviceId(self.self_id)
        if fname == "nbrVector":
            if vals:
                raise BuiltinError("arity", "nbrVector takes no arguments")
            return nbr_vector(self.self_id, self.ctx.position_of)
        lookup_pure(fname, len(vals))  # surfaces arity complaints
        if fname in self.sensors:
            if vals:
                raise BuiltinError("arity", f"sensor {fname!r} takes no arguments")
            return self.sensors[fname]
        if vals:
            raise BuiltinError("unknown-function", f"unknown function {fname!r}")
        raise BuiltinError("unknown-sensor", f"unknown sensor or function {fname!r}")

    # ------------------------------------------------------------------
    # Broadcast refresh pass

    def _refresh(self, e: Expr, env, node: ValueTree) -> Value:
        t = type(e)
        if t is Lit:
            return node.value
        if t is Var:
            name = e.name
            if name in env:
                node.value = env[name]
            elif name in self.consts:
                node.value = self.consts[name]
            return node.value
        if t is Call:
            return self._refresh_call(e, env, node)
        if t is If:
            self._refresh(e.cond, env, node.kids[0])
            tag = "T" if "T" in node.kids else "E"
            branch = e.then_branch if tag == "T" else e.else_branch
            node.value = self._refresh(branch, env, node.kids[tag])
            return node.value
        if t is Nbr:
            bv = self._refresh(e.body, env, node.kids[0])
            entries = dict(node.value.entries)
            entries[self.self_id] = bv
            node.value = NeighbouringValue(self.self_id, entries)
            return node.value
        if t is Rep:
            # The node keeps its once-stepped state; nbr sites in the body
            # are refreshed with the variable bound to that new state.
            if 0 in node.kids:
                self._refresh(e.inits[0], env, node.kids[0])
            env2 = dict(env)
            env2[e.params[0]] = node.value
            self._refresh(e.bodies[0], env2, node.kids[1])
            return node.value
        return node.value

    def _refresh_call(self, e: Call, env, node: ValueTree) -> Value:
        vals = [self._refresh(a, env, node.kids[i]) for i, a in enumerate(e.args)]
        impl = e.__dict__.get("_impl")
        if impl is None:
            impl = e._impl = self._resolve(e)
        if impl[0] == "user":
            decl = impl[1]
            node.value = self._refresh(decl.body, dict(zip(decl.params, vals)),
                                       node.kids[e._frame])
            return node.value
        if not vals:
            return node.value  # sensors, myID, nbrVector: unchanged within the round
        try:
            if impl[0] == "fold":
                node.value = hood_fold(impl[1], impl[2], vals[0])
            else:
                node.value = apply_lifted(impl[1], vals, self.self_id)
        except BuiltinError as err:
            raise FcRuntimeError(err.kind, str(err), ()) from None
        return node.value


def _desc(cursors, step):
    out = []
    for d, node in cursors:
        k = node.kids.get(step)
        if k is not None:
            out.append((d, k))
    return out


def _descp(prev: Optional[ValueTree], step):
    return prev.kids.get(step) if prev is not None else None


def _has_rep(program: Program) -> bool:
    cached = getattr(program, "_has_rep", None)
    if cached is None:
        from .ast import walk

        cached = any(isinstance(n, Rep)
                     for root in program.children() for n in walk(root))
        program._has_rep = cached
    return cached


def eval_round(program: Program, ctx: RoundContext) -> Export:
    """Evaluate one round. Deterministic in (program, ctx); raises
    FcRuntimeError with the failing path on a runtime error."""
    core = getattr(program, "_is_core", None)
    if core is None:
        core = is_core(program)
        program._is_core = core
    if not core:
        raise FcError("eval_round requires a core-form (desugared) program")
    if sys.getrecursionlimit() < _MIN_RECURSION_LIMIT:
        sys.setrecursionlimit(_MIN_RECURSION_LIMIT)
    return _Evaluator(program, ctx).run()
