"""Lowering to core form: the three rewrites and their determinism."""

from fieldcalc.ast import Call, Lit, Rep, Var
from fieldcalc.desugar import desugar, is_core, ordinal_name
from fieldcalc.parser import parse


def test_let_becomes_fresh_function():
    core = desugar(parse("let x = 1 in x + 2"))
    assert core.main == Call("_let0", [Lit(1.0)])
    f = core.functions["_let0"]
    assert f.params == ["x"]
    assert f.body == Call("+", [Var("x"), Lit(2.0)])


def test_let_captures_free_variables_in_order():
    core = desugar(parse("def g(a, b){ let x = a in b + x + a } g(1, 2)"))
    f = core.functions["_let0"]
    assert f.params == ["x", "b", "a"]
    call = core.functions["g"].body
    assert call == Call("_let0", [Var("a"), Var("b"), Var("a")])


def test_tuple_literal_becomes_tuple_call():
    core = desugar(parse("[1, 2]"))
    assert core.main == Call("Tuple", [Lit(1.0), Lit(2.0)])


def test_multi_rep_becomes_single_rep_with_projections():
    core = desugar(parse("rep (0, 1) { (a, b) => b, a }"))
    rep = core.main
    assert isinstance(rep, Rep) and rep.is_single()
    assert rep.inits[0] == Call("Tuple", [Lit(0.0), Lit(1.0)])
    # the body is a chain of generated let-functions binding a = 1st(t), b = 2nd(t)
    assert rep.params == ["_rep0"]
    body = rep.bodies[0]
    assert isinstance(body, Call) and body.fname.startswith("_let")
    first_proj = body.args[0]
    assert first_proj == Call("1st", [Var("_rep0")])
    inner = core.functions[body.fname].body
    assert inner.args[0] == Call("2nd", [Var("_rep0")])
    leaf = core.functions[inner.fname].body
    assert leaf == Call("Tuple", [Var("b"), Var("a")])


def test_idempotent_and_deterministic():
    src = """
    def f(v) { let y = v + 1 in rep (0, y) { (a, b) => [a, b], a } }
    f(let z = 2 in z)
    """
    once = desugar(parse(src))
    assert is_core(once)
    assert desugar(once) == once
    assert desugar(parse(src)) == once


def test_fresh_names_avoid_collisions():
    core = desugar(parse("def _let0(q){q} let x = 1 in _let0(x)"))
    assert "_let0" in core.functions and "_let1" in core.functions
    assert core.main.fname == "_let1"


def test_ordinal_names():
    assert [ordinal_name(k) for k in (1, 2, 3, 4, 11, 12, 13, 21, 22, 103)] == [
        "1st", "2nd", "3rd", "4th", "11th", "12th", "13th", "21st", "22nd", "103rd"]


def test_core_form_has_no_sugar():
    src = "def f(x){ let a = x in [a, rep (0,0) {(p,q) => q, p}] } f(1)"
    core = desugar(parse(src))
    assert is_core(core)
