"""Parsing: grammar coverage, diagnostics, positions."""

import math

from fieldcalc.ast import Call, Let, Lit, Nbr, Rep, Scope, TupleLit, Var, walk
from fieldcalc.parser import parse, try_parse
from fieldcalc.values import Constructor

HOPCOUNT = """
def hopcount(source) {
  rep (infinity) { (c) => mux(source, 0, minHood(nbr{c+1})) }
}
hopcount(source())
"""


def kinds(diags):
    return {d.kind for d in diags}


class TestBasics:
    def test_identity_function(self):
        p = parse("def id(x){x} id(3)")
        assert list(p.functions) == ["id"]
        assert p.main == Call("id", [Lit(3.0)])

    def test_hopcount_listing_shape(self):
        p = parse(HOPCOUNT)
        body = p.functions["hopcount"].body
        assert isinstance(body, Rep)
        assert body.inits == [Lit(math.inf)]
        mux = body.bodies[0]
        assert isinstance(mux, Call) and mux.fname == "mux"
        min_hood = mux.args[2]
        assert isinstance(min_hood, Call) and min_hood.fname == "minHood"
        assert isinstance(min_hood.args[0], Nbr)
        assert min_hood.args[0].scope is Scope.ALL

    def test_scope_keywords(self):
        p = parse("nbrLocal{1} == nbrRemote{2} == nbr{3}")
        scopes = [e.scope for e in walk(p.main) if isinstance(e, Nbr)]
        assert scopes == [Scope.LOCAL, Scope.REMOTE, Scope.ALL]

    def test_let_tuple_and_multirep(self):
        p = parse("let x = [1, 2] in rep (0, 1) { (a, b) => b, a }")
        assert isinstance(p.main, Let)
        assert isinstance(p.main.bound, TupleLit)
        rep = p.main.body
        assert isinstance(rep, Rep) and len(rep.inits) == 2

    def test_comments_and_strings(self):
        p = parse('// a comment\n"he\\"llo" // trailing')
        assert p.main == Lit('he"llo')

    def test_constructors(self):
        p = parse("Pair(True, 5)")
        assert p.main == Call("Pair", [Lit(True), Lit(5.0)])
        assert parse("HIGH").main == Lit(Constructor("HIGH"))
        assert parse("Null").main == Lit(None)

    def test_ordinal_projections_lex_as_identifiers(self):
        p = parse("2nd(minHood(nbr{[count, oldval]}))")
        assert p.main.fname == "2nd"

    def test_negative_literals_fold(self):
        assert parse("-60").main == Lit(-60.0)
        assert parse("-infinity").main == Lit(-math.inf)
        # but negation of a variable stays a call
        assert parse("-x").main == Call("-", [Var("x")])


class TestPrecedence:
    def test_mul_binds_tighter_than_add(self):
        assert parse("1 + 2 * 3").main == Call(
            "+", [Lit(1.0), Call("*", [Lit(2.0), Lit(3.0)])])

    def test_left_associativity(self):
        assert parse("1 - 2 - 3").main == Call(
            "-", [Call("-", [Lit(1.0), Lit(2.0)]), Lit(3.0)])

    def test_logic_is_loosest(self):
        p = parse("-60 < a() && a() < 60 || b()").main
        assert p.fname == "||"
        assert p.args[0].fname == "&&"

    def test_unary_tighter_than_multiplicative(self):
        assert parse("-x % 2").main == Call(
            "%", [Call("-", [Var("x")]), Lit(2.0)])

    def test_parenthesized_grouping(self):
        assert parse("(1 + 2) * 3").main == Call(
            "*", [Call("+", [Lit(1.0), Lit(2.0)]), Lit(3.0)])


class TestDiagnostics:
    def test_rep_arity_mismatch(self):
        prog, diags = try_parse("rep (0, 1) { (x) => x }")
        assert prog is None
        assert "arity-mismatch" in kinds(diags)

    def test_duplicate_function(self):
        _, diags = try_parse("def f(x){x} def f(y){y} f(1)")
        assert "duplicate-function" in kinds(diags)

    def test_user_call_arity(self):
        _, diags = try_parse("def f(x, y){x} f(1)")
        assert "arity-mismatch" in kinds(diags)

    def test_missing_main(self):
        _, diags = try_parse("def f(x){x}")
        assert "missing-main" in kinds(diags)

    def test_syntax_error_has_position(self):
        _, diags = try_parse("def f(x){x}\n1 +")
        assert diags[0].kind == "syntax"
        assert diags[0].pos.line == 2

    def test_lexical_error(self):
        _, diags = try_parse("1 ยง 2")
        assert diags[0].kind == "lexical"

    def test_duplicate_parameter(self):
        _, diags = try_parse("def f(x, x){x} f(1, 2)")
        assert "duplicate-parameter" in kinds(diags)

    def test_unterminated_string(self):
        _, diags = try_parse('"abc')
        assert diags[0].kind == "lexical"

    def test_trailing_tokens(self):
        _, diags = try_parse("1 2")
        assert diags[0].kind == "syntax"


def test_every_node_carries_a_position_within_bounds():
    from fieldcalc.corpus import corpus_dir, list_entries

    sources = [HOPCOUNT]
    sources += [(corpus_dir() / f"{n}.fc").read_text() for n in list_entries()]
    for src in sources:
        p = parse(src)
        lines = src.count("\n") + 1
        for root in p.children():
            for node in walk(root):
                assert node.pos is not None
                assert 1 <= node.pos.line <= lines
                assert node.pos.column >= 1


def test_positions_nondecreasing_along_token_stream():
    from fieldcalc.parser import tokenize

    toks = tokenize(HOPCOUNT)
    keys = [(t.pos.line, t.pos.column) for t in toks]
    assert keys == sorted(keys)
