import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smrlmt.catalog import catalog_files
from smrlmt.dsl import (
    CheckFailed,
    LexError,
    ParseError,
    SmrlError,
    check,
    check_all,
    diagnose,
    format_relation,
    load_relations,
    parse,
    parse_source,
    tokenize,
)
from smrlmt.dsl.ast import (
    Arith,
    BoolLit,
    Call,
    Compare,
    DataFn,
    ExprStmt,
    FieldAccess,
    ForLoop,
    IntLit,
    MetamorphicOp,
    RangeExpr,
    RelationAst,
    StringLit,
    VarDecl,
    VarRef,
)


def kinds(src):
    return [t.kind for t in tokenize(src)]


def test_tokenize_call_head():
    toks = tokenize("IMPLIES(")
    assert [(t.kind, t.value) for t in toks[:2]] == [("IDENT", "IMPLIES"), ("LPAREN", "(")]


def test_tokenize_loop_header():
    assert kinds("for (var a : Input(1).actions)")[:5] == ["FOR", "LPAREN", "VAR", "IDENT", "COLON"]


def test_unterminated_string():
    with pytest.raises(LexError) as e:
        tokenize('"x')
    assert (e.value.line, e.value.col) == (1, 1)


def test_comments_and_positions():
    toks = tokenize("// note\n/* block\n */ MR")
    assert toks[0].kind == "MR" and (toks[0].line, toks[0].col) == (3, 5)


def test_illegal_character():
    with pytest.raises(LexError) as e:
        tokenize("MR X { @ }")
    assert e.value.col == 8


def test_parse_minimal_relation():
    (rel,) = parse_source("package owasp; MR OTG_AUTHZ_002 { TRUE(); }")
    assert rel.qualified_name == "owasp.OTG_AUTHZ_002"
    assert rel.body == (ExprStmt(MetamorphicOp("TRUE", ())),)


def test_parse_catalog_authz_002_shape():
    (rel,) = parse_source(catalog_files()["otg_authz_002.smrl"])
    (loop,) = rel.body
    assert isinstance(loop, ForLoop)
    assert loop.iterable == FieldAccess(DataFn("Input", (IntLit(1),)), "actions")
    (stmt,) = loop.body
    assert isinstance(stmt.expr, MetamorphicOp) and stmt.expr.op == "IMPLIES"


def test_implies_arity():
    (rel,) = parse_source("MR X { IMPLIES(TRUE()); }")
    errors = diagnose(rel)
    assert errors and "IMPLIES" in errors[0].message


def test_parse_error_reports_expected_tokens():
    with pytest.raises(ParseError) as e:
        parse_source("MR X { TRUE() }")
    assert "SEMI" in e.value.expected
    assert e.value.line == 1


def test_imports_attach_to_every_relation():
    rels = parse_source("package p; import a.b; import c; MR A { TRUE(); } MR B { FALSE(); }")
    assert [r.imports for r in rels] == [("a.b", "c"), ("a.b", "c")]
    assert [r.qualified_name for r in rels] == ["p.A", "p.B"]


def test_unresolved_variable():
    (rel,) = parse_source("MR X { NOT(x); }")
    assert [e.message for e in diagnose(rel)] == ["unresolved variable x"]


def test_equal_target_must_be_designator():
    (rel,) = parse_source("MR X { EQUAL(5, Input(1)); }")
    assert "EQUAL target must be an input designator" in [e.message for e in diagnose(rel)]


def test_equal_through_variable_alias():
    (rel,) = parse_source("MR X { var i = Input(2); EQUAL(i, Input(1)); }")
    assert diagnose(rel) == []


def test_unknown_function():
    (rel,) = parse_source("MR X { frobnicate(Input(1)); }")
    assert any("unresolved function frobnicate" in e.message for e in diagnose(rel))


def test_catalog_sources_are_clean():
    for name, src in catalog_files().items():
        rels = parse(tokenize(src))
        assert check_all(rels) == [], name


def test_duplicate_qualified_names():
    rels = parse_source("package p; MR A { TRUE(); } MR A { TRUE(); }")
    assert any("A" in e.message for e in check_all(rels))


def test_check_raises_with_all_errors():
    (rel,) = parse_source("MR X { NOT(x); NOT(y); }")
    with pytest.raises(CheckFailed) as e:
        check(rel)
    assert len(e.value.errors) == 2


def test_load_relations_reports_position():
    with pytest.raises(CheckFailed) as e:
        load_relations("MR X {\n  NOT(zz);\n}")
    assert (e.value.line, e.value.col) == (2, 7)
    assert e.value.errors[0].format("f.smrl") == "f.smrl:2:7: error: unresolved variable zz"


# -- printer round trip over generated trees ---------------------------------

idents = st.sampled_from(["a", "b", "item", "x1", "p_q"])
libfns = st.sampled_from(["isLogin", "isError", "changeCredentials", "helper"])
leaves = st.one_of(
    st.integers(0, 10**6).map(IntLit),
    st.text(st.characters(blacklist_categories=("Cs",)), max_size=6).map(StringLit),
    st.booleans().map(BoolLit),
    idents.map(VarRef),
    st.sampled_from(["Input", "User", "Action", "Session"]).flatmap(
        lambda n: st.integers(1, 4).map(lambda i: DataFn(n, (IntLit(i),)))
    ),
    st.sampled_from(["HttpMethod", "RandomFilePath"]).map(lambda n: DataFn(n, ())),
    st.sampled_from(["TRUE", "FALSE"]).map(lambda n: MetamorphicOp(n, ())),
)


def _extend(children):
    return st.one_of(
        st.tuples(libfns, st.lists(children, max_size=3)).map(lambda t: Call(t[0], tuple(t[1]))),
        st.tuples(st.sampled_from(["AND", "OR"]), st.lists(children, min_size=2, max_size=3)).map(
            lambda t: MetamorphicOp(t[0], tuple(t[1]))
        ),
        st.tuples(st.sampled_from(["IMPLIES", "EQUAL"]), children, children).map(
            lambda t: MetamorphicOp(t[0], (t[1], t[2]))
        ),
        children.map(lambda c: MetamorphicOp("NOT", (c,))),
        st.tuples(children, st.integers(1, 3)).map(lambda t: DataFn("Output", (t[0], IntLit(t[1])))),
        st.tuples(st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), children, children).map(
            lambda t: Compare(*t)
        ),
        st.tuples(st.sampled_from(["+", "-"]), children, children).map(lambda t: Arith(*t)),
        st.tuples(children, children).map(lambda t: RangeExpr(*t)),
        st.tuples(children, st.sampled_from(["actions", "url", "position", "length"])).map(
            lambda t: FieldAccess(*t)
        ),
    )


exprs = st.recursive(leaves, _extend, max_leaves=12)


def _stmts(depth):
    simple = st.one_of(exprs.map(ExprStmt), st.tuples(idents, exprs).map(lambda t: VarDecl(*t)))
    if depth == 0:
        return simple
    loops = st.tuples(idents, exprs, st.lists(_stmts(depth - 1), min_size=1, max_size=3)).map(
        lambda t: ForLoop(t[0], t[1], tuple(t[2]))
    )
    return st.one_of(simple, loops)


relations = st.builds(
    RelationAst,
    st.sampled_from(["", "owasp", "a.b.c"]),
    st.lists(st.sampled_from(["x.y", "z"]), max_size=2).map(tuple),
    st.sampled_from(["R", "OTG_X_1"]),
    st.lists(_stmts(2), max_size=4).map(tuple),
)


@settings(max_examples=300, deadline=None)
@given(relations)
def test_print_then_parse_is_identity(rel):
    text = format_relation(rel)
    (again,) = parse_source(text)
    assert again == rel


@settings(max_examples=500, deadline=None)
@given(st.text(alphabet=st.sampled_from(list('MR X{}();.,:"=!<>+-abc12 \n/*@for var')), max_size=60))
def test_error_positions_within_source(src):
    lines = src.split("\n")
    try:
        rels = parse(tokenize(src))
        errors = check_all(rels)
    except SmrlError as exc:
        errors = [exc]
    for e in errors:
        assert 1 <= e.line <= len(lines) + 1
        if e.line <= len(lines):
            assert 1 <= e.col <= len(lines[e.line - 1]) + 1
