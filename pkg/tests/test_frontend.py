import pytest
from hypothesis import given, settings, strategies as st

from cloak.frontend import ast as A
from cloak.frontend import parse, parse_expression, pretty_print, strip_annotations, validate_subset
from cloak.frontend.lexer import tokenize

from conftest import read, bundled


# -- parse --------------------------------------------------------------------

def test_listing1_shape(listing1_text):
    sf = parse(listing1_text)
    assert sf.ok and sf.diagnostics == ()
    (c,) = sf.contracts
    assert c.name == "SupplyChain"
    assert [v.name for v in c.state_vars] == ["balances", "mPrice"]
    assert [f.name for f in c.functions] == ["biddingProcure"]


def test_listing1_annotation_inventory(listing1_text):
    c = parse(listing1_text).contracts[0]
    found = set()

    def collect_type(t):
        if isinstance(t, A.MappingType):
            if t.key_binding is not None:
                found.add(str(t.key_binding))
            if t.value_owner is not None:
                found.add(str(t.value_owner))
            collect_type(t.value)
        elif isinstance(t, A.ArrayType):
            if t.annotation is not None:
                found.add(f"[{t.annotation}]")
            collect_type(t.elem)

    decls = list(c.state_vars)
    for f in c.functions:
        decls += list(f.params) + list(f.returns)
        decls += [s.decl for s in A.walk_stmts(f.body) if isinstance(s, A.VarDeclStmt)]
    for d in decls:
        collect_type(d.type)
        if d.owner is not None:
            found.add(str(d.owner))
    assert found == {"!k", "@k", "@all", "[!p]", "[@p]", "@winner"}


def test_empty_source():
    sf = parse("")
    assert sf.contracts == () and sf.diagnostics == ()


def test_dangling_at_is_annotation_error():
    src = "contract C { uint @ x; }"
    sf = parse(src)
    assert sf.contracts == ()
    (d,) = sf.diagnostics
    assert d.code == "AnnotationSyntaxError"
    assert src[d.span.start:d.span.end] == "@"


def test_illegal_character_is_lex_error():
    sf = parse("contract C { uint #x; }")
    assert [d.code for d in sf.diagnostics] == ["LexError"]
    assert sf.contracts == ()


def test_missing_semicolon_is_parse_error():
    sf = parse("contract C { uint x }")
    assert [d.code for d in sf.diagnostics] == ["ParseError"]
    assert sf.contracts == ()


@pytest.mark.parametrize("src", [
    "contract C { uint @ x; }",
    "contract C { uint #x; }",
    "contract C { uint x }",
    "contract C { function f( public {} }",
    "contract",
    "contract C { mapping(address !k => uint @k) m; function f() public { m[0] = ; } }",
])
def test_diagnostic_spans_in_bounds(src):
    for d in parse(src).diagnostics:
        assert 0 <= d.span.start <= d.span.end <= len(src)


# -- strip --------------------------------------------------------------------

def test_strip_listing1(listing1_text):
    plain = strip_annotations(parse(listing1_text))
    text = pretty_print(plain)
    assert "mapping(address => uint) balances;" in text
    assert "uint mPrice;" in text
    assert "uint mPrice = bids[0];" in text
    assert "returns (address winner, uint sPrice)" in text
    assert "@" not in text and "!" not in text.replace("!=", "") and "reveal" not in text


def test_strip_is_idempotent(listing1_text):
    once = strip_annotations(parse(listing1_text))
    assert strip_annotations(once) == once


def test_strip_plain_program_is_identity():
    sf = parse("contract C { uint x; function f(uint a) public returns (uint) { x = a + 1; return x; } }")
    assert strip_annotations(sf) == sf


def test_strip_return_annotation():
    sf = parse("contract C { function f(address w) public returns (uint @w s) { s = 1; } }")
    (ret,) = strip_annotations(sf).contracts[0].functions[0].returns
    assert ret.owner is None and ret.name == "s"


# -- validate -----------------------------------------------------------------

def test_stripped_listing1_validates(listing1_text):
    assert validate_subset(strip_annotations(parse(listing1_text))) == []


def test_undeclared_identifier():
    sf = parse("contract C { uint x; function f() public { x = y; } }")
    assert [d.code for d in validate_subset(sf)] == ["UndeclaredIdentifier"]


def test_type_mismatch():
    sf = parse("contract C { function f() public { bool b = 1 + true; } }")
    assert [d.code for d in validate_subset(sf)] == ["TypeMismatch"]


@pytest.mark.parametrize("path", sorted(bundled("corpus").glob("*.cloak")), ids=lambda p: p.stem)
def test_corpus_round_trips_and_validates(path):
    sf = parse(read(path))
    assert sf.ok
    again = parse(pretty_print(sf))
    assert again.units == sf.units
    assert validate_subset(strip_annotations(sf)) == []


# -- properties ---------------------------------------------------------------

NAMES = ["a", "b", "c", "arr", "m"]
_leaf = st.one_of(
    st.integers(min_value=0, max_value=2 ** 256 - 1).map(str),
    st.sampled_from(["true", "false", "msg.sender"]),
    st.sampled_from(NAMES),
)


def _compose(children):
    binop = st.sampled_from(["+", "-", "*", "/", "%", "<", ">", "<=", ">=", "==", "!=", "&&", "||"])
    return st.one_of(
        st.tuples(children, binop, children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, binop, children).map(lambda t: f"{t[0]} {t[1]} {t[2]}"),
        st.tuples(st.sampled_from(["!", "-"]), children).map(lambda t: f"{t[0]}{t[1]}"),
        st.tuples(st.sampled_from(["arr", "m"]), children).map(lambda t: f"{t[0]}[{t[1]}]"),
        st.tuples(children, st.sampled_from(["all", "me", "tee", "a"])).map(
            lambda t: f"reveal({t[0]}, {t[1]})"),
    )


expressions = st.recursive(_leaf, _compose, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(expressions)
def test_expression_round_trip(text):
    e = parse_expression(text)
    assert parse_expression(pretty_print(e)) == e


statements = st.one_of(
    expressions.map(lambda e: f"a = {e};"),
    expressions.map(lambda e: f"b += {e};"),
    expressions.map(lambda e: f"uint @all t = {e};"),
    expressions.map(lambda e: f"if ({e}) {{ a = 1; }} else {{ b = 2; }}"),
    expressions.map(lambda e: f"for (uint i = 0; i < {e}; i++) {{ c -= 1; }}"),
    expressions.map(lambda e: f"return {e};"),
)


@settings(max_examples=200, deadline=None)
@given(st.lists(statements, max_size=6))
def test_contract_round_trip(stmts):
    src = ("contract C {\n"
           "    uint @all a;\n    uint @me b;\n    uint c;\n"
           "    uint[] arr;\n    mapping(address !k => uint @k) m;\n"
           "    function f(address w) public returns (uint) {\n        "
           + "\n        ".join(stmts) + "\n    }\n}\n")
    sf = parse(src)
    assert sf.ok, sf.diagnostics
    printed = pretty_print(sf)
    assert parse(printed).units == sf.units
    assert pretty_print(parse(printed)) == printed
    stripped = strip_annotations(sf)
    assert strip_annotations(stripped) == stripped


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="contracfuniosemp{}();@!=<>+-*/ ab01[]\n.", max_size=80))
def test_arbitrary_text_never_crashes(src):
    sf = parse(src)
    if not sf.ok:
        assert sf.contracts == ()
    for d in sf.diagnostics:
        assert 0 <= d.span.start <= d.span.end <= len(src)


def test_every_token_has_span(listing1_text):
    for tok in tokenize(listing1_text):
        assert 0 <= tok.span.start <= tok.span.end <= len(listing1_text)
