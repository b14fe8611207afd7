import pytest
from hypothesis import given, strategies as st

from frikt import frontend as fe
from frikt.frontend import TypeAnnot
from frikt.targets import CORPUS_ROOT, MUTANTS_ROOT


def kinds(text):
    return [t.kind for t in fe.tokenize(text)]


def test_tokenize_literals_and_comments():
    toks = fe.tokenize("let x = 0xFF_FF; // trailing\n/* block */ x << 1_000")
    assert [t.kind for t in toks][:5] == ["kw_let", "ident", "eq", "int", "semi"]
    assert int(toks[3].value) == 0xFFFF
    assert int(toks[-1].value) == 1000
    assert toks[-2].kind == "shl"


def test_token_positions_are_one_based():
    toks = fe.tokenize("fn f()\n  -> u64")
    arrow = [t for t in toks if t.kind == "arrow"][0]
    assert arrow.pos == fe.Position(2, 3)


def test_lex_error_has_position():
    with pytest.raises(fe.LexError) as err:
        fe.tokenize("let x = 1;\nlet y = $;")
    assert err.value.pos == fe.Position(2, 9)


def test_parse_arity_signature():
    text = (CORPUS_ROOT / "arity" / "arity.krs").read_text()
    unit = fe.load_source(text)
    fn = unit.function("compute_log_arity_for_round")
    assert fn.is_pub
    assert [t for _, t in fn.params] == [TypeAnnot.USIZE, TypeAnnot.OPTION_USIZE, TypeAnnot.USIZE, TypeAnnot.USIZE]
    assert fn.return_type is TypeAnnot.USIZE


@pytest.mark.parametrize("src, construct", [
    ("fn f(a: u64) -> u64 { while a < 3 { a } }", "while"),
    ("fn f(a: u64) -> u64 { let mut b = a; b }", "mut"),
    ("fn f(a: u64) -> bool { a > 3 }", ">"),
    ("fn f(a: u64) -> u64 { a / 3 }", "/"),
    ("fn f(a: u64) -> u64 { std::cmp::min(a, 3) }", "path expression"),
    ("fn f<T>(a: u64) -> u64 { a }", "generic"),
    ("fn f(a: u64) -> u64 { a.pow(2) }", "method"),
    ("fn f(a: u64) -> u64 { if a < 1 { 1 } else if a < 2 { 2 } else { 3 } }", "else-if"),
])
def test_unsupported_constructs_are_named(src, construct):
    with pytest.raises(fe.UnsupportedConstruct) as err:
        fe.load_source(src)
    assert construct in str(err.value)
    assert err.value.pos is not None


def test_parse_error_lists_expectations():
    with pytest.raises(fe.ParseError) as err:
        fe.parse_source("fn f(a: u64) -> u64 { a + }")
    assert err.value.pos == fe.Position(1, 27)
    assert err.value.expected


def test_unknown_name():
    with pytest.raises(fe.KernelNameError):
        fe.load_source("fn f(a: u64) -> u64 { b }")


def test_width_mismatch_is_a_type_error():
    with pytest.raises(fe.KernelTypeError):
        fe.load_source("fn f(a: u64, b: u32) -> u64 { a + b }")


def test_casts_resolve_widen_and_wrap():
    unit = fe.load_source("fn f(a: u32, b: u64) -> u64 { let c = b as u32; a as u64 + c as u64 }")
    casts = [n for n in fe.walk(unit.functions[0].body) if isinstance(n, fe.Cast)]
    assert {c.kind for c in casts} == {fe.CastKind.WIDEN, fe.CastKind.WRAP}


def test_recursion_rejected():
    with pytest.raises(fe.UnsupportedConstruct):
        fe.load_source("fn f(a: u64) -> u64 { g(a) }\nfn g(a: u64) -> u64 { f(a) }")


def test_literal_takes_type_from_context():
    unit = fe.load_source("fn f(a: u32) -> u32 { a + 7 }")
    lit = [n for n in fe.walk(unit.functions[0].body) if isinstance(n, fe.IntLit)][0]
    assert lit.ty is TypeAnnot.U32


def test_literal_out_of_range_for_context():
    with pytest.raises(fe.KernelTypeError):
        fe.load_source("fn f(a: u32) -> u32 { a + 4294967296 }")


def corpus_files():
    return sorted(CORPUS_ROOT.glob("*/*.krs")) + sorted(MUTANTS_ROOT.glob("*/*/*.krs"))


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.parent.name)
def test_corpus_round_trip(path):
    unit = fe.load_source(path.read_text(), str(path))
    printed = fe.pretty_print(unit)
    again = fe.load_source(printed)
    assert again == unit
    assert fe.pretty_print(again) == printed


# ---------------------------------------------------------------------------
# Random ASTs: pretty printing then parsing gives the same tree.

NAMES = st.sampled_from(["a", "b", "c", "acc", "x_1"])
INT_TYPES = st.sampled_from([TypeAnnot.U32, TypeAnnot.U64, TypeAnnot.USIZE])
BINOPS = st.sampled_from(["+", "-", "*", "%", "&", "|", "^", "<<", ">>", "<", "<=", "=="])


def exprs(depth):
    leaves = st.one_of(
        st.integers(0, 2**64 - 1).map(fe.IntLit),
        st.booleans().map(fe.BoolLit),
        st.just(fe.NoneLit()),
        NAMES.map(fe.Var),
        NAMES.map(fe.Len),
    )
    if depth == 0:
        return leaves
    sub = exprs(depth - 1)
    return st.one_of(
        leaves,
        st.builds(fe.BinOp, BINOPS, sub, sub),
        st.builds(fe.Cast, INT_TYPES, sub),
        st.builds(fe.SomeCtor, sub),
        st.builds(fe.Index, NAMES, sub),
        st.builds(fe.Call, st.sampled_from(["g", "h"]), st.lists(sub, max_size=3)),
        st.builds(fe.If, sub, blocks(depth - 1), blocks(depth - 1)),
        st.builds(fe.MatchOption, sub, blocks(depth - 1), NAMES, blocks(depth - 1)),
    )


def blocks(depth):
    tail = exprs(depth)
    if depth == 0:
        return tail
    let = st.builds(fe.Let, NAMES, exprs(depth - 1), tail)
    loop = st.builds(
        lambda acc, i, lo, hi, body, rest: fe.Let(acc, fe.ForRange(i, lo, hi, acc, fe.Var(acc), body), rest),
        NAMES, NAMES, exprs(0), exprs(depth - 1), exprs(depth - 1), tail)
    return st.one_of(tail, let, loop)


@given(body=blocks(3), pub=st.booleans())
def test_random_ast_round_trip(body, pub):
    fn = fe.FnDecl("f", [("a", TypeAnnot.U64), ("n", TypeAnnot.OPTION_USIZE)], TypeAnnot.U64, body, pub)
    unit = fe.SourceUnit("<gen>", "", [fn])
    reparsed = fe.parse_source(fe.pretty_print(unit))
    assert reparsed == unit


@pytest.mark.parametrize("src, exc", [
    ("fn f(a: &u64) -> u64 { a }", fe.UnsupportedConstruct),
    ("fn f<T: Copy>(a: u64) -> u64 { a }", fe.UnsupportedConstruct),
    ("fn f(a: u64) -> u64 { undeclared(a) }", fe.KernelNameError),
    ("fn f(a: u64) -> u64 where u64: Copy { a }", fe.UnsupportedConstruct),
    ("fn f(a: u64) -> u64 { while a < 1 { a } }", fe.UnsupportedConstruct),
])
def test_fragment_enforcement(src, exc):
    with pytest.raises(exc):
        fe.load_source(src)


def _accepts_or_positions(text):
    try:
        fe.load_source(text)
    except fe.FrontendError as e:
        assert e.pos is not None


@given(st.text(max_size=80))
def test_arbitrary_text_never_crashes(text):
    _accepts_or_positions(text)


@given(st.sampled_from(corpus_files()), st.data())
def test_damaged_corpus_never_crashes(path, data):
    text = path.read_text()
    i = data.draw(st.integers(0, len(text)))
    j = data.draw(st.integers(i, min(len(text), i + 12)))
    junk = data.draw(st.text(alphabet="(){}[];:,<>=+-*%&|^!. \nabxyz019_", max_size=6))
    _accepts_or_positions(text[:i] + junk + text[j:])
