import pytest
from hypothesis import given, strategies as st

from frikt import ir
from frikt.frontend import TypeAnnot
from frikt.ir import Ok, Panic, PanicKind

from strategies import programs

WIDTHS = st.sampled_from([32, 64])


@given(WIDTHS, st.data())
def test_checked_ops_match_unbounded_arithmetic(w, data):
    a = data.draw(st.integers(0, 2**w - 1))
    b = data.draw(st.integers(0, 2**w - 1))
    assert ir.checked_add(w, a, b) == (Ok(a + b) if a + b < 2**w else Panic(PanicKind.OVERFLOW))
    assert ir.checked_sub(w, a, b) == (Ok(a - b) if a >= b else Panic(PanicKind.UNDERFLOW))
    assert ir.checked_mul(w, a, b) == (Ok(a * b) if a * b < 2**w else Panic(PanicKind.OVERFLOW))
    assert ir.rem(w, a, b) == (Ok(a % b) if b else Panic(PanicKind.DIV_BY_ZERO))
    s = b % (w + 4)
    assert ir.shl(w, a, s) == (Ok((a << s) % 2**w) if s < w else Panic(PanicKind.OVERFLOW))
    assert ir.shr(w, a, s) == (Ok(a >> s) if s < w else Panic(PanicKind.OVERFLOW))


def test_arity_lowering_shape(arity_unit):
    fn = arity_unit.function("compute_log_arity_for_round")
    assert ir.count_nodes(fn.body, (ir.CheckedSub,)) == 2
    assert ir.count_nodes(fn.body, (ir.MatchOpt,)) == 1
    assert ir.count_nodes(fn.body, (ir.Ite,)) == 2
    assert ir.free_vars(fn.body) == {n for n, _ in fn.params}


def test_fold_step_has_thirteen_arithmetic_operations(corpus):
    fn = corpus["fold_step"].unit.function("fold_step")
    assert ir.count_nodes(fn.body, ir.ARITH_NODES) == 13


def test_horner_lowers_loop(corpus):
    fn = corpus["horner"].unit.function("horner")
    loops = [n for n in ir.nodes(fn.body) if isinstance(n, ir.RecLoop)]
    assert len(loops) == 1
    assert loops[0].hi == ir.Var("n")
    assert ir.count_nodes(fn.body, (ir.ArrLen,)) == 1


def test_merkle_inlines_nothing_at_extraction(corpus):
    unit = corpus["merkle_verify"].unit
    calls = {n.fn for n in ir.nodes(unit.function("merkle_verify").body) if isinstance(n, ir.Call)}
    assert calls <= set(unit.names)


@pytest.mark.parametrize("name", ["arity", "fold_step", "mersenne31", "koalabear", "horner", "merkle_verify",
                                  "adc32", "fold_round"])
def test_json_round_trip_corpus(corpus, name):
    unit = corpus[name].unit
    assert ir.unit_from_json(ir.unit_to_json(unit)) == unit


@given(programs())
def test_json_round_trip_random(unit):
    assert ir.unit_from_json(ir.unit_to_json(unit, indent=None)) == unit


def test_recursion_is_a_lowering_error():
    from frikt import frontend as fe
    f = fe.FnDecl("f", [("a", TypeAnnot.U64)], TypeAnnot.U64, fe.Call("f", [fe.Var("a")]), False)
    with pytest.raises((ir.LoweringError, fe.UnsupportedConstruct)):
        ir.lower(fe.resolve(fe.SourceUnit("<t>", "", [f])))


@pytest.mark.parametrize("value, ty, ok", [
    (0, TypeAnnot.U32, True), (2**32, TypeAnnot.U32, False), (True, TypeAnnot.U64, False),
    (None, TypeAnnot.OPTION_USIZE, True), ((1, 2), TypeAnnot.ARRAY_U64, True), ([1, 2], TypeAnnot.ARRAY_U64, False),
    (False, TypeAnnot.BOOL, True), (-1, TypeAnnot.U64, False),
])
def test_check_value(value, ty, ok):
    assert ir.check_value(value, ty) is ok


def test_outcome_rendering():
    assert str(Ok(None)) == "ok none"
    assert str(Ok((1, 2))) == "ok [1, 2]"
    assert str(Panic(PanicKind.UNDERFLOW)) == "fail underflow"
    assert str(ir.Diverge()) == "div"


def ast_free_vars(e, bound=frozenset()):
    from frikt import frontend as fe
    if isinstance(e, fe.Var):
        return set() if e.name in bound else {e.name}
    if isinstance(e, (fe.Index, fe.Len)):
        arr = set() if e.array in bound else {e.array}
        return arr | (ast_free_vars(e.index, bound) if isinstance(e, fe.Index) else set())
    if isinstance(e, fe.Let):
        return ast_free_vars(e.rhs, bound) | ast_free_vars(e.body, bound | {e.name})
    if isinstance(e, fe.MatchOption):
        return (ast_free_vars(e.scrutinee, bound) | ast_free_vars(e.none_arm, bound)
                | ast_free_vars(e.some_arm, bound | {e.some_binder}))
    if isinstance(e, fe.ForRange):
        inner = bound | {e.binder, e.accum_name}
        return (ast_free_vars(e.lo, bound) | ast_free_vars(e.hi, bound) | ast_free_vars(e.accum_init, bound)
                | ast_free_vars(e.body, inner))
    out = set()
    for c in fe.children(e):
        out |= ast_free_vars(c, bound)
    return out


@pytest.mark.parametrize("name", ["arity", "fold_step", "mersenne31", "koalabear", "horner", "merkle_verify",
                                  "adc32", "fold_round"])
def test_lowering_preserves_free_variables_and_arity(corpus, name):
    from frikt import frontend as fe
    entry = corpus[name]
    src = fe.load_source(entry.source)
    for fn in src.functions:
        lowered = entry.unit.function(fn.name)
        assert len(lowered.params) == len(fn.params)
        assert ir.free_vars(lowered.body) == ast_free_vars(fn.body)
