import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from frikt import ir, targets
from frikt.checker.obligations import Kind, OptionRange, obligation_from_dict
from frikt.checker.symbolic import prove_symbolic
from frikt.checker.testing import PointChecker, compile_predicate
from frikt.checker.runner import RunConfig, check_obligation
from frikt.checker.verdicts import Proved, Refuted, Unknown
from frikt.evaluator import CompiledUnit
from frikt.frontend import TypeAnnot

import strategies

ARITY = "compute_log_arity_for_round"
PROVABLE = [
    "arity_respects_max_bound", "arity_respects_target_distance", "arity_respects_next_input",
    "folding_respects_final_height", "arity_makes_progress", "arity_zero_at_final_height",
    "fold_step_no_panic_m31", "m31_add_no_panic",
]


def test_max_bound_trace(obligations):
    entry, ob = obligations["arity_respects_max_bound"]
    v = prove_symbolic(entry.unit, ob)
    assert isinstance(v, Proved)
    assert v.rules() == ["PeelBind", "PeelBind", "MatchOptSplit", "PeelBind", "IteBoundRight", "IteBoundRight",
                         "Entail", "Entail"]


def test_target_distance_trace(obligations):
    entry, ob = obligations["arity_respects_target_distance"]
    v = prove_symbolic(entry.unit, ob)
    assert isinstance(v, Proved)
    assert v.rules() == ["PeelBind", "SubGuardSplit", "PeelBind", "MatchOptSplit", "IteBoundLeft", "Entail"]
    split = v.trace[1]
    assert "h_gt" in split.detail and "contradiction" in split.detail


@pytest.mark.parametrize("oid", PROVABLE)
def test_provable_obligations(obligations, oid):
    entry, ob = obligations[oid]
    assert isinstance(prove_symbolic(entry.unit, ob), Proved)


def test_loops_and_arrays_are_outside_the_fragment(obligations, corpus):
    entry, ob = obligations["horner_matches_poly_eval_p7"]
    no_panic = obligation_from_dict({"id": "h", "target": "horner", "kind": "no_panic"},
                                    list(entry.unit.function("horner").params))
    v = prove_symbolic(entry.unit, no_panic)
    assert isinstance(v, Unknown) and v.reason.startswith("UnsupportedFragment")


@pytest.mark.parametrize("oid", ["arity_matches_spec", "merkle_rejects_single_bit_tamper"])
def test_other_kinds_are_unknown(obligations, oid):
    entry, ob = obligations[oid]
    assert isinstance(prove_symbolic(entry.unit, ob), Unknown)


def arity_ob(arity_unit, goal=None, pre=(), kind="bound", none=True, some=True):
    d = {"id": "q", "target": ARITY, "kind": kind, "pre": list(pre),
         "domain": {"next_input_log_height": {"option": True, "none": none, "some": some}}}
    if goal:
        d["goal"] = goal
    return obligation_from_dict(d, list(arity_unit.function(ARITY).params))


@pytest.mark.parametrize("goal, pre", [
    ("result <= 0", []),
    ("result >= 1", ["log_current_height > log_final_height"]),
    ("result <= log_current_height - log_final_height - 1", ["log_current_height > log_final_height"]),
    ("result < max_log_arity", []),
])
def test_false_goals_are_not_proved(arity_unit, goal, pre):
    assert isinstance(prove_symbolic(arity_unit, arity_ob(arity_unit, goal, pre)), Unknown)


def test_no_panic_needs_preconditions(arity_unit):
    assert isinstance(prove_symbolic(arity_unit, arity_ob(arity_unit, kind="no_panic")), Unknown)
    ok = arity_ob(arity_unit, kind="no_panic", pre=["log_final_height <= log_current_height",
                                                   "next_input_log_height <= log_current_height"])
    assert isinstance(prove_symbolic(arity_unit, ok), Proved)


@pytest.mark.parametrize("mutant", targets.list_mutants())
def test_mutants_are_never_proved_where_refuted(mutant):
    entry = targets.load_mutant(mutant)
    compiled = CompiledUnit(entry.unit)
    config = RunConfig(random_n=20_000)
    refuted = 0
    for ob in entry.obligations:
        mode = "exhaustive" if "exhaustive" in ob.modes else "random"
        tested = check_obligation(ob, compiled, mode, config)
        if isinstance(tested, Refuted):
            refuted += 1
            assert not isinstance(prove_symbolic(entry.unit, ob), Proved), ob.id
    assert refuted >= 1


# ---------------------------------------------------------------------------
# Cross-validation: every Proved verdict survives a million biased samples.

EDGE = np.array([0, 1, 2, 31, 32, 33, 2**31 - 2, 2**31 - 1, 2**32 - 1, 2**63, 2**64 - 2, 2**64 - 1], dtype=np.uint64)


def biased_columns(rng, params, n, domain):
    cols = []
    for name, ty in params:
        top = (1 << ty.width) - 1
        pick = rng.integers(0, 4, size=n)
        full = rng.integers(0, top, size=n, dtype=np.uint64, endpoint=True)
        small = rng.integers(0, 40, size=n, dtype=np.uint64)
        edge = EDGE[rng.integers(0, len(EDGE), size=n)] & np.uint64(top)
        col = np.where(pick == 0, full, np.where(pick == 1, small, edge))
        if cols:
            # copy an earlier column a quarter of the time so equalities get exercised
            src = cols[rng.integers(0, len(cols))]
            if all(isinstance(v, int) for v in src[:1]):
                mask = rng.random(n) < 0.25
                col = np.where(mask, np.array([0 if v is None else v for v in src], dtype=np.uint64), col)
        vals = [int(v) & top for v in col.tolist()]
        dom = domain[name]
        if isinstance(dom, OptionRange):
            mask = rng.random(n) < 0.2
            vals = [None if (m and dom.none) or not dom.some else v for m, v in zip(mask.tolist(), vals)]
        cols.append(vals)
    return list(zip(*cols))


def test_proved_verdicts_survive_a_million_samples(obligations):
    rng = np.random.default_rng(20261015)
    checked = 0
    per = 140_000
    for oid in PROVABLE:
        entry, ob = obligations[oid]
        assert isinstance(prove_symbolic(entry.unit, ob), Proved)
        fn = entry.unit.function(ob.target)
        pc = PointChecker(ob, CompiledUnit(entry.unit))
        rounds = 0
        hits = 0
        while hits < per and rounds < 40:
            rounds += 1
            for args in biased_columns(rng, fn.params, 50_000, ob.domain):
                if not pc.pre(args):
                    continue
                assert pc.failure(args) is None, (oid, args)
                hits += 1
        checked += hits
    print(f"cross-validated Proved verdicts on {checked} samples")
    assert checked >= 1_000_000


# Random straight-line programs: Proved must never disagree with exhaustive checking.

SCOPE = (("x", TypeAnnot.U64), ("y", TypeAnnot.U64), ("o", TypeAnnot.OPTION_USIZE))
GOALS = ["result <= x", "result <= y + 3", "result >= x - y", "result <= x + y", "result == 0", "result >= 1"]
PRES = ["x < 12", "y <= x", "o <= x", "x == y", "y > 2"]


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(st.one_of(strategies.int_expr(64, SCOPE, 3), strategies.int_expr(64, SCOPE, 2)),
       st.sampled_from(GOALS + [None]), st.lists(st.sampled_from(PRES), max_size=3, unique=True))
def test_random_programs_proved_only_when_true(body, goal, pre):
    fn = ir.IrFunction("f", SCOPE, TypeAnnot.U64, body)
    unit = ir.IrUnit((strategies.HELPER, fn))
    d = {"id": "r", "target": "f", "kind": "no_panic" if goal is None else "bound", "pre": pre,
         "domain": {"x": {"min": 0, "max": 12}, "y": {"min": 0, "max": 12}, "o": {"option": True, "min": 0, "max": 12}}}
    if goal:
        d["goal"] = goal
    ob = obligation_from_dict(d, list(SCOPE))
    v = prove_symbolic(unit, ob)
    if not isinstance(v, Proved):
        return
    pc = PointChecker(ob, CompiledUnit(unit), fuel=1 << 12)
    for x in range(13):
        for y in range(13):
            for o in [None, *range(13)]:
                args = (x, y, o)
                if pc.pre(args):
                    assert pc.failure(args) is None, (args, v.rules())


# ---------------------------------------------------------------------------
# Rule-local soundness on concrete values, determinism and precondition invariance

U64 = st.integers(0, 2**64 - 1) | st.integers(0, 40)


@given(U64, U64, st.sampled_from([ir.CmpLt, ir.CmpLe]))
def test_ite_bound_facts_hold_concretely(a, b, cmp):
    from frikt.evaluator import eval
    e = ir.Ite(cmp(ir.Var("a"), ir.Var("b")), ir.Var("a"), ir.Var("b"))
    r = eval(e, {"a": a, "b": b}, 0).value
    assert r <= a and r <= b


@pytest.mark.parametrize("oid", PROVABLE)
def test_traces_are_deterministic(obligations, oid):
    entry, ob = obligations[oid]
    assert prove_symbolic(entry.unit, ob) == prove_symbolic(entry.unit, ob)


@pytest.mark.parametrize("oid, extra", [
    ("arity_respects_max_bound", ["log_final_height <= 77"]),
    ("arity_respects_max_bound", ["max_log_arity >= 3", "log_current_height <= 1000"]),
    ("arity_respects_target_distance", ["max_log_arity <= 9"]),
    ("arity_respects_target_distance", ["log_final_height >= 2"]),
])
def test_irrelevant_preconditions_keep_the_trace(obligations, oid, extra):
    entry, ob = obligations[oid]
    base = prove_symbolic(entry.unit, ob)
    strengthened = prove_symbolic(entry.unit, ob.with_pre(*extra))
    assert isinstance(strengthened, Proved)
    assert strengthened.rules() == base.rules()
