import itertools
import json

import pytest

from frikt import ir, targets
from frikt.checker import runner
from frikt.checker.obligations import DomainTooLarge, obligation_from_dict
from frikt.checker.testing import (EngineDisagreement, PointChecker, check_exhaustive, check_random, check_rejects)
from frikt.checker.verdicts import PassedTests, Proved, Refuted, ReportEntry, Skipped, TraceStep, Unknown, is_pass
from frikt.evaluator import CompiledUnit, eval_function
from frikt.ir import Ok, Panic, PanicKind


def adhoc(source, **ob):
    unit = ir.extract(source)
    fn = unit.functions[-1]
    d = {"id": "adhoc", "target": fn.name, "modes": ["exhaustive", "random"]}
    d.update(ob)
    return CompiledUnit(unit), obligation_from_dict(d, list(fn.params))


def test_exhaustive_counts_the_whole_domain(corpus, compiled):
    ob = corpus["arity"].obligations[0]
    v = check_exhaustive(ob, compiled["arity"])
    assert v == PassedTests(33 ** 3 * 34)


def test_exhaustive_respects_preconditions(corpus, compiled):
    ob = next(o for o in corpus["arity"].obligations if o.id == "arity_respects_target_distance")
    # None only; 33 choices of max_log_arity times pairs cur > fin in [0, 32].
    assert check_exhaustive(ob, compiled["arity"]) == PassedTests(33 * (33 * 32 // 2))


def test_exhaustive_reports_first_counterexample_in_order():
    entry = targets.load_mutant("arity_flipped_comparison")
    ob = entry.obligations[0]
    v = check_exhaustive(ob, CompiledUnit(entry.unit))
    assert isinstance(v, Refuted)
    first = None
    for args in itertools.product(*(list(d.values()) for d in ob.domain.values())):
        out = eval_function(entry.unit, ob.target, args, 100)
        if isinstance(out, Ok) and out.value > args[3]:
            first = args
            break
    assert tuple(v.counterexample.args) == first
    assert v.counterexample.validate(entry.unit)


def test_exhaustive_cap():
    compiled, ob = adhoc("fn f(a: u64, b: u64) -> u64 { a & b }", kind="no_panic")
    with pytest.raises(DomainTooLarge):
        check_exhaustive(ob, compiled, cap=10**6)
    assert isinstance(runner.check_obligation(ob, compiled, "exhaustive", runner.RunConfig(exhaustive_cap=10)), Unknown)


def test_parallel_exhaustive_matches_serial(corpus, compiled):
    ob = corpus["arity"].obligations[0]
    assert check_exhaustive(ob, compiled["arity"], workers=2) == check_exhaustive(ob, compiled["arity"])
    mutant = targets.load_mutant("arity_flipped_comparison")
    cu = CompiledUnit(mutant.unit)
    assert check_exhaustive(mutant.obligations[0], cu, workers=3) == check_exhaustive(mutant.obligations[0], cu)


def test_boundary_battery_runs_before_sampling():
    compiled, ob = adhoc("fn f(a: u64) -> u64 { if a < 18446744073709551615 { a } else { a + 1 } }", kind="no_panic")
    v = check_random(ob, compiled, n=10, seed=0)
    assert isinstance(v, Refuted)
    assert v.counterexample.args == [2**64 - 1]
    assert v.counterexample.outcome == Panic(PanicKind.OVERFLOW)


def test_random_is_deterministic_in_the_seed(corpus, compiled):
    ob = next(o for o in corpus["adc32"].obligations if o.id == "adc32_matches_spec")
    a = check_random(ob, compiled["adc32"], n=40_000, seed=5)
    assert a == check_random(ob, compiled["adc32"], n=40_000, seed=5)
    assert isinstance(a, PassedTests) and a.seed == 5


def test_random_refutation_is_reproducible():
    entry = targets.load_mutant("mersenne31_swapped_branch")
    ob = next(o for o in entry.obligations if o.id == "m31_add_matches_spec")
    cu = CompiledUnit(entry.unit)
    v1 = check_random(ob, cu, n=50_000, seed=11)
    v2 = check_random(ob, cu, n=50_000, seed=11)
    assert isinstance(v1, Refuted) and v1 == v2
    assert v1.counterexample.validate(entry.unit)


def test_parallel_random_matches_serial(corpus, compiled):
    ob = next(o for o in corpus["adc32"].obligations if o.id == "adc32_matches_spec")
    assert check_random(ob, compiled["adc32"], n=100_000, seed=3, workers=2) == \
        check_random(ob, compiled["adc32"], n=100_000, seed=3)


def test_samples_override_caps_random_n(corpus, compiled):
    ob = next(o for o in corpus["fold_round"].obligations)
    assert ob.samples == 20_000
    v = check_random(ob, compiled["fold_round"], n=10**6, seed=0)
    assert isinstance(v, PassedTests)
    assert v.count <= 20_000 + 4 ** len(ob.domain)


def test_rejects_accepts_valid_and_rejects_tampers(corpus, compiled):
    ob = corpus["merkle_verify"].obligations[0]
    small = obligation_from_dict({"id": "m", "target": "merkle_verify", "kind": "rejects",
                                  "tamper": "merkle_single_bit", "depth": {"min": 0, "max": 3}, "instances": 5,
                                  "modes": ["random"]}, list(corpus["merkle_verify"].unit.function("merkle_verify").params))
    v = check_rejects(small, compiled["merkle_verify"], seed=0)
    # per instance: 1 valid + 64 leaf flips + 64 per sibling, depths 0..3
    assert v == PassedTests(sum(5 * (1 + 64 + 64 * d) for d in range(4)), 0)
    assert ob.tamper == "merkle_single_bit"


def test_rejects_catches_a_kernel_that_ignores_sides(corpus):
    src = corpus["merkle_verify"].source.replace("if sides[i] == 0", "if sides[i] == sides[i]")
    unit = ir.extract(src)
    ob = obligation_from_dict({"id": "m", "target": "merkle_verify", "kind": "rejects", "tamper": "merkle_single_bit",
                               "depth": {"min": 1, "max": 2}, "instances": 20, "modes": ["random"]},
                              list(unit.function("merkle_verify").params))
    v = check_rejects(ob, CompiledUnit(unit), seed=0)
    assert isinstance(v, Refuted)
    assert v.counterexample.reason.startswith("valid path rejected")


def test_unknown_tamper_model():
    compiled, ob = adhoc("fn f(a: u64) -> bool { a == 0 }", kind="rejects", tamper="nope", modes=["random"])
    assert isinstance(check_rejects(ob, compiled), Unknown)


def test_engine_disagreement_is_raised(arity_unit):
    cu = CompiledUnit(arity_unit)
    ob = obligation_from_dict({"id": "x", "target": "compute_log_arity_for_round", "kind": "no_panic"},
                              list(arity_unit.function("compute_log_arity_for_round").params))
    pc = PointChecker(ob, cu)
    with pytest.raises(EngineDisagreement):
        pc.counterexample((10, None, 4, 3), (Panic(PanicKind.OVERFLOW), None, "forged"))


def test_equiv_against_partial_spec_accepts_matching_panics(compiled, corpus):
    ob = next(o for o in corpus["arity"].obligations if o.kind.value == "equiv")
    pc = PointChecker(ob, compiled["arity"])
    assert pc.failure((4, None, 5, 2)) is None
    assert pc.failure((10, None, 4, 3)) is None


def test_report_entry_json():
    e = ReportEntry("id", "t", "symbolic", Proved((TraceStep("Entail", "goal", "x"),)), 12.3456)
    d = e.to_json()
    assert d["millis"] is None
    assert e.to_json(timings=True)["millis"] == 12.346
    assert d["detail"]["trace"] == [{"rule": "Entail", "site": "goal", "detail": "x"}]
    json.dumps(d)


def test_pass_classification():
    assert is_pass(Proved()) and is_pass(PassedTests(3)) and is_pass(Skipped())
    assert not is_pass(Unknown("x"))


def test_run_checks_order(tmp_path):
    config = runner.RunConfig(targets=["mersenne31", "adc32"], modes=("random", "symbolic"), random_n=2000)
    report = runner.run_checks(config)
    ids = [r.id for r in report]
    assert ids.index("adc32_matches_spec") < ids.index("m31_add_matches_spec")
    modes = [(r.id, r.mode) for r in report if r.id == "m31_add_no_panic"]
    assert modes == [("m31_add_no_panic", "symbolic"), ("m31_add_no_panic", "random")]
    assert runner.all_passed(report)


def test_skipped_modes_are_omitted_from_reports():
    report = runner.run_checks(runner.RunConfig(targets=["horner"], modes=("symbolic",)))
    assert report == []
