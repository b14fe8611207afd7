"""One test per acceptance criterion.

Every test prints a ``[PASS]``/``[FAIL]`` line with the measured numbers and
the pinned tolerances before asserting.  Run with ``-s`` to see them live;
they are also captured in the pytest report.
"""

import itertools
import time

import numpy as np
import pytest

from frikt import frontend as fe, ir, specs, targets
from frikt.checker.runner import RunConfig, check_obligation, run_checks
from frikt.checker.symbolic import prove_symbolic
from frikt.checker.testing import check_exhaustive, check_random, check_rejects
from frikt.checker.verdicts import PassedTests, Proved, Refuted
from frikt.cli import report_json
from frikt.evaluator import CompiledUnit
from frikt.specs import DensePoly, FoldInputs, PrimeModulus

pytestmark = pytest.mark.acceptance

SEED = 0
RANDOM_N = 1_000_000

# Pinned tolerances.
SYMBOLIC_SECONDS = 1.0
ARITY_SECONDS = 60.0
FOLD_SECONDS = 30.0
MAX_MISMATCHES = 0


def verdict_line(n, ok, summary):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {summary}")
    return ok


def ob(obligations, oid):
    return obligations[oid][1]


# ---------------------------------------------------------------------------


def test_01_symbolic_arity_theorems(obligations):
    results = {}
    for oid in ("arity_respects_max_bound", "arity_respects_target_distance"):
        entry, o = obligations[oid]
        t0 = time.perf_counter()
        v = prove_symbolic(entry.unit, o)
        results[oid] = (v, time.perf_counter() - t0)
    v1, t1 = results["arity_respects_max_bound"]
    v2, t2 = results["arity_respects_target_distance"]
    r1 = v1.rules() if isinstance(v1, Proved) else []
    r2 = v2.rules() if isinstance(v2, Proved) else []
    splits = [s for s in getattr(v2, "trace", ()) if s.rule == "SubGuardSplit"]
    ok = (isinstance(v1, Proved) and isinstance(v2, Proved)
          and not ob(obligations, "arity_respects_max_bound").pre
          and r1.count("PeelBind") >= 2 and "IteBoundRight" in r1
          and "PeelBind" in r2 and "IteBoundLeft" in r2
          and any("h_gt" in s.detail for s in splits)
          and t1 < SYMBOLIC_SECONDS and t2 < SYMBOLIC_SECONDS)
    verdict_line(1, ok, f"max_bound {type(v1).__name__} in {t1 * 1000:.2f}ms {r1}; "
                        f"target_distance {type(v2).__name__} in {t2 * 1000:.2f}ms {r2} "
                        f"(limit {SYMBOLIC_SECONDS}s each)")
    assert ok


def arity_pre_count(o):
    """Independent count of domain points meeting the preconditions (numpy grid)."""
    dom = o.domain
    cur = np.arange(33)[:, None, None, None]
    fin = np.arange(33)[None, None, :, None]
    mx = np.arange(33)[None, None, None, :]
    nd = dom["next_input_log_height"]
    nxt_vals = ([-1] if nd.none else []) + (list(range(33)) if nd.some else [])  # -1 encodes None
    nxt = np.array(nxt_vals)[None, :, None, None]
    env = {"log_current_height": cur, "log_final_height": fin, "max_log_arity": mx, "next_input_log_height": nxt}
    mask = np.ones((33, len(nxt_vals), 33, 33), dtype=bool)
    for c in o.pre:
        holds = np.broadcast_to(c.lhs.evaluate(env) - c.rhs.evaluate(env), mask.shape)
        rel = {"<": holds < 0, "<=": holds <= 0, ">": holds > 0, ">=": holds >= 0, "==": holds == 0}[c.rel]
        if "next_input_log_height" in c.names:
            rel = rel | np.broadcast_to(nxt == -1, mask.shape)
        mask &= rel
    return int(mask.sum())


def test_02_exhaustive_arity_suite(corpus, compiled):
    arity_obs = [o for o in corpus["arity"].obligations if o.kind.value == "bound"]
    assert len(arity_obs) == 6
    t0 = time.perf_counter()
    verdicts = [check_exhaustive(o, compiled["arity"], workers=1) for o in arity_obs]
    elapsed = time.perf_counter() - t0
    expected = [arity_pre_count(o) for o in arity_obs]
    counts = [v.count if isinstance(v, PassedTests) else None for v in verdicts]
    ok = counts == expected and elapsed < ARITY_SECONDS
    verdict_line(2, ok, f"{sum(c or 0 for c in counts)} evaluations over 6 obligations {counts}, "
                        f"0 counterexamples expected, {elapsed:.1f}s (limit {ARITY_SECONDS}s)")
    assert ok


def kernel_table(compiled, p):
    """T[lo, hi, beta, x] = kernel fold with x_inv = x^-1, from the compiled kernel."""
    fn = compiled.raw("fold_step")
    m = PrimeModulus(p)
    two_inv = m.inverse(2)
    table = np.zeros((p, p, p, p), dtype=np.uint64)
    spec_mismatch = 0
    for lo, hi, beta, x in itertools.product(range(p), range(p), range(p), range(1, p)):
        x_inv = m.inverse(x)
        got = fn(p, lo, hi, beta, x_inv, two_inv, [1 << 20])
        table[lo, hi, beta, x] = got
        spec_mismatch += got != specs.fold_step_spec(FoldInputs(lo, hi, beta, x_inv, two_inv), m)
    return table, spec_mismatch


def fold_identity_mismatches(table, p):
    """Compare the table against g(x^2) for every f of degree <= 4, vectorised over f."""
    coeffs = np.array(list(itertools.product(range(p), repeat=5)), dtype=np.uint64).T  # (5, p^5)
    bad = 0
    for x in range(1, p):
        lo = specs.poly_eval_batch(coeffs, x, p)
        hi = specs.poly_eval_batch(coeffs, p - x, p)
        for beta in range(p):
            g = specs.fold_poly_batch(coeffs, beta, p)
            want = specs.poly_eval_batch(g, x * x % p, p)
            bad += int(np.count_nonzero(table[lo, hi, beta, x] != want))
    return bad, coeffs.shape[1] * (p - 1) * p


def test_03_fold_step_equivalence(obligations, compiled):
    t0 = time.perf_counter()
    lines, total_bad = [], 0
    for p in (5, 7, 11, 13):
        v = check_exhaustive(ob(obligations, f"fold_step_matches_spec_p{p}"), compiled["fold_step"])
        table, spec_bad = kernel_table(compiled["fold_step"], p)
        poly_bad, cases = fold_identity_mismatches(table, p)
        bad = spec_bad + poly_bad + (0 if isinstance(v, PassedTests) else 1)
        total_bad += bad
        lines.append(f"p={p}: {getattr(v, 'count', v)} spec points, {cases} (f, x, beta) cases, {bad} failures")
    elapsed = time.perf_counter() - t0
    ok = total_bad <= MAX_MISMATCHES and elapsed < FOLD_SECONDS
    verdict_line(3, ok, "; ".join(lines) + f"; {elapsed:.1f}s (limit {FOLD_SECONDS}s)")
    assert ok


def test_04_fold_step_no_panic(obligations, compiled, corpus):
    o = ob(obligations, "fold_step_no_panic_m31")
    v = check_random(o, compiled["fold_step"], n=RANDOM_N, seed=SEED)
    arith = ir.count_nodes(corpus["fold_step"].unit.function("fold_step").body, ir.ARITH_NODES)
    ok = isinstance(v, PassedTests) and v.count >= RANDOM_N and arith == 13
    verdict_line(4, ok, f"{v}; arithmetic nodes {arith} (expected 13)")
    assert ok


FIELD_OBLIGATIONS = ["m31_add_matches_spec", "m31_mul_matches_spec", "m31_mul_shift_matches_spec",
                     "kb_add_matches_spec", "kb_mul_matches_spec"]


def test_05_field_arithmetic(obligations, compiled):
    out, ok = [], True
    for oid in FIELD_OBLIGATIONS:
        entry, o = obligations[oid]
        v = check_random(o, compiled[entry.name], n=RANDOM_N, seed=SEED)
        # 4x4 boundary battery precedes the random pairs
        good = isinstance(v, PassedTests) and v.count == RANDOM_N + 16
        ok &= good
        out.append(f"{oid}: {getattr(v, 'count', v)}")
    verdict_line(5, ok, ", ".join(out) + f" (expected {RANDOM_N + 16} each, {MAX_MISMATCHES} mismatches)")
    assert ok


def test_06_horner(obligations, compiled):
    ex = check_exhaustive(ob(obligations, "horner_matches_poly_eval_p7"), compiled["horner"])
    rnd = check_random(ob(obligations, "horner_matches_poly_eval_m31"), compiled["horner"], n=RANDOM_N, seed=SEED)
    ok = ex == PassedTests(7 ** 4 * 7) and isinstance(rnd, PassedTests) and rnd.count >= 100_000
    verdict_line(6, ok, f"exhaustive {ex} (expected {7 ** 4 * 7}); random {rnd} (expected >= 100000)")
    assert ok


def test_07_merkle_tamper(obligations, compiled):
    o = ob(obligations, "merkle_rejects_single_bit_tamper")
    v = check_rejects(o, compiled["merkle_verify"], seed=SEED)
    expected = sum(1000 * (1 + 64 + 64 * d) for d in range(9))
    ok = o.instances == 1000 and (o.depth.min, o.depth.max) == (0, 8) and v == PassedTests(expected, SEED)
    verdict_line(7, ok, f"{v} (expected {expected}: 9000 valid paths plus every single-bit tamper)")
    assert ok


def test_08_adc32(obligations, compiled):
    eq = check_random(ob(obligations, "adc32_matches_spec"), compiled["adc32"], n=RANDOM_N, seed=SEED)
    inv = check_random(ob(obligations, "adc32_sum_and_carry_recombine"), compiled["adc32"], n=RANDOM_N, seed=SEED)
    # battery: 4 x 4 x {0, 1}
    ok = eq == PassedTests(RANDOM_N + 32, SEED) and inv == PassedTests(RANDOM_N + 32, SEED)
    verdict_line(8, ok, f"spec {eq}; invariant {inv} (expected {RANDOM_N + 32} each)")
    assert ok


def test_09_mutation_sensitivity():
    config = RunConfig(random_n=100_000, seed=SEED)
    found = {}
    for name in targets.list_mutants():
        entry = targets.load_mutant(name)
        cu = CompiledUnit(entry.unit)
        for o in entry.obligations:
            for mode in ("exhaustive", "random"):
                if mode not in o.modes:
                    continue
                v = check_obligation(o, cu, mode, config)
                if isinstance(v, Refuted) and v.counterexample.validate(entry.unit):
                    found.setdefault(name, (o.id, str(v.counterexample)))
    ok = len(found) == 5 and set(found) == set(targets.list_mutants())
    for name in targets.list_mutants():
        print(f"    {name}: {found.get(name, 'NOT REFUTED')}")
    verdict_line(9, ok, f"{len(found)}/5 mutants refuted with replayable counterexamples")
    assert ok


def test_10_determinism_and_round_trip(tmp_path):
    config = RunConfig(random_n=20_000, seed=SEED)
    first = report_json(run_checks(config)).encode()
    second = report_json(run_checks(config)).encode()
    files = sorted(targets.CORPUS_ROOT.glob("*/*.krs")) + sorted(targets.MUTANTS_ROOT.glob("*/*/*.krs"))
    bad = []
    for path in files:
        unit = fe.load_source(path.read_text(), str(path))
        printed = fe.pretty_print(unit)
        if fe.load_source(printed) != unit or fe.pretty_print(fe.load_source(printed)) != printed:
            bad.append(path.name)
    ok = first == second and not bad and len(files) == 13
    verdict_line(10, ok, f"reports {'identical' if first == second else 'DIFFER'} ({len(first)} bytes); "
                         f"{len(files) - len(bad)}/{len(files)} files round-trip")
    assert ok
