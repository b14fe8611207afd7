"""Concrete checking modes: exhaustive enumeration, seeded random testing and
tamper-rejection checks, plus the registry of spec adapters they compare
against.

Every mode evaluates kernels through :class:`~frikt.evaluator.CompiledUnit`.
Whenever a counterexample is found it is replayed on the reference
evaluator before being reported, so a Refuted verdict never rests on the
compiled engine alone.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np

from .. import specs
from ..evaluator import CompiledUnit, DivergeSignal, PanicSignal
from ..ir import Diverge, Ok, Panic
from .obligations import RESULT, DomainTooLarge, Kind, Obligation, OptionRange
from .verdicts import Counterexample, PassedTests, Refuted, Unknown

DEFAULT_FUEL = 1 << 20
BLOCK = 1 << 15


class EngineDisagreement(Exception):
    """The compiled engine and the reference evaluator gave different outcomes."""


# ---------------------------------------------------------------------------
# Spec adapters: env dict -> expected value, or None when the spec says "panic"


@lru_cache(maxsize=None)
def _modulus(p):
    return specs.PrimeModulus(p)


def _arity(env):
    return specs.arity_spec(specs.ArityInputs(
        env["log_current_height"], env["next_input_log_height"], env["log_final_height"], env["max_log_arity"]))


def _fold_step(env):
    return specs.fold_step_spec(
        specs.FoldInputs(env["lo"], env["hi"], env["beta"], env["x_inv"], env["two_inv"]), _modulus(env["p"]))


def _poly_eval(env):
    m = _modulus(env["p"])
    return specs.poly_eval(specs.DensePoly(env["coeffs"], m), env["x"])


def _horner(env):
    m = _modulus(env["p"])
    return specs.horner_spec(specs.DensePoly(env["coeffs"], m), env["x"])


def _fold_round(env):
    m = _modulus(env["p"])
    if env["two_inv"] != m.inverse(2):
        raise ValueError("two_inv must be the inverse of 2")
    return specs.fold_round_spec(env["evals"], env["x_invs"], env["beta"], m)[env["index"]]


def _adc(env):
    a, b, c = env["a"], env["b"], env["carry_in"]
    s, carry = specs.adc_spec(a, b, c)
    if s + (carry << 32) != a + b + c:
        raise AssertionError(f"adc spec broke sum + 2^32*carry = a + b + c at {a}, {b}, {c}")
    return s | carry << 32


def _binary(fn):
    return lambda env: fn(env["a"], env["b"])


SPEC_ADAPTERS = {
    "arity_spec": _arity,
    "fold_step_spec": _fold_step,
    "poly_eval": _poly_eval,
    "horner_spec": _horner,
    "fold_round_spec": _fold_round,
    "adc_spec": _adc,
    "mersenne31_add_spec": _binary(specs.mersenne31_add_spec),
    "mersenne31_mul_spec": _binary(specs.mersenne31_mul_spec),
    "koalabear_add_spec": _binary(specs.koalabear_add_spec),
    "koalabear_mul_spec": _binary(specs.koalabear_mul_spec),
}


# ---------------------------------------------------------------------------
# Compiled constraint predicates


def _constraint_src(c, index, option_params, result_var="r"):
    terms = []
    for name, k in c.lhs.coeffs:
        terms.append((name, k))
    for name, k in c.rhs.coeffs:
        terms.append((name, -k))

    def ref(name):
        return result_var if name == RESULT else f"a[{index[name]}]"

    lhs = " + ".join(f"({k})*{ref(n)}" for n, k in terms) or "0"
    const = c.rhs.const - c.lhs.const
    rel = "==" if c.rel == "==" else c.rel
    body = f"({lhs}) {rel} {const}"
    guards = [f"a[{index[n]}] is None" for n in sorted(c.names & option_params)]
    return f"({' or '.join(guards + [body])})" if guards else f"({body})"


def compile_predicate(constraints, params, option_params):
    """Python predicate ``f(args, result)`` for a conjunction of linear constraints."""
    index = {n: i for i, n in enumerate(params)}
    parts = [_constraint_src(c, index, option_params) for c in constraints]
    src = "lambda a, r=None: " + (" and ".join(parts) if parts else "True")
    return eval(src, {})  # noqa: S307 - generated from parsed constraints only


def _option_params(ob: Obligation):
    return {n for n, d in ob.domain.items() if isinstance(d, OptionRange)}


# ---------------------------------------------------------------------------
# Per-point checking


class PointChecker:
    """Evaluates one obligation at concrete argument tuples."""

    def __init__(self, ob: Obligation, compiled: CompiledUnit, fuel=DEFAULT_FUEL):
        self.ob = ob
        self.compiled = compiled
        self.fn = compiled.raw(ob.target)
        self.fuel = fuel
        self.params = ob.params()
        opts = _option_params(ob)
        self.pre = compile_predicate(ob.pre, self.params, opts)
        self.goal = compile_predicate([ob.goal], self.params, opts) if ob.kind is Kind.BOUND else None
        if ob.kind is Kind.EQUIV:
            try:
                self.adapter = SPEC_ADAPTERS[ob.spec]
            except KeyError:
                raise KeyError(f"{ob.id}: unknown spec {ob.spec!r}") from None

    def outcome(self, args):
        try:
            return Ok(self.fn(*args, [self.fuel]))
        except PanicSignal as sig:
            return Panic(sig.kind)
        except DivergeSignal:
            return Diverge()

    def failure(self, args):
        """None when the obligation holds at ``args``, else (outcome, expected, reason)."""
        kind = self.ob.kind
        if kind is Kind.BOUND:
            try:
                v = self.fn(*args, [self.fuel])
            except (PanicSignal, DivergeSignal):
                return None
            if self.goal(args, v):
                return None
            return Ok(v), None, f"goal {self.ob.goal} fails"
        if kind is Kind.NO_PANIC:
            try:
                self.fn(*args, [self.fuel])
            except PanicSignal as sig:
                return Panic(sig.kind), None, f"panics with {sig.kind.value}"
            except DivergeSignal:
                return Diverge(), None, "runs out of fuel"
            return None
        if kind is Kind.EQUIV:
            expected = self.adapter(dict(zip(self.params, args)))
            out = self.outcome(args)
            if expected is None:
                if isinstance(out, Panic):
                    return None
                return out, None, f"spec {self.ob.spec} is undefined here but the kernel did not panic"
            if isinstance(out, Ok) and out.value == expected and \
                    isinstance(out.value, bool) == isinstance(expected, bool):
                return None
            return out, expected, f"differs from spec {self.ob.spec}"
        raise ValueError(f"point checks do not apply to {kind.value} obligations")

    def counterexample(self, args, found) -> Counterexample:
        outcome, expected, reason = found
        cx = Counterexample(self.ob.target, tuple(zip(self.params, args)), outcome, reason, expected)
        replayed = cx.replay(self.compiled.unit, self.fuel)
        if replayed != outcome:
            raise EngineDisagreement(f"compiled engine gave {outcome}, reference gave {replayed} on {cx}")
        return cx


# ---------------------------------------------------------------------------
# Exhaustive


def cardinality(ob: Obligation) -> int:
    return math.prod(d.size for d in ob.domain.values())


def _exhaustive_range(ob, compiled, start, stop, fuel):
    pc = PointChecker(ob, compiled, fuel)
    space = itertools.product(*(list(d.values()) for d in ob.domain.values()))
    count = 0
    pre, failure = pc.pre, pc.failure
    for i, args in enumerate(itertools.islice(space, start, stop), start):
        if not pre(args):
            continue
        count += 1
        found = failure(args)
        if found is not None:
            return count, i, args, found
    return count, None, None, None


def _exhaustive_worker(unit, ob, start, stop, fuel):
    count, idx, args, found = _exhaustive_range(ob, CompiledUnit(unit), start, stop, fuel)
    return count, idx, args


def check_exhaustive(ob: Obligation, compiled: CompiledUnit, cap=10**8, fuel=DEFAULT_FUEL, workers=1):
    """Enumerate the whole domain in lexicographic order (``None`` before ``Some``)."""
    n = cardinality(ob)
    if n > cap:
        raise DomainTooLarge(f"{ob.id}: {n} points exceeds the exhaustive cap {cap}")
    if workers <= 1 or n < 4 * BLOCK:
        count, _, args, found = _exhaustive_range(ob, compiled, 0, n, fuel)
        if found is not None:
            return Refuted(PointChecker(ob, compiled, fuel).counterexample(args, found))
        return PassedTests(count)
    step = -(-n // workers)
    bounds = [(s, min(s + step, n)) for s in range(0, n, step)]
    with ProcessPoolExecutor(workers) as pool:
        results = list(pool.map(_exhaustive_worker, *zip(*[(compiled.unit, ob, s, e, fuel) for s, e in bounds])))
    failures = [(idx, args) for _, idx, args in results if idx is not None]
    if failures:
        _, args = min(failures)
        pc = PointChecker(ob, compiled, fuel)
        return Refuted(pc.counterexample(args, pc.failure(args)))
    return PassedTests(sum(c for c, _, _ in results))


# ---------------------------------------------------------------------------
# Random


def boundary_points(ob: Obligation):
    return itertools.product(*(d.boundary() for d in ob.domain.values()))


def sample_block(ob: Obligation, seed: int, block: int, size: int):
    """Deterministic block of random argument tuples; block b depends only on (seed, b)."""
    rng = np.random.default_rng([seed, block])
    cols = [d.sample(rng, size) for d in ob.domain.values()]
    return list(zip(*cols))


def _random_blocks(ob, compiled, seed, n, blocks, fuel):
    pc = PointChecker(ob, compiled, fuel)
    pre, failure = pc.pre, pc.failure
    count = 0
    for b in blocks:
        size = min(BLOCK, n - b * BLOCK)
        for args in sample_block(ob, seed, b, size):
            if not pre(args):
                continue
            count += 1
            found = failure(args)
            if found is not None:
                return count, (b, args, found)
    return count, None


def _random_worker(unit, ob, seed, n, blocks, fuel):
    count, hit = _random_blocks(ob, CompiledUnit(unit), seed, n, blocks, fuel)
    return count, (None if hit is None else hit[:2])


def effective_samples(ob: Obligation, random_n: int) -> int:
    return min(ob.samples, random_n) if ob.samples else random_n


def check_random(ob: Obligation, compiled: CompiledUnit, n=10**6, seed=0, fuel=DEFAULT_FUEL, workers=1):
    """Boundary battery first, then ``n`` seeded samples (minus those failing preconditions)."""
    pc = PointChecker(ob, compiled, fuel)
    count = 0
    for args in boundary_points(ob):
        if not pc.pre(args):
            continue
        count += 1
        found = pc.failure(args)
        if found is not None:
            return Refuted(pc.counterexample(args, found))
    n = effective_samples(ob, n)
    nblocks = -(-n // BLOCK)
    if workers <= 1 or nblocks < 2:
        c, hit = _random_blocks(ob, compiled, seed, n, range(nblocks), fuel)
        if hit is not None:
            return Refuted(pc.counterexample(hit[1], hit[2]))
        return PassedTests(count + c, seed)
    shards = [list(range(w, nblocks, workers)) for w in range(workers)]
    with ProcessPoolExecutor(workers) as pool:
        results = list(pool.map(_random_worker, *zip(*[(compiled.unit, ob, seed, n, s, fuel) for s in shards])))
    hits = [hit for _, hit in results if hit is not None]
    if hits:
        _, args = min(hits, key=lambda h: h[0])
        return Refuted(pc.counterexample(args, pc.failure(args)))
    return PassedTests(count + sum(c for c, _ in results), seed)


# ---------------------------------------------------------------------------
# Tamper rejection


def merkle_single_bit(ob: Obligation, seed: int):
    """Yield (args, must_accept, description) for valid paths and all single-bit tampers.

    For each depth in ``ob.depth`` draw ``ob.instances`` random valid paths;
    each is followed by every single-bit flip of the leaf and of each sibling.
    """
    depth = ob.depth
    lo, hi = (0, 8) if depth is None else (depth.min, depth.max)
    for d in range(lo, hi + 1):
        rng = np.random.default_rng([seed, d])
        leaves = rng.integers(0, specs.MASK64, size=ob.instances, dtype=np.uint64, endpoint=True).tolist()
        sibs = rng.integers(0, specs.MASK64, size=(ob.instances, d), dtype=np.uint64, endpoint=True).tolist()
        sides = rng.integers(0, 1, size=(ob.instances, d), endpoint=True).tolist()
        for leaf, sib, side in zip(leaves, sibs, sides):
            sib, side = tuple(sib), tuple(side)
            root = specs.merkle_root_spec(leaf, [(s, specs.Side(k)) for s, k in zip(sib, side)])
            yield (leaf, sib, side, root), True, f"valid path of depth {d}"
            for bit in range(64):
                yield (leaf ^ (1 << bit), sib, side, root), False, f"leaf bit {bit} flipped"
            for i in range(d):
                for bit in range(64):
                    tampered = sib[:i] + (sib[i] ^ (1 << bit),) + sib[i + 1:]
                    yield (leaf, tampered, side, root), False, f"sibling {i} bit {bit} flipped"


TAMPER_MODELS = {"merkle_single_bit": merkle_single_bit}


def check_rejects(ob: Obligation, compiled: CompiledUnit, seed=0, fuel=DEFAULT_FUEL):
    try:
        model = TAMPER_MODELS[ob.tamper]
    except KeyError:
        return Unknown(f"unknown tamper model {ob.tamper!r}")
    fn = compiled.raw(ob.target)
    params = [n for n, _ in compiled.unit.function(ob.target).params]
    count = 0
    for args, accept, what in model(ob, seed):
        count += 1
        try:
            v = fn(*args, [fuel])
            out = Ok(v)
        except PanicSignal as sig:
            out = Panic(sig.kind)
        except DivergeSignal:
            out = Diverge()
        if out != Ok(accept) or not isinstance(out.value, bool):
            reason = ("valid path rejected" if accept else "tampered instance accepted") + f" ({what})"
            cx = Counterexample(ob.target, tuple(zip(params, args)), out, reason, accept)
            replayed = cx.replay(compiled.unit, fuel)
            if replayed != out:
                raise EngineDisagreement(f"compiled engine gave {out}, reference gave {replayed} on {cx}")
            return Refuted(cx)
    return PassedTests(count, seed)
