"""Walk the round-scheduling kernel through every stage: parse, lower, run, prove, test.

    python3 demos/01_arity_walkthrough.py
"""

from frikt import ir, targets
from frikt.checker import check_exhaustive, prove_symbolic
from frikt.evaluator import CompiledUnit, eval_function

entry = targets.load_corpus(names=["arity"])[0]
fn_name = "compute_log_arity_for_round"
print(entry.source)

# %% Lowering: each `-` becomes a checked subtraction with its own failure path.
body = entry.unit.function(fn_name).body
print("checked subtractions:", ir.count_nodes(body, (ir.CheckedSub,)))

# %% Concrete runs. A final height above the current one underflows.
for args in [(10, None, 4, 3), (10, 8, 4, 5), (4, None, 4, 3), (4, None, 5, 2)]:
    print(args, "->", eval_function(entry.unit, fn_name, args, fuel=10))

# %% Symbolic proofs with their rule traces.
by_id = {ob.id: ob for ob in entry.obligations}
for oid in ("arity_respects_max_bound", "arity_respects_target_distance"):
    verdict = prove_symbolic(entry.unit, by_id[oid])
    print(f"\n{oid}: {verdict.name}")
    for step in verdict.trace:
        print("   ", step)

# %% The same two goals, checked on every point of the [0, 32] domain.
compiled = CompiledUnit(entry.unit)
for oid in ("arity_respects_max_bound", "arity_respects_target_distance"):
    print(oid, check_exhaustive(by_id[oid], compiled))
