"""Each shipped mutant is caught by some obligation, with a counterexample that replays.

    python3 demos/03_mutation_hunt.py
"""

from frikt import targets
from frikt.checker import prove_symbolic
from frikt.checker.runner import RunConfig, check_obligation
from frikt.evaluator import CompiledUnit

config = RunConfig(random_n=50_000, seed=0)

for name in targets.list_mutants():
    entry = targets.load_mutant(name)
    print(f"\n== {name}: {entry.source.splitlines()[0]}")
    compiled = CompiledUnit(entry.unit)
    for ob in entry.obligations:
        modes = [m for m in ("exhaustive", "random") if m in ob.modes]
        if not modes:
            continue
        verdict = check_obligation(ob, compiled, modes[0], config)
        if verdict.name != "refuted":
            continue
        cx = verdict.counterexample
        print(f"   {ob.id} [{modes[0]}]: {cx}")
        print(f"   replay on the reference evaluator: {cx.replay(entry.unit)} (matches: {cx.validate(entry.unit)})")
        if "symbolic" in ob.modes:
            print(f"   symbolic mode says: {prove_symbolic(entry.unit, ob).name}")
        break
