"""Run every (obligation, mode) pair of a corpus and collect report entries."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..evaluator import CompiledUnit
from .obligations import MODES, DomainTooLarge, Kind, Obligation
from .symbolic import prove_symbolic
from .testing import DEFAULT_FUEL, check_exhaustive, check_random, check_rejects
from .verdicts import ReportEntry, Skipped, Unknown, is_pass


def default_seed() -> int:
    return int(os.environ.get("FRIKT_SEED", "0"), 0)


@dataclass
class RunConfig:
    corpus: Optional[Path] = None
    targets: Optional[list] = None
    modes: tuple = MODES
    random_n: int = 1_000_000
    seed: int = field(default_factory=default_seed)
    exhaustive_cap: int = 10**8
    workers: int = 1
    report: Optional[Path] = None
    format: str = "json"
    fuel: int = DEFAULT_FUEL
    timings: bool = False


def check_obligation(ob: Obligation, compiled: CompiledUnit, mode: str, config: RunConfig):
    """Verdict for one obligation in one mode."""
    if mode not in ob.modes:
        return Skipped()
    if mode == "symbolic":
        return prove_symbolic(compiled.unit, ob)
    if ob.kind is Kind.REJECTS:
        if mode != "random":
            return Unknown("rejects obligations are checked by their tamper model in random mode")
        return check_rejects(ob, compiled, config.seed, config.fuel)
    if mode == "exhaustive":
        try:
            return check_exhaustive(ob, compiled, config.exhaustive_cap, config.fuel, config.workers)
        except DomainTooLarge as e:
            return Unknown(f"DomainTooLarge: {e}")
    return check_random(ob, compiled, config.random_n, config.seed, config.fuel, config.workers)


def run_entry(entry, config: RunConfig, progress=None) -> list:
    """Report entries for one loaded target, in obligation then mode order."""
    if not entry.ok:
        return [ReportEntry(f"{entry.name}:load", entry.name, "load", Unknown("; ".join(entry.diagnostics)))]
    compiled = CompiledUnit(entry.unit)
    out = []
    for ob in entry.obligations:
        for mode in MODES:
            if mode not in config.modes or mode not in ob.modes:
                continue
            t0 = time.perf_counter()
            verdict = check_obligation(ob, compiled, mode, config)
            millis = (time.perf_counter() - t0) * 1000
            rep = ReportEntry(ob.id, ob.target, mode, verdict, millis)
            out.append(rep)
            if progress is not None:
                progress(rep)
    return out


def run_checks(config: RunConfig, progress=None) -> list:
    from ..targets import CORPUS_ROOT, load_corpus

    entries = load_corpus(config.corpus or CORPUS_ROOT, config.targets)
    report = []
    for entry in entries:
        report += run_entry(entry, config, progress)
    return report


def all_passed(report) -> bool:
    return all(is_pass(r.verdict) for r in report)
