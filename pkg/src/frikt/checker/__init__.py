"""Obligations and the three ways of discharging them: symbolic proof,
exhaustive enumeration and seeded random testing."""

from .entail import DiffConstraint, entails
from .obligations import (Kind, Obligation, ObligationError, DomainTooLarge, load_obligations,
                          obligation_from_dict, parse_constraint)
from .runner import RunConfig, check_obligation, run_checks
from .symbolic import prove_symbolic
from .testing import SPEC_ADAPTERS, TAMPER_MODELS, check_exhaustive, check_random, check_rejects
from .verdicts import Counterexample, PassedTests, Proved, Refuted, Skipped, TraceStep, Unknown

__all__ = [
    "DiffConstraint", "entails", "Kind", "Obligation", "ObligationError", "DomainTooLarge", "load_obligations",
    "obligation_from_dict", "parse_constraint", "RunConfig", "check_obligation", "run_checks", "prove_symbolic",
    "SPEC_ADAPTERS", "TAMPER_MODELS", "check_exhaustive", "check_random", "check_rejects", "Counterexample",
    "PassedTests", "Proved", "Refuted", "Skipped", "TraceStep", "Unknown",
]
