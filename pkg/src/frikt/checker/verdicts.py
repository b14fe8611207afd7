"""Verdicts produced by the checker and their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import evaluator as ev
from ..ir import Outcome, format_value


@dataclass(frozen=True)
class TraceStep:
    rule: str
    site: str
    detail: str = ""

    def to_json(self):
        return {"rule": self.rule, "site": self.site, "detail": self.detail}

    def __str__(self):
        return f"{self.rule} @ {self.site}" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True)
class Counterexample:
    """A concrete input that breaks an obligation, with everything needed to replay it."""

    target: str
    env: tuple  # tuple[(param, value), ...] in signature order
    outcome: Outcome
    reason: str
    expected: Optional[object] = None

    @property
    def args(self):
        return [v for _, v in self.env]

    def replay(self, unit, fuel=1 << 40) -> Outcome:
        """Re-run on the reference evaluator."""
        return ev.eval_function(unit, self.target, self.args, fuel)

    def validate(self, unit) -> bool:
        return self.replay(unit) == self.outcome

    def to_json(self):
        d = {
            "target": self.target,
            "env": {k: _json_value(v) for k, v in self.env},
            "outcome": str(self.outcome),
            "reason": self.reason,
        }
        if self.expected is not None:
            d["expected"] = _json_value(self.expected)
        return d

    def __str__(self):
        env = ", ".join(f"{k}={format_value(v)}" for k, v in self.env)
        return f"{self.target}({env}) -> {self.outcome}: {self.reason}"


def _json_value(v):
    if isinstance(v, tuple):
        return list(v)
    return v


@dataclass(frozen=True)
class Proved:
    trace: tuple = ()

    name = "proved"

    def detail(self):
        return {"trace": [s.to_json() for s in self.trace]}

    def rules(self):
        return [s.rule for s in self.trace]


@dataclass(frozen=True)
class PassedTests:
    count: int
    seed: Optional[int] = None

    name = "passed_tests"

    def detail(self):
        return {"count": self.count, "seed": self.seed}


@dataclass(frozen=True)
class Refuted:
    counterexample: Counterexample

    name = "refuted"

    def detail(self):
        return {"counterexample": self.counterexample.to_json()}


@dataclass(frozen=True)
class Unknown:
    reason: str

    name = "unknown"

    def detail(self):
        return {"reason": self.reason}


@dataclass(frozen=True)
class Skipped:
    """The obligation does not list the requested mode."""

    reason: str = "mode not listed for this obligation"

    name = "skipped"

    def detail(self):
        return {"reason": self.reason}


Verdict = (Proved, PassedTests, Refuted, Unknown, Skipped)


def is_pass(v) -> bool:
    return isinstance(v, (Proved, PassedTests, Skipped))


@dataclass
class ReportEntry:
    id: str
    target: str
    mode: str
    verdict: object
    millis: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_json(self, timings: bool = False):
        return {
            "id": self.id,
            "target": self.target,
            "mode": self.mode,
            "verdict": self.verdict.name,
            "detail": self.verdict.detail(),
            "millis": round(self.millis, 3) if timings and self.millis is not None else None,
        }


def summarize(v) -> str:
    if isinstance(v, Proved):
        return f"proved ({len(v.trace)} steps)"
    if isinstance(v, PassedTests):
        return f"passed {v.count} tests" + (f" (seed {v.seed})" if v.seed is not None else "")
    if isinstance(v, Refuted):
        return f"refuted: {v.counterexample}"
    if isinstance(v, Unknown):
        return f"unknown: {v.reason}"
    return f"skipped: {v.reason}"


__all__ = ["TraceStep", "Counterexample", "Proved", "PassedTests", "Refuted", "Unknown", "Skipped", "ReportEntry",
           "is_pass", "summarize"]
