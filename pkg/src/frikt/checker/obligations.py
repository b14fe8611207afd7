"""Obligations: machine-readable theorems about corpus functions.

An obligation names a target function, a kind (``no_panic``, ``bound``,
``equiv`` or ``rejects``), a per-parameter domain, linear preconditions and a
kind-specific goal.  Obligation files are TOML::

    [[obligation]]
    id = "arity_respects_max_bound"
    target = "compute_log_arity_for_round"
    kind = "bound"
    goal = "result <= max_log_arity"
    domain.log_current_height = { min = 0, max = 32 }
    domain.next_input_log_height = { option = true, min = 0, max = 32 }
    pre = []
    modes = ["symbolic", "exhaustive"]

Preconditions and goals are linear (in)equalities over parameter names and
``result``.  A constraint that mentions an ``Option`` parameter only applies
when that parameter is ``Some``; it holds vacuously for ``None``.
"""

from __future__ import annotations

import enum
import itertools
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from ..frontend import TypeAnnot

MODES = ("symbolic", "exhaustive", "random")


class ObligationError(Exception):
    pass


class DomainTooLarge(Exception):
    pass


class Kind(enum.Enum):
    NO_PANIC = "no_panic"
    BOUND = "bound"
    EQUIV = "equiv"
    REJECTS = "rejects"


# ---------------------------------------------------------------------------
# Linear constraints

RESULT = "result"

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(<=|>=|==|<|>|\+|-|\*))")
_RELS = ("<=", ">=", "==", "<", ">")


@dataclass(frozen=True)
class LinExpr:
    """sum(coeffs[v] * v) + const."""

    coeffs: tuple  # sorted tuple of (name, coeff) with coeff != 0
    const: int = 0

    @staticmethod
    def of(coeffs: dict, const: int = 0) -> "LinExpr":
        return LinExpr(tuple(sorted((k, v) for k, v in coeffs.items() if v != 0)), const)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    @property
    def names(self) -> frozenset:
        return frozenset(k for k, _ in self.coeffs)

    def __sub__(self, other):
        d = self.as_dict()
        for k, v in other.coeffs:
            d[k] = d.get(k, 0) - v
        return LinExpr.of(d, self.const - other.const)

    def evaluate(self, env) -> int:
        return sum(c * env[k] for k, c in self.coeffs) + self.const

    def __str__(self):
        parts = []
        for k, c in self.coeffs:
            term = k if abs(c) == 1 else f"{abs(c)}*{k}"
            parts.append(("- " if c < 0 else "+ ") + term)
        if self.const or not parts:
            parts.append(("- " if self.const < 0 else "+ ") + str(abs(self.const)))
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


@dataclass(frozen=True)
class LinConstraint:
    """``lhs rel rhs`` over integers; ``label`` names it in proof traces."""

    lhs: LinExpr
    rel: str
    rhs: LinExpr
    label: str = ""
    text: str = ""

    @property
    def names(self) -> frozenset:
        return self.lhs.names | self.rhs.names

    def holds(self, env) -> bool:
        a, b = self.lhs.evaluate(env), self.rhs.evaluate(env)
        return {"<=": a <= b, ">=": a >= b, "==": a == b, "<": a < b, ">": a > b}[self.rel]

    def normalized(self) -> list:
        """Equivalent list of ``expr <= 0`` forms (integers, so ``<`` tightens by one)."""
        diff = self.lhs - self.rhs
        neg = LinExpr.of({k: -v for k, v in diff.coeffs}, -diff.const)
        if self.rel == "<=":
            return [diff]
        if self.rel == "<":
            return [LinExpr(diff.coeffs, diff.const + 1)]
        if self.rel == ">=":
            return [neg]
        if self.rel == ">":
            return [LinExpr(neg.coeffs, neg.const + 1)]
        return [diff, neg]

    def __str__(self):
        return self.text or f"{self.lhs} {self.rel} {self.rhs}"


def _parse_lin(tokens, i):
    coeffs, const = {}, 0
    sign = 1
    expect_term = True
    while i < len(tokens):
        kind, val = tokens[i]
        if expect_term:
            if kind == "op" and val in "+-":
                sign = sign if val == "+" else -sign
                i += 1
                continue
            if kind == "int":
                if i + 2 < len(tokens) and tokens[i + 1] == ("op", "*") and tokens[i + 2][0] == "name":
                    name = tokens[i + 2][1]
                    coeffs[name] = coeffs.get(name, 0) + sign * int(val)
                    i += 3
                else:
                    const += sign * int(val)
                    i += 1
            elif kind == "name":
                coeffs[val] = coeffs.get(val, 0) + sign
                i += 1
            else:
                raise ObligationError(f"expected a term, found {val!r}")
            expect_term = False
            sign = 1
        else:
            if kind == "op" and val in "+-":
                expect_term = True
                sign = 1 if val == "+" else -1
                i += 1
                continue
            break
    if expect_term:
        raise ObligationError("dangling operator in linear expression")
    return LinExpr.of(coeffs, const), i


def parse_constraint(text: str, label: str = "") -> LinConstraint:
    """Parse ``[label:] lin REL lin`` where lin is a sum of ``[k*]name`` and integers."""
    body = text
    m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*:(?!=)", text)
    if m:
        label, body = m.group(1), text[m.end():]
    tokens = []
    pos = 0
    body = body.strip()
    while pos < len(body):
        m = _TOKEN.match(body, pos)
        if not m or m.end() == pos:
            raise ObligationError(f"cannot parse constraint {text!r}")
        num, name, op = m.groups()
        tokens.append(("int", num) if num else ("name", name) if name else ("op", op))
        pos = m.end()
    lhs, i = _parse_lin(tokens, 0)
    if i >= len(tokens) or tokens[i][0] != "op" or tokens[i][1] not in _RELS:
        raise ObligationError(f"constraint {text!r} needs one of {_RELS}")
    rel = tokens[i][1]
    rhs, j = _parse_lin(tokens, i + 1)
    if j != len(tokens):
        raise ObligationError(f"trailing input in constraint {text!r}")
    return LinConstraint(lhs, rel, rhs, label, body.strip())


# ---------------------------------------------------------------------------
# Domains


def _battery(lo, hi):
    seen = []
    for v in (lo, lo + 1, hi - 1, hi):
        if lo <= v <= hi and v not in seen:
            seen.append(v)
    return seen


@dataclass(frozen=True)
class IntRange:
    min: int
    max: int

    def __post_init__(self):
        if self.min > self.max:
            raise ObligationError(f"empty range [{self.min}, {self.max}]")

    @property
    def size(self):
        return self.max - self.min + 1

    def values(self):
        return range(self.min, self.max + 1)

    def boundary(self):
        return _battery(self.min, self.max)

    def sample(self, rng, n):
        return rng.integers(self.min, self.max, size=n, dtype=np.uint64, endpoint=True).tolist()


@dataclass(frozen=True)
class OptionRange:
    """``None`` (if allowed) followed by ``Some(v)`` for v in [min, max] (if allowed)."""

    min: int = 0
    max: int = (1 << 64) - 1
    none: bool = True
    some: bool = True

    def __post_init__(self):
        if not (self.none or self.some):
            raise ObligationError("option domain excludes both None and Some")

    @property
    def size(self):
        return int(self.none) + (self.max - self.min + 1 if self.some else 0)

    def values(self):
        head = [None] if self.none else []
        return itertools.chain(head, range(self.min, self.max + 1) if self.some else ())

    def boundary(self):
        return ([None] if self.none else []) + (_battery(self.min, self.max) if self.some else [])

    def sample(self, rng, n):
        vals = rng.integers(self.min, self.max, size=n, dtype=np.uint64, endpoint=True).tolist()
        if not self.none:
            return vals
        if not self.some:
            return [None] * n
        # None drawn as often as any single Some value would be, but at least 1 in 8
        p_none = max(1.0 / self.size, 0.125)
        mask = rng.random(n) < p_none
        return [None if m else v for m, v in zip(mask.tolist(), vals)]


@dataclass(frozen=True)
class ArrayRange:
    min_len: int
    max_len: int
    min: int = 0
    max: int = (1 << 64) - 1

    @property
    def size(self):
        k = self.max - self.min + 1
        return sum(k ** n for n in range(self.min_len, self.max_len + 1))

    def values(self):
        elems = range(self.min, self.max + 1)
        for n in range(self.min_len, self.max_len + 1):
            yield from itertools.product(elems, repeat=n)

    def boundary(self):
        out = []
        for n in _battery(self.min_len, self.max_len):
            for v in _battery(self.min, self.max):
                arr = (v,) * n
                if arr not in out:
                    out.append(arr)
        return out

    def sample(self, rng, n):
        lens = rng.integers(self.min_len, self.max_len, size=n, endpoint=True).tolist()
        total = sum(lens)
        flat = rng.integers(self.min, self.max, size=total, dtype=np.uint64, endpoint=True).tolist()
        out, k = [], 0
        for m in lens:
            out.append(tuple(flat[k:k + m]))
            k += m
        return out


@dataclass(frozen=True)
class Choice:
    options: tuple

    @property
    def size(self):
        return len(self.options)

    def values(self):
        return iter(self.options)

    def boundary(self):
        if len(self.options) <= 4:
            return list(self.options)
        o = self.options
        return [o[0], o[1], o[-2], o[-1]]

    def sample(self, rng, n):
        idx = rng.integers(0, len(self.options), size=n).tolist()
        return [self.options[i] for i in idx]


Domain = (IntRange, OptionRange, ArrayRange, Choice)


def domain_from_toml(name: str, spec: dict, ty: Optional[TypeAnnot]):
    spec = dict(spec)
    top = (1 << ty.width) - 1 if ty is not None and ty.is_int else (1 << 64) - 1
    if "values" in spec:
        vals = spec["values"]
        if not isinstance(vals, list) or not vals:
            raise ObligationError(f"domain.{name}.values must be a non-empty list")
        if ty is TypeAnnot.ARRAY_U64:
            return Choice(tuple(tuple(v) for v in vals))
        return Choice(tuple(vals))
    if ty is TypeAnnot.BOOL:
        return Choice((False, True))
    if spec.get("option") or ty is TypeAnnot.OPTION_USIZE:
        return OptionRange(spec.get("min", 0), spec.get("max", top), spec.get("none", True), spec.get("some", True))
    if spec.get("array") or ty is TypeAnnot.ARRAY_U64:
        return ArrayRange(spec.get("min_len", 0), spec.get("max_len", 8), spec.get("min", 0), spec.get("max", top))
    return IntRange(spec.get("min", 0), spec.get("max", top))


def default_domain(ty: TypeAnnot):
    if ty is TypeAnnot.BOOL:
        return Choice((False, True))
    if ty is TypeAnnot.OPTION_USIZE:
        return OptionRange()
    if ty is TypeAnnot.ARRAY_U64:
        return ArrayRange(0, 8)
    return IntRange(0, (1 << ty.width) - 1)


# ---------------------------------------------------------------------------
# Obligations


@dataclass
class Obligation:
    id: str
    target: str
    kind: Kind
    domain: dict  # param name -> domain, in the target's parameter order once bound
    pre: list = field(default_factory=list)  # list[LinConstraint]
    goal: Optional[LinConstraint] = None
    goal_text: str = ""
    spec: str = ""
    tamper: str = ""
    modes: tuple = ("exhaustive",)
    samples: Optional[int] = None
    depth: Optional[IntRange] = None
    instances: int = 1000
    notes: str = ""

    def params(self):
        return list(self.domain)

    def with_pre(self, *extra: str) -> "Obligation":
        """Copy with additional preconditions (used by invariance tests)."""
        more = [parse_constraint(t, f"extra{i}") for i, t in enumerate(extra)]
        return Obligation(**{**self.__dict__, "pre": list(self.pre) + more})


def bind_domains(ob: Obligation, params) -> Obligation:
    """Order the domain by the function signature and fill unspecified params."""
    ordered = {}
    for name, ty in params:
        ordered[name] = ob.domain.get(name) or default_domain(ty)
    extra = set(ob.domain) - set(ordered)
    if extra:
        raise ObligationError(f"{ob.id}: domain names unknown parameters {sorted(extra)}")
    names = set(ordered) | {RESULT}
    for c in list(ob.pre) + ([ob.goal] if ob.goal is not None else []):
        bad = c.names - names
        if bad:
            raise ObligationError(f"{ob.id}: constraint {c} mentions undeclared {sorted(bad)}")
    ob.domain = ordered
    return ob


def obligation_from_dict(d: dict, params=None) -> Obligation:
    """Build an Obligation; ``params`` (name, TypeAnnot) pairs validate and order the domain."""
    try:
        oid = d["id"]
        target = d["target"]
        kind = Kind(d["kind"])
    except KeyError as e:
        raise ObligationError(f"obligation missing field {e}") from None
    except ValueError:
        raise ObligationError(f"unknown obligation kind {d.get('kind')!r}") from None
    types = dict(params or [])
    domain = {name: domain_from_toml(name, spec, types.get(name)) for name, spec in d.get("domain", {}).items()}
    pre = [parse_constraint(text, f"pre{i}") for i, text in enumerate(d.get("pre", []))]
    goal_text = d.get("goal", "")
    if kind is Kind.BOUND and not goal_text.strip():
        raise ObligationError(f"{oid}: bound obligation needs a goal")
    goal = parse_constraint(goal_text, "goal") if kind is Kind.BOUND else None
    modes = tuple(d.get("modes", ["exhaustive"]))
    for m in modes:
        if m not in MODES:
            raise ObligationError(f"{oid}: unknown mode {m!r}")
    if kind is Kind.EQUIV and not d.get("spec"):
        raise ObligationError(f"{oid}: equiv obligation needs a spec name")
    if kind is Kind.REJECTS and not d.get("tamper"):
        raise ObligationError(f"{oid}: rejects obligation needs a tamper model")
    depth = d.get("depth")
    ob = Obligation(
        id=oid, target=target, kind=kind, domain=domain, pre=pre, goal=goal, goal_text=goal_text,
        spec=d.get("spec", ""), tamper=d.get("tamper", ""), modes=modes, samples=d.get("samples"),
        depth=IntRange(depth.get("min", 0), depth.get("max", 8)) if depth else None,
        instances=d.get("instances", 1000), notes=d.get("notes", ""),
    )
    if params is not None:
        bind_domains(ob, params)
    return ob


def load_obligations(path, signatures: Optional[dict] = None) -> list:
    """Read an obligations TOML file.

    ``signatures`` maps function names to their ``(name, TypeAnnot)``
    parameter lists; when given, targets must exist and domains are bound.
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    out = []
    seen = set()
    for d in doc.get("obligation", []):
        params = None
        if signatures is not None:
            if d.get("target") not in signatures:
                raise ObligationError(f"{d.get('id')}: unknown target {d.get('target')!r}")
            params = signatures[d["target"]]
        ob = obligation_from_dict(d, params)
        if ob.id in seen:
            raise ObligationError(f"duplicate obligation id {ob.id}")
        seen.add(ob.id)
        out.append(ob)
    return out


def obligations_path(target_dir) -> Path:
    return Path(target_dir) / "obligations.toml"
