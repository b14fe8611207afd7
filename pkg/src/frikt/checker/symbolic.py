"""Symbolic proofs of bound and no-panic obligations.

The prover executes a loop-free IR function over symbolic integers.  Every
integer is ``symbol + offset`` (or a constant); what is known about symbols
is a conjunction of difference constraints with provenance labels.  The
rules applied while walking the IR are

* ``PeelBind``: a ``Bind`` whose right-hand side succeeded binds its value;
* ``MatchOptSplit``: case split on an ``Option`` parameter;
* ``SubGuardSplit``: split a checked subtraction ``a - b`` into the panic
  child (``a < b``) and the success child (``b <= a``), introducing
  ``d = a - b`` which later rewrites goal terms;
* ``IteBoundLeft`` / ``IteBoundRight``: for ``if x < y { x } else { y }``
  record ``r <= x`` and ``r <= y`` without splitting;
* ``IteSplit``: general case split on a condition;
* ``Inline``: calls are inlined (call graphs are acyclic);
* guard steps for additions, multiplications, remainders and shifts,
  discharged from interval bounds implied by the constraints.

Goals are success-conditional for ``bound`` obligations: a panic child is
closed either because its constraints are contradictory or because the
obligation only speaks about successful runs.  ``no_panic`` obligations
need every panic child closed by contradiction.

Three attempts are made in order: subtractions kept opaque, subtractions
split, and finally every ``if`` split instead of bounded.  The first attempt
that entails the goal on every leaf wins.  Bound steps appear in the trace
only when some leaf's entailment used the fact they introduced.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .. import ir
from ..frontend import TypeAnnot
from .entail import ZERO, DiffConstraint, DiffGraph, entails_with_support
from .obligations import RESULT, Kind, LinConstraint, Obligation, OptionRange
from .verdicts import Proved, TraceStep, Unknown


class UnsupportedFragment(Exception):
    pass


class ProofFailure(Exception):
    pass


@dataclass(frozen=True)
class Term:
    """``sym + off``; a constant when ``sym`` is None."""

    sym: Optional[str]
    off: int = 0

    @property
    def is_const(self):
        return self.sym is None

    def __str__(self):
        if self.sym is None:
            return str(self.off)
        if self.off == 0:
            return self.sym
        return f"{self.sym} {'+' if self.off > 0 else '-'} {abs(self.off)}"


@dataclass(frozen=True)
class Cond:
    op: str  # "lt" | "le" | "eq"
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class OptVal:
    kind: str  # "none" | "some" | "param"
    payload: Optional[Term] = None
    param: str = ""


@dataclass(frozen=True)
class BoolSym:
    name: str


def _node(t: Term):
    return ZERO if t.sym is None else t.sym


def diff_le(a: Term, b: Term, c: int, label: str) -> DiffConstraint:
    """``a - b <= c`` for terms."""
    return DiffConstraint(_node(a), _node(b), c - a.off + b.off, label)


@dataclass
class Context:
    facts: tuple = ()
    defs: tuple = ()  # (d, a, b): d = a - b
    opt_state: tuple = ()  # ((param, "none"|"some"), ...)
    path: tuple = ()

    def add(self, *facts) -> "Context":
        return replace(self, facts=self.facts + tuple(facts))

    def graph(self):
        return DiffGraph(self.facts)

    def state_of(self, param):
        return dict(self.opt_state).get(param)

    def with_state(self, param, state):
        return replace(self, opt_state=self.opt_state + ((param, state),))


@dataclass
class _Config:
    split_subs: bool
    min_rules: bool
    name: str


PHASES = (
    _Config(split_subs=False, min_rules=True, name="opaque subtraction"),
    _Config(split_subs=True, min_rules=True, name="subtraction split"),
    _Config(split_subs=True, min_rules=False, name="full case split"),
)


def describe(e) -> str:
    if isinstance(e, ir.Var):
        return e.name
    if isinstance(e, ir.Lit):
        return ir.format_value(e.value)
    ops = {ir.CheckedAdd: "+", ir.CheckedSub: "-", ir.CheckedMul: "*", ir.Rem: "%", ir.Shl: "<<", ir.Shr: ">>",
           ir.BitAnd: "&", ir.BitOr: "|", ir.BitXor: "^", ir.CmpLt: "<", ir.CmpLe: "<=", ir.CmpEq: "=="}
    if type(e) in ops:
        return f"{describe(e.lhs)} {ops[type(e)]} {describe(e.rhs)}"
    if isinstance(e, ir.Call):
        return f"{e.fn}({', '.join(describe(a) for a in e.args)})"
    if isinstance(e, (ir.WidenCast, ir.WrapCast)):
        return f"{describe(e.inner)} as {e.dst.value}"
    if isinstance(e, ir.MatchOpt):
        return f"match {describe(e.scrutinee)}"
    if isinstance(e, ir.Ite):
        return f"if {describe(e.cond)}"
    if isinstance(e, ir.MkSome):
        return f"Some({describe(e.inner)})"
    return f"<{type(e).__name__}>"


def _readable(label: str) -> str:
    """Drop the uniquifying counter: ``IteBoundRight#7@site`` -> ``IteBoundRight@site``."""
    head, sep, site = label.partition("@")
    return head.split("#")[0] + sep + site


class _Attempt:
    def __init__(self, unit: ir.IrUnit, ob: Obligation, cfg: _Config):
        self.unit = unit
        self.ob = ob
        self.cfg = cfg
        self.counter = 0
        self.steps = []  # (TraceStep, pending label or None)
        self.support = {}  # label -> labels it was derived from
        self.used = set()
        self.fn = unit.function(ob.target)
        self.param_types = dict(self.fn.params)
        self.success_conditional = ob.kind is Kind.BOUND

    # -- bookkeeping ------------------------------------------------------

    def fresh(self, hint: str) -> str:
        self.counter += 1
        return f"{hint}#{self.counter}"

    def label(self, rule: str, site: str) -> str:
        self.counter += 1
        return f"{rule}#{self.counter}@{site}"

    def step(self, rule, site, detail="", pending=None):
        self.steps.append((TraceStep(rule, site, detail), pending))

    def width_facts(self, sym, width):
        lab = f"width({sym})"
        return (DiffConstraint(ZERO, sym, 0, lab), DiffConstraint(sym, ZERO, (1 << width) - 1, lab))

    def close_used(self, labels):
        todo = list(labels)
        while todo:
            lab = todo.pop()
            if lab in self.used:
                continue
            self.used.add(lab)
            todo.extend(self.support.get(lab, ()))

    # -- bounds -------------------------------------------------------------

    def ub(self, ctx, t: Term):
        if t.is_const:
            return t.off, []
        d, path = ctx.graph().upper_bound(t.sym)
        return (None if d is None else d + t.off), path

    def lb(self, ctx, t: Term):
        if t.is_const:
            return t.off, []
        d, path = ctx.graph().lower_bound(t.sym)
        return (None if d is None else d + t.off), path

    def new_sym(self, ctx, hint, width, lo=None, hi=None):
        s = self.fresh(hint)
        facts = list(self.width_facts(s, width))
        lab = f"def({s})"
        if lo is not None and lo > 0:
            facts.append(DiffConstraint(ZERO, s, -lo, lab))
        if hi is not None and hi < (1 << width) - 1:
            facts.append(DiffConstraint(s, ZERO, hi, lab))
        return Term(s), ctx.add(*facts)

    def fresh_leaf(self, ctx, hint, width, lo=None, hi=None):
        t, c1 = self.new_sym(ctx, hint, width, lo, hi)
        return c1, t

    # -- preconditions and goals -------------------------------------------

    def lin_to_diffs(self, constraint: LinConstraint, binding, label):
        """Translate to difference constraints, or None when outside the fragment."""
        out = []
        for expr in constraint.normalized():
            coeffs, const = {}, expr.const
            for name, c in expr.coeffs:
                t = binding[name]
                const += c * t.off
                if t.sym is not None:
                    coeffs[t.sym] = coeffs.get(t.sym, 0) + c
            coeffs = {k: v for k, v in coeffs.items() if v}
            coeffs, const = self.rewrite_defs(coeffs, const, binding.get("__defs__", ()))
            dc = self.to_diff(coeffs, const, label)
            if dc is None:
                return None
            out.append(dc)
        return out

    @staticmethod
    def rewrite_defs(coeffs, const, defs):
        changed = True
        while changed:
            changed = False
            for d, a, b in defs:
                if a.sym is None or b.sym is None:
                    continue
                k = coeffs.get(a.sym, 0)
                if k and coeffs.get(b.sym, 0) == -k:
                    # k*A - k*B = k*d - k*a.off + k*b.off
                    del coeffs[a.sym]
                    del coeffs[b.sym]
                    coeffs[d] = coeffs.get(d, 0) + k
                    coeffs = {s: v for s, v in coeffs.items() if v}
                    const += -k * a.off + k * b.off
                    changed = True
        return coeffs, const

    @staticmethod
    def to_diff(coeffs, const, label):
        """sum(coeffs) + const <= 0 as a difference constraint."""
        items = sorted(coeffs.items())
        if not items:
            return DiffConstraint(ZERO, ZERO, -const, label)
        if len(items) == 1:
            (s, c), = items
            if c == 1:
                return DiffConstraint(s, ZERO, -const, label)
            if c == -1:
                return DiffConstraint(ZERO, s, -const, label)
            return None
        if len(items) == 2:
            (s1, c1), (s2, c2) = items
            if c1 == 1 and c2 == -1:
                return DiffConstraint(s1, s2, -const, label)
            if c1 == -1 and c2 == 1:
                return DiffConstraint(s2, s1, -const, label)
        return None

    def option_params(self):
        return {n for n, t in self.fn.params if t is TypeAnnot.OPTION_USIZE}

    def pre_facts(self, ctx, only_param=None):
        """Difference-logic preconditions.  Ones mentioning an Option parameter apply once it is Some."""
        opts = self.option_params()
        binding = {n: Term(n) for n, _ in self.fn.params}
        facts = []
        for c in self.ob.pre:
            mentioned = c.names & opts
            if only_param is None and mentioned:
                continue
            if only_param is not None and only_param not in mentioned:
                continue
            if any(ctx.state_of(p) != "some" for p in mentioned if p != only_param):
                continue
            diffs = self.lin_to_diffs(c, binding, c.label)
            if diffs is not None:
                facts.extend(diffs)
        return facts

    # -- execution ------------------------------------------------------------

    def run(self):
        ctx = Context()
        env = {}
        for name, ty in self.fn.params:
            if ty.is_int:
                env[name] = Term(name)
                ctx = ctx.add(*self.width_facts(name, ty.width))
            elif ty is TypeAnnot.OPTION_USIZE:
                env[name] = OptVal("param", param=name)
            elif ty is TypeAnnot.BOOL:
                env[name] = BoolSym(name)
            else:
                raise UnsupportedFragment("array parameter")
        ctx = ctx.add(*self.pre_facts(ctx))
        if not ctx.graph().feasible():
            self.step("Vacuous", self.fn.name, "preconditions are contradictory")
            return
        leaves = self.exec(self.fn.body, env, ctx, self.fn.name)
        for ctx, value in leaves:
            if self.ob.kind is Kind.BOUND:
                self.check_goal(ctx, value)
        if self.ob.kind is Kind.NO_PANIC:
            self.step("NoPanic", self.fn.name, f"{len(leaves)} success path(s), every panic child closed")

    def check_goal(self, ctx, value):
        goal = self.ob.goal
        binding = {}
        for name, ty in self.fn.params:
            binding[name] = Term(name)
        if not isinstance(value, Term):
            raise ProofFailure("goal over a non-integer result")
        binding[RESULT] = value
        where = " / ".join(ctx.path) or "main path"
        for p in sorted(goal.names & self.option_params()):
            state = ctx.state_of(p)
            if state == "none":
                self.step("Vacuous", where, f"goal mentions {p}, which is None here")
                return
            if state is None:
                ctx = ctx.with_state(p, "some").add(*self.width_facts(p, 64))
                ctx = ctx.add(*self.pre_facts(ctx, only_param=p))
        binding["__defs__"] = ctx.defs
        diffs = self.lin_to_diffs(goal, binding, "goal")
        if diffs is None:
            raise ProofFailure(f"goal {goal} is not a difference constraint on path {where}")
        used = set()
        for dc in diffs:
            ok, support = entails_with_support(ctx.facts, dc)
            if not ok:
                raise ProofFailure(f"goal {goal} not entailed on path {where} ({self.cfg.name})")
            used |= support
        self.close_used(used)
        hyps = sorted({_readable(lab) for lab in used if not lab.startswith(("width(", "def(", "range_"))})
        self.step("Entail", where, f"{goal} from " + (", ".join(hyps) if hyps else "bounds"))

    def panic_child(self, ctx, fact, rule, site, what):
        """Close the panic child with hypothesis ``fact``; returns a description."""
        g = DiffGraph(ctx.facts + (fact,))
        cycle = g.negative_cycle()
        if cycle is not None:
            labels = sorted({k.label for k in cycle} - {fact.label})
            self.close_used(labels)
            named = sorted({_readable(lab) for lab in labels if not lab.startswith(("width(", "def(", "range_"))})
            return f"{what} branch closed by contradiction" + (f" with {', '.join(named)}" if named else "")
        if self.success_conditional:
            return f"{what} branch closed by success assumption"
        raise ProofFailure(f"cannot rule out {what} at {site}")

    def exec(self, e, env, ctx, hint):
        """List of (ctx, value) for every successful path."""
        if isinstance(e, ir.Lit):
            v = e.value
            if isinstance(v, bool):
                return [(ctx, v)]
            if v is None:
                return [(ctx, OptVal("none"))]
            if isinstance(v, int):
                return [(ctx, Term(None, v))]
            raise UnsupportedFragment("array literal")
        if isinstance(e, ir.Var):
            return [(ctx, env[e.name])]
        if isinstance(e, ir.Bind):
            self.step("PeelBind", e.name, describe(e.rhs))
            out = []
            for c1, v in self.exec(e.rhs, env, ctx, e.name):
                out += self.exec(e.body, {**env, e.name: v}, c1, hint)
            return out
        if isinstance(e, (ir._Binary, ir._Compare)):
            out = []
            for c1, a in self.exec(e.lhs, env, ctx, hint):
                for c2, b in self.exec(e.rhs, env, c1, hint):
                    out += self.binary(e, a, b, c2, hint)
            return out
        if isinstance(e, ir.WidenCast):
            out = []
            for c1, v in self.exec(e.inner, env, ctx, hint):
                if isinstance(v, Term):
                    out.append((c1, v))
                elif isinstance(v, bool):
                    out.append((c1, Term(None, int(v))))
                else:
                    out.append(self.fresh_leaf(c1, hint, e.dst.width, 0, 1))
            return out
        if isinstance(e, ir.WrapCast):
            out = []
            top = (1 << e.dst.width) - 1
            for c1, v in self.exec(e.inner, env, ctx, hint):
                if isinstance(v, bool):
                    out.append((c1, Term(None, int(v))))
                elif v.is_const:
                    out.append((c1, Term(None, v.off & top)))
                elif self.ub(c1, v)[0] is not None and self.ub(c1, v)[0] <= top:
                    out.append((c1, v))
                else:
                    out.append(self.fresh_leaf(c1, hint, e.dst.width))
            return out
        if isinstance(e, ir.MkSome):
            return [(c1, OptVal("some", v)) for c1, v in self.exec(e.inner, env, ctx, hint)]
        if isinstance(e, ir.Ite):
            out = []
            for c1, cond in self.exec(e.cond, env, ctx, hint):
                out += self.ite(e, cond, env, c1, hint)
            return out
        if isinstance(e, ir.MatchOpt):
            out = []
            for c1, s in self.exec(e.scrutinee, env, ctx, hint):
                out += self.match(e, s, env, c1, hint)
            return out
        if isinstance(e, ir.Call):
            results = [(ctx, [])]
            for arg in e.args:
                nxt = []
                for c1, vals in results:
                    for c2, v in self.exec(arg, env, c1, hint):
                        nxt.append((c2, vals + [v]))
                results = nxt
            callee = self.unit.function(e.fn)
            self.step("Inline", e.fn, describe(e))
            out = []
            for c1, vals in results:
                cenv = dict(zip((n for n, _ in callee.params), vals))
                out += self.exec(callee.body, cenv, c1, hint)
            return out
        if isinstance(e, ir.RecLoop):
            raise UnsupportedFragment("loop")
        if isinstance(e, (ir.IndexRead, ir.ArrLen)):
            raise UnsupportedFragment("array access")
        raise UnsupportedFragment(type(e).__name__)

    # -- operators -------------------------------------------------------------

    def binary(self, e, a, b, ctx, hint):
        site = describe(e)
        if isinstance(e, ir._Compare):
            op = {ir.CmpLt: "lt", ir.CmpLe: "le", ir.CmpEq: "eq"}[type(e)]
            if isinstance(a, Term) and isinstance(b, Term):
                if a.is_const and b.is_const:
                    return [(ctx, {"lt": a.off < b.off, "le": a.off <= b.off, "eq": a.off == b.off}[op])]
                return [(ctx, Cond(op, a, b))]
            if isinstance(a, bool) and isinstance(b, bool) and op == "eq":
                return [(ctx, a == b)]
            return [(ctx, BoolSym(self.fresh("cmp")))]
        w = e.width
        top = (1 << w) - 1
        kind = type(e)
        if a.is_const and b.is_const:
            r = ir.SCALAR_OPS[kind](w, a.off, b.off)
            if isinstance(r, ir.Ok):
                return [(ctx, Term(None, r.value))]
            if self.success_conditional:
                self.step("ConstPanic", site, f"always {r.kind.value}; path closed by success assumption")
                return []
            raise ProofFailure(f"{site} always panics with {r.kind.value}")
        if kind is ir.CheckedSub:
            return self.sub(e, a, b, ctx, hint, site)
        if kind is ir.CheckedAdd:
            ua, pa = self.ub(ctx, a)
            ub_, pb = self.ub(ctx, b)
            if ua + ub_ <= top:
                self.step("AddGuard", site, f"{ua} + {ub_} <= {top}")
            elif self.success_conditional:
                self.step("AddGuard", site, "overflow branch closed by success assumption")
            else:
                raise ProofFailure(f"cannot rule out overflow at {site}")
            if b.is_const:
                return [(ctx, Term(a.sym, a.off + b.off))]
            if a.is_const:
                return [(ctx, Term(b.sym, b.off + a.off))]
            la, _ = self.lb(ctx, a)
            lb_, _ = self.lb(ctx, b)
            t, c1 = self.new_sym(ctx, hint, w, la + lb_, min(ua + ub_, top))
            lab = f"def({t.sym})"
            # t - a lies in [lb(b), ub(b)] and t - b in [lb(a), ub(a)]
            return [(c1.add(diff_le(a, t, -lb_, lab), diff_le(t, a, ub_, lab),
                            diff_le(b, t, -la, lab), diff_le(t, b, ua, lab)), t)]
        if kind is ir.CheckedMul:
            ua, _ = self.ub(ctx, a)
            ub_, _ = self.ub(ctx, b)
            if ua * ub_ <= top:
                self.step("MulGuard", site, f"{ua} * {ub_} <= {top}")
            elif self.success_conditional:
                self.step("MulGuard", site, "overflow branch closed by success assumption")
            else:
                raise ProofFailure(f"cannot rule out overflow at {site}")
            for x, y in ((a, b), (b, a)):
                if x.is_const and x.off == 1:
                    return [(ctx, y)]
                if x.is_const and x.off == 0:
                    return [(ctx, Term(None, 0))]
            la, _ = self.lb(ctx, a)
            lb_, _ = self.lb(ctx, b)
            return [self.fresh_leaf(ctx, hint, w, la * lb_, min(ua * ub_, top))]
        if kind is ir.Rem:
            lbb, path = self.lb(ctx, b)
            if lbb >= 1:
                self.step("RemGuard", site, f"divisor >= {lbb}")
            elif self.success_conditional:
                self.step("RemGuard", site, "division-by-zero branch closed by success assumption")
            else:
                raise ProofFailure(f"cannot rule out division by zero at {site}")
            ua, _ = self.ub(ctx, a)
            ubb, _ = self.ub(ctx, b)
            t, c1 = self.new_sym(ctx, hint, w, 0, min(ua, max(ubb - 1, 0)))
            if not a.is_const:
                c1 = c1.add(diff_le(t, a, 0, f"def({t.sym})"))
            return [(c1, t)]
        if kind in (ir.Shl, ir.Shr):
            ubb, _ = self.ub(ctx, b)
            if ubb < w:
                self.step("ShiftGuard", site, f"shift <= {ubb} < {w}")
            elif self.success_conditional:
                self.step("ShiftGuard", site, "oversized-shift branch closed by success assumption")
            else:
                raise ProofFailure(f"cannot rule out an oversized shift at {site}")
            if kind is ir.Shl:
                return [self.fresh_leaf(ctx, hint, w)]
        ua, _ = self.ub(ctx, a)
        ub_, _ = self.ub(ctx, b)
        if kind is ir.Shr:
            hi = ua >> b.off if b.is_const else ua
        elif kind is ir.BitAnd:
            hi = min(ua, ub_)
        else:
            hi = (1 << max(ua, ub_).bit_length()) - 1
        return [self.fresh_leaf(ctx, hint, w, 0, min(hi, top))]

    def sub(self, e, a, b, ctx, hint, site):
        w = e.width
        if not self.cfg.split_subs:
            if not self.success_conditional:
                raise ProofFailure("opaque subtraction cannot show absence of panics")
            return [self.fresh_leaf(ctx, hint, w)]
        under = diff_le(a, b, -1, f"underflow@{site}")
        detail = self.panic_child(ctx, under, "SubGuardSplit", site, "underflow")
        guard = diff_le(b, a, 0, f"guard@{site}")
        c1 = ctx.add(guard)
        self.step("SubGuardSplit", site, detail)
        if b.is_const:
            return [(c1, Term(a.sym, a.off - b.off))]
        g = c1.graph()
        d = self.fresh(hint)
        lab = f"def({d})"
        facts = list(self.width_facts(d, w))
        # d = a - b, bounded by whatever the context knows about a - b
        hi, path_hi = g.max_diff(_node(a), _node(b))
        lo, path_lo = g.max_diff(_node(b), _node(a))
        if hi is not None:
            lab_hi = f"range_hi({d})"
            self.support[lab_hi] = frozenset(k.label for k in path_hi)
            facts.append(DiffConstraint(d, ZERO, hi + a.off - b.off, lab_hi))
        if lo is not None:
            lab_lo = f"range_lo({d})"
            self.support[lab_lo] = frozenset(k.label for k in path_lo)
            facts.append(DiffConstraint(ZERO, d, lo - a.off + b.off, lab_lo))
        if not a.is_const:
            lbb, _ = self.lb(c1, b)
            ubb, _ = self.ub(c1, b)
            facts.append(DiffConstraint(d, a.sym, a.off - lbb, lab))
            facts.append(DiffConstraint(a.sym, d, ubb - a.off, lab))
        c1 = c1.add(*facts)
        c1 = replace(c1, defs=c1.defs + ((d, a, b),))
        return [(c1, Term(d))]

    def cond_facts(self, cond: Cond, truth: bool, label):
        l, r = cond.lhs, cond.rhs
        if cond.op == "lt":
            return [diff_le(l, r, -1, label)] if truth else [diff_le(r, l, 0, label)]
        if cond.op == "le":
            return [diff_le(l, r, 0, label)] if truth else [diff_le(r, l, -1, label)]
        return [diff_le(l, r, 0, label), diff_le(r, l, 0, label)] if truth else []

    def ite(self, e, cond, env, ctx, hint):
        site = describe(e.cond)
        if isinstance(cond, bool):
            return self.exec(e.then if cond else e.els, env, ctx, hint)
        if (self.cfg.min_rules and isinstance(cond, Cond) and cond.op in ("lt", "le")
                and isinstance(e.then, (ir.Var, ir.Lit)) and isinstance(e.els, (ir.Var, ir.Lit))):
            tv = self.exec(e.then, env, ctx, hint)[0][1]
            ev_ = self.exec(e.els, env, ctx, hint)[0][1]
            if tv == cond.lhs and ev_ == cond.rhs:
                left = self.label("IteBoundLeft", site)
                right = self.label("IteBoundRight", site)
                lo = min(self.lb(ctx, tv)[0], self.lb(ctx, ev_)[0])
                r, c1 = self.new_sym(ctx, hint, 64, lo)
                c1 = c1.add(diff_le(r, tv, 0, left), diff_le(r, ev_, 0, right))
                self.step("IteBoundLeft", site, f"{r} <= {tv}", pending=left)
                self.step("IteBoundRight", site, f"{r} <= {ev_}", pending=right)
                return [(c1, r)]
        out = []
        for truth, arm in ((True, e.then), (False, e.els)):
            if isinstance(cond, Cond):
                c1 = ctx.add(*self.cond_facts(cond, truth, f"branch@{site}={truth}"))
                if not c1.graph().feasible():
                    self.step("IteSplit", site, f"{'then' if truth else 'else'} branch infeasible")
                    continue
            else:
                c1 = ctx
            c1 = replace(c1, path=c1.path + (f"{site} is {str(truth).lower()}",))
            self.step("IteSplit", site, "then branch" if truth else "else branch")
            out += self.exec(arm, env, c1, hint)
        return out

    def match(self, e, s, env, ctx, hint):
        site = describe(e.scrutinee)
        if s.kind == "none":
            return self.exec(e.none_arm, env, ctx, hint)
        if s.kind == "some":
            return self.exec(e.some_arm, {**env, e.binder: s.payload}, ctx, hint)
        param = s.param
        state = ctx.state_of(param)
        dom = self.ob.domain.get(param)
        allow_none = state != "some" and (not isinstance(dom, OptionRange) or dom.none)
        allow_some = state != "none" and (not isinstance(dom, OptionRange) or dom.some)
        arms = [a for a, ok in (("None", allow_none), ("Some", allow_some)) if ok]
        self.step("MatchOptSplit", site, "arms: " + ", ".join(arms))
        out = []
        if allow_none:
            c1 = replace(ctx.with_state(param, "none"), path=ctx.path + (f"{param} is None",))
            out += self.exec(e.none_arm, env, c1, hint)
        if allow_some:
            c1 = ctx.with_state(param, "some").add(*self.width_facts(param, 64))
            c1 = c1.add(*self.pre_facts(c1, only_param=param))
            c1 = replace(c1, path=ctx.path + (f"{param} is Some",))
            if c1.graph().feasible():
                out += self.exec(e.some_arm, {**env, e.binder: Term(param)}, c1, hint)
            else:
                self.step("MatchOptSplit", site, "Some arm infeasible under preconditions")
        return out

    def trace(self):
        return tuple(s for s, pending in self.steps if pending is None or pending in self.used)


def prove_symbolic(unit: ir.IrUnit, ob: Obligation):
    """Proved(trace) or Unknown(reason); never a wrong Proved for the supported fragment."""
    if ob.kind not in (Kind.BOUND, Kind.NO_PANIC):
        return Unknown(f"symbolic mode handles bound and no_panic obligations, not {ob.kind.value}")
    reasons = []
    for cfg in PHASES:
        if ob.kind is Kind.NO_PANIC and not cfg.split_subs:
            continue
        attempt = _Attempt(unit, ob, cfg)
        try:
            attempt.run()
        except UnsupportedFragment as e:
            return Unknown(f"UnsupportedFragment: {e}")
        except ProofFailure as e:
            reasons.append(str(e))
            continue
        return Proved(attempt.trace())
    return Unknown(reasons[-1] if reasons else "no applicable strategy")
