"""Fuel-bounded execution of IR.

Two engines share one semantics:

* :func:`eval` walks the IR directly and threads :class:`~frikt.ir.Outcome`
  values through every step, exactly like the monadic bind of the extracted
  code.  It is the reference.
* :class:`CompiledUnit` translates each IR function once into straight-line
  Python and signals panics/divergence with exceptions.  The checker uses it
  for bulk evaluation; the test-suite cross-checks it against :func:`eval`.

Fuel counts function entries and loop iterations only.  Running out of fuel
yields :class:`~frikt.ir.Diverge`.
"""

from __future__ import annotations

from typing import Callable, Mapping, Optional

from . import ir
from .frontend import TypeAnnot
from .ir import Diverge, Ok, Panic, PanicKind


class ArityMismatch(Exception):
    pass


class TypeMismatch(Exception):
    pass


class Fuel:
    """Mutable budget of loop iterations plus function entries."""

    __slots__ = ("budget",)

    def __init__(self, budget: int):
        if budget < 0:
            raise ValueError("fuel budget must be non-negative")
        self.budget = budget

    def consume(self) -> bool:
        if self.budget == 0:
            return False
        self.budget -= 1
        return True

    def __repr__(self):
        return f"Fuel({self.budget})"


def _as_fuel(fuel) -> Fuel:
    return fuel if isinstance(fuel, Fuel) else Fuel(fuel)


Env = Mapping[str, object]


class _Reference:
    def __init__(self, unit: Optional[ir.IrUnit], fuel: Fuel, observer: Optional[Callable]):
        self.unit = unit
        self.fuel = fuel
        self.observer = observer

    def ev(self, e, env):
        out = self._ev(e, env)
        if self.observer is not None:
            self.observer(e, env, out)
        return out

    def _ev(self, e, env):
        if isinstance(e, ir.Lit):
            return Ok(e.value)
        if isinstance(e, ir.Var):
            return Ok(env[e.name])
        if isinstance(e, ir.Bind):
            r = self.ev(e.rhs, env)
            if not isinstance(r, Ok):
                return r
            return self.ev(e.body, {**env, e.name: r.value})
        if isinstance(e, ir._Binary):
            a = self.ev(e.lhs, env)
            if not isinstance(a, Ok):
                return a
            b = self.ev(e.rhs, env)
            if not isinstance(b, Ok):
                return b
            return ir.SCALAR_OPS[type(e)](e.width, a.value, b.value)
        if isinstance(e, ir._Compare):
            a = self.ev(e.lhs, env)
            if not isinstance(a, Ok):
                return a
            b = self.ev(e.rhs, env)
            if not isinstance(b, Ok):
                return b
            if isinstance(e, ir.CmpLt):
                return Ok(a.value < b.value)
            if isinstance(e, ir.CmpLe):
                return Ok(a.value <= b.value)
            return Ok(a.value == b.value)
        if isinstance(e, ir.WidenCast):
            r = self.ev(e.inner, env)
            return Ok(int(r.value)) if isinstance(r, Ok) else r
        if isinstance(e, ir.WrapCast):
            r = self.ev(e.inner, env)
            return Ok(int(r.value) & ((1 << e.dst.width) - 1)) if isinstance(r, Ok) else r
        if isinstance(e, ir.Ite):
            c = self.ev(e.cond, env)
            if not isinstance(c, Ok):
                return c
            return self.ev(e.then if c.value else e.els, env)
        if isinstance(e, ir.MkSome):
            return self.ev(e.inner, env)
        if isinstance(e, ir.MatchOpt):
            s = self.ev(e.scrutinee, env)
            if not isinstance(s, Ok):
                return s
            if s.value is None:
                return self.ev(e.none_arm, env)
            return self.ev(e.some_arm, {**env, e.binder: s.value})
        if isinstance(e, ir.IndexRead):
            a = self.ev(e.arr, env)
            if not isinstance(a, Ok):
                return a
            i = self.ev(e.idx, env)
            if not isinstance(i, Ok):
                return i
            if i.value >= len(a.value):
                return Panic(PanicKind.INDEX_OUT_OF_BOUNDS)
            return Ok(a.value[i.value])
        if isinstance(e, ir.ArrLen):
            a = self.ev(e.arr, env)
            return Ok(len(a.value)) if isinstance(a, Ok) else a
        if isinstance(e, ir.Call):
            args = []
            for arg in e.args:
                r = self.ev(arg, env)
                if not isinstance(r, Ok):
                    return r
                args.append(r.value)
            return self.enter(self.unit.function(e.fn), args)
        if isinstance(e, ir.RecLoop):
            lo = self.ev(e.lo, env)
            if not isinstance(lo, Ok):
                return lo
            hi = self.ev(e.hi, env)
            if not isinstance(hi, Ok):
                return hi
            acc = self.ev(e.init, env)
            if not isinstance(acc, Ok):
                return acc
            value = acc.value
            for i in range(lo.value, hi.value):
                if not self.fuel.consume():
                    return Diverge()
                r = self.ev(e.body, {**env, e.binder: i, e.accum: value})
                if not isinstance(r, Ok):
                    return r
                value = r.value
            return Ok(value)
        raise TypeError(f"not an IR expression: {e!r}")

    def enter(self, fn: ir.IrFunction, args):
        if not self.fuel.consume():
            return Diverge()
        return self.ev(fn.body, dict(zip((n for n, _ in fn.params), args)))


def eval(expr: ir.IrExpr, env: Env, fuel, unit: Optional[ir.IrUnit] = None,
         observer: Optional[Callable] = None) -> ir.Outcome:
    """Evaluate ``expr`` under ``env``.

    ``observer(node, env, outcome)`` is called after every sub-evaluation,
    innermost first; it exists for instrumented tests.
    """
    return _Reference(unit, _as_fuel(fuel), observer).ev(expr, dict(env))


def _check_args(fn: ir.IrFunction, args):
    if len(args) != len(fn.params):
        raise ArityMismatch(f"{fn.name} takes {len(fn.params)} arguments, got {len(args)}")
    for (name, ty), value in zip(fn.params, args):
        if not ir.check_value(value, ty):
            raise TypeMismatch(f"argument {name} of {fn.name}: {value!r} is not a {ty}")


def eval_function(unit: ir.IrUnit, name: str, args, fuel, observer=None) -> ir.Outcome:
    fn = unit.function(name)
    args = list(args)
    _check_args(fn, args)
    return _Reference(unit, _as_fuel(fuel), observer).enter(fn, args)


def required_fuel(unit: ir.IrUnit, name: str, args) -> int:
    """Entries plus iterations actually performed: the least fuel that avoids Diverge."""
    fuel = Fuel(1 << 62)
    start = fuel.budget
    eval_function(unit, name, args, fuel)
    return start - fuel.budget


# ---------------------------------------------------------------------------
# Compiled engine


class PanicSignal(Exception):
    def __init__(self, kind: PanicKind):
        self.kind = kind


class DivergeSignal(Exception):
    pass


class _Codegen:
    def __init__(self):
        self.counter = 0

    def fresh(self, hint="t"):
        self.counter += 1
        return f"{hint}{self.counter}"

    def local(self, name):
        self.counter += 1
        return f"v{self.counter}_{name}"

    def function(self, fn: ir.IrFunction):
        scope = {}
        params = []
        for name, _ in fn.params:
            py = self.local(name)
            scope[name] = py
            params.append(py)
        lines = ["F[0] -= 1", "if F[0] < 0: raise _DIV"]
        body, atom = self.expr(fn.body, scope)
        lines += body
        lines.append(f"return {atom}")
        head = f"def f_{fn.name}({', '.join(params + ['F'])}):"
        return "\n".join([head] + ["    " + ln for ln in lines])

    @staticmethod
    def block(lines):
        return ["    " + ln for ln in lines] or ["    pass"]

    def expr(self, e, scope):
        """Return (lines, atom) where atom is a literal or a local name."""
        if isinstance(e, ir.Lit):
            return [], repr(e.value)
        if isinstance(e, ir.Var):
            return [], scope[e.name]
        if isinstance(e, ir.Bind):
            rl, ra = self.expr(e.rhs, scope)
            bl, ba = self.expr(e.body, {**scope, e.name: ra})
            return rl + bl, ba
        if isinstance(e, ir._Binary):
            ll, la = self.expr(e.lhs, scope)
            rl, ra = self.expr(e.rhs, scope)
            t = self.fresh()
            top = (1 << e.width) - 1
            kind = type(e)
            if kind is ir.CheckedAdd:
                code = [f"{t} = {la} + {ra}", f"if {t} > {top}: raise _Panic(_OVERFLOW)"]
            elif kind is ir.CheckedSub:
                code = [f"{t} = {la} - {ra}", f"if {t} < 0: raise _Panic(_UNDERFLOW)"]
            elif kind is ir.CheckedMul:
                code = [f"{t} = {la} * {ra}", f"if {t} > {top}: raise _Panic(_OVERFLOW)"]
            elif kind is ir.Rem:
                code = [f"if {ra} == 0: raise _Panic(_DIV_BY_ZERO)", f"{t} = {la} % {ra}"]
            elif kind is ir.Shl:
                code = [f"if {ra} >= {e.width}: raise _Panic(_OVERFLOW)", f"{t} = ({la} << {ra}) & {top}"]
            elif kind is ir.Shr:
                code = [f"if {ra} >= {e.width}: raise _Panic(_OVERFLOW)", f"{t} = {la} >> {ra}"]
            elif kind is ir.BitAnd:
                code = [f"{t} = {la} & {ra}"]
            elif kind is ir.BitOr:
                code = [f"{t} = {la} | {ra}"]
            else:
                code = [f"{t} = {la} ^ {ra}"]
            return ll + rl + code, t
        if isinstance(e, ir._Compare):
            ll, la = self.expr(e.lhs, scope)
            rl, ra = self.expr(e.rhs, scope)
            t = self.fresh()
            op = {ir.CmpLt: "<", ir.CmpLe: "<=", ir.CmpEq: "=="}[type(e)]
            return ll + rl + [f"{t} = {la} {op} {ra}"], t
        if isinstance(e, ir.WidenCast):
            il, ia = self.expr(e.inner, scope)
            if e.src is TypeAnnot.BOOL:
                t = self.fresh()
                return il + [f"{t} = int({ia})"], t
            return il, ia
        if isinstance(e, ir.WrapCast):
            il, ia = self.expr(e.inner, scope)
            t = self.fresh()
            return il + [f"{t} = int({ia}) & {(1 << e.dst.width) - 1}"], t
        if isinstance(e, ir.Ite):
            cl, ca = self.expr(e.cond, scope)
            t = self.fresh()
            tl, ta = self.expr(e.then, scope)
            el, ea = self.expr(e.els, scope)
            return cl + [f"if {ca}:"] + self.block(tl + [f"{t} = {ta}"]) + ["else:"] + \
                self.block(el + [f"{t} = {ea}"]), t
        if isinstance(e, ir.MkSome):
            return self.expr(e.inner, scope)
        if isinstance(e, ir.MatchOpt):
            sl, sa = self.expr(e.scrutinee, scope)
            t = self.fresh()
            nl, na = self.expr(e.none_arm, scope)
            b = self.local(e.binder)
            ol, oa = self.expr(e.some_arm, {**scope, e.binder: b})
            return sl + [f"if {sa} is None:"] + self.block(nl + [f"{t} = {na}"]) + ["else:"] + \
                self.block([f"{b} = {sa}"] + ol + [f"{t} = {oa}"]), t
        if isinstance(e, ir.IndexRead):
            al, aa = self.expr(e.arr, scope)
            il, ia = self.expr(e.idx, scope)
            t = self.fresh()
            return al + il + [f"if {ia} >= len({aa}): raise _Panic(_INDEX)", f"{t} = {aa}[{ia}]"], t
        if isinstance(e, ir.ArrLen):
            al, aa = self.expr(e.arr, scope)
            t = self.fresh()
            return al + [f"{t} = len({aa})"], t
        if isinstance(e, ir.Call):
            lines, atoms = [], []
            for arg in e.args:
                l_, a_ = self.expr(arg, scope)
                lines += l_
                atoms.append(a_)
            t = self.fresh()
            return lines + [f"{t} = f_{e.fn}({', '.join(atoms + ['F'])})"], t
        if isinstance(e, ir.RecLoop):
            lol, loa = self.expr(e.lo, scope)
            hil, hia = self.expr(e.hi, scope)
            inl, ina = self.expr(e.init, scope)
            acc = self.local(e.accum)
            i = self.local(e.binder)
            bl, ba = self.expr(e.body, {**scope, e.binder: i, e.accum: acc})
            loop = [f"for {i} in range({loa}, {hia}):", "    F[0] -= 1", "    if F[0] < 0: raise _DIV"]
            loop += self.block(bl + [f"{acc} = {ba}"])
            return lol + hil + inl + [f"{acc} = {ina}"] + loop, acc
        raise TypeError(f"not an IR expression: {e!r}")


class CompiledUnit:
    """An IrUnit translated once into Python functions.

    ``raw(name)`` returns a callable ``f(*args, F)`` where ``F`` is a one-element
    list holding the fuel budget; it raises :class:`PanicSignal` or
    :class:`DivergeSignal` instead of returning an Outcome.
    """

    def __init__(self, unit: ir.IrUnit):
        self.unit = unit
        gen = _Codegen()
        self.source = "\n\n".join(gen.function(fn) for fn in unit.functions) + "\n"
        namespace = {
            "_Panic": PanicSignal,
            "_DIV": DivergeSignal(),
            "_OVERFLOW": PanicKind.OVERFLOW,
            "_UNDERFLOW": PanicKind.UNDERFLOW,
            "_DIV_BY_ZERO": PanicKind.DIV_BY_ZERO,
            "_INDEX": PanicKind.INDEX_OUT_OF_BOUNDS,
        }
        exec(compile(self.source, "<frikt-compiled>", "exec"), namespace)
        self._fns = {fn.name: namespace[f"f_{fn.name}"] for fn in unit.functions}

    def raw(self, name: str):
        return self._fns[name]

    def run(self, name: str, args, fuel=1 << 40, check=True) -> ir.Outcome:
        args = list(args)
        if check:
            _check_args(self.unit.function(name), args)
        cell = [fuel.budget if isinstance(fuel, Fuel) else fuel]
        try:
            value = self._fns[name](*args, cell)
        except PanicSignal as sig:
            return Panic(sig.kind)
        except DivergeSignal:
            return Diverge()
        finally:
            if isinstance(fuel, Fuel):
                fuel.budget = max(cell[0], 0)
        return Ok(value)


def outcome_of(call, args, fuel=1 << 40) -> ir.Outcome:
    """Run a raw compiled function and wrap the result."""
    try:
        return Ok(call(*args, [fuel]))
    except PanicSignal as sig:
        return Panic(sig.kind)
    except DivergeSignal:
        return Diverge()
