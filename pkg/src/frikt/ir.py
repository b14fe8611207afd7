"""Pure monadic IR: every arithmetic step is checked, every function yields an Outcome."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Optional, Union

from . import frontend as fe
from .frontend import TypeAnnot


class PanicKind(enum.Enum):
    OVERFLOW = "overflow"
    UNDERFLOW = "underflow"
    DIV_BY_ZERO = "div_by_zero"
    INDEX_OUT_OF_BOUNDS = "index_out_of_bounds"


@dataclass(frozen=True)
class Ok:
    value: object

    def __str__(self):
        return f"ok {format_value(self.value)}"


@dataclass(frozen=True)
class Panic:
    kind: PanicKind

    def __str__(self):
        return f"fail {self.kind.value}"


@dataclass(frozen=True)
class Diverge:
    def __str__(self):
        return "div"


Outcome = Union[Ok, Panic, Diverge]

# Machine values are plain Python data, interpreted through the static type:
#   u32/u64/usize -> int, bool -> bool, Option<usize> -> None | int,
#   &[u64] -> tuple[int, ...]
MachineValue = Union[int, bool, None, tuple]


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return str(v)


def check_value(v, ty: TypeAnnot) -> bool:
    """True iff ``v`` is a well-formed machine value of type ``ty``."""
    if ty is TypeAnnot.BOOL:
        return isinstance(v, bool)
    if ty.is_int:
        return isinstance(v, int) and not isinstance(v, bool) and 0 <= v < (1 << ty.width)
    if ty is TypeAnnot.OPTION_USIZE:
        return v is None or check_value(v, TypeAnnot.U64)
    if ty is TypeAnnot.ARRAY_U64:
        return isinstance(v, tuple) and all(check_value(x, TypeAnnot.U64) for x in v)
    return False


# ---------------------------------------------------------------------------
# Checked scalar operations


def checked_add(width: int, a: int, b: int) -> Outcome:
    s = a + b
    return Ok(s) if s >> width == 0 else Panic(PanicKind.OVERFLOW)


def checked_sub(width: int, a: int, b: int) -> Outcome:
    return Ok(a - b) if b <= a else Panic(PanicKind.UNDERFLOW)


def checked_mul(width: int, a: int, b: int) -> Outcome:
    p = a * b
    return Ok(p) if p >> width == 0 else Panic(PanicKind.OVERFLOW)


def rem(width: int, a: int, b: int) -> Outcome:
    return Panic(PanicKind.DIV_BY_ZERO) if b == 0 else Ok(a % b)


def shl(width: int, a: int, b: int) -> Outcome:
    if b >= width:
        return Panic(PanicKind.OVERFLOW)
    return Ok((a << b) & ((1 << width) - 1))


def shr(width: int, a: int, b: int) -> Outcome:
    if b >= width:
        return Panic(PanicKind.OVERFLOW)
    return Ok(a >> b)


def bit_and(width: int, a: int, b: int) -> Outcome:
    return Ok(a & b)


def bit_or(width: int, a: int, b: int) -> Outcome:
    return Ok(a | b)


def bit_xor(width: int, a: int, b: int) -> Outcome:
    return Ok(a ^ b)


# ---------------------------------------------------------------------------
# IR nodes


@dataclass(frozen=True)
class Lit:
    value: object
    ty: TypeAnnot


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Bind:
    name: str
    rhs: "IrExpr"
    body: "IrExpr"


@dataclass(frozen=True)
class _Binary:
    width: int
    lhs: "IrExpr"
    rhs: "IrExpr"


class CheckedAdd(_Binary):
    pass


class CheckedSub(_Binary):
    pass


class CheckedMul(_Binary):
    pass


class Rem(_Binary):
    pass


class Shl(_Binary):
    pass


class Shr(_Binary):
    pass


class BitAnd(_Binary):
    pass


class BitOr(_Binary):
    pass


class BitXor(_Binary):
    pass


@dataclass(frozen=True)
class _Compare:
    lhs: "IrExpr"
    rhs: "IrExpr"


class CmpLt(_Compare):
    pass


class CmpLe(_Compare):
    pass


class CmpEq(_Compare):
    pass


@dataclass(frozen=True)
class WidenCast:
    src: TypeAnnot
    dst: TypeAnnot
    inner: "IrExpr"


@dataclass(frozen=True)
class WrapCast:
    src: TypeAnnot
    dst: TypeAnnot
    inner: "IrExpr"


@dataclass(frozen=True)
class Ite:
    cond: "IrExpr"
    then: "IrExpr"
    els: "IrExpr"


@dataclass(frozen=True)
class MkSome:
    inner: "IrExpr"


@dataclass(frozen=True)
class MatchOpt:
    scrutinee: "IrExpr"
    none_arm: "IrExpr"
    binder: str
    some_arm: "IrExpr"


@dataclass(frozen=True)
class IndexRead:
    arr: "IrExpr"
    idx: "IrExpr"


@dataclass(frozen=True)
class ArrLen:
    arr: "IrExpr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


@dataclass(frozen=True)
class RecLoop:
    """Structural recursion over ``lo..hi``; ``hi - lo`` is the termination measure."""

    binder: str
    lo: "IrExpr"
    hi: "IrExpr"
    accum: str
    init: "IrExpr"
    body: "IrExpr"


IrExpr = Union[Lit, Var, Bind, _Binary, _Compare, WidenCast, WrapCast, Ite, MkSome, MatchOpt, IndexRead, ArrLen,
               Call, RecLoop]

ARITH_NODES = (CheckedAdd, CheckedSub, CheckedMul, Rem)

SCALAR_OPS = {
    CheckedAdd: checked_add,
    CheckedSub: checked_sub,
    CheckedMul: checked_mul,
    Rem: rem,
    Shl: shl,
    Shr: shr,
    BitAnd: bit_and,
    BitOr: bit_or,
    BitXor: bit_xor,
}


@dataclass(frozen=True)
class IrFunction:
    name: str
    params: tuple  # tuple[tuple[str, TypeAnnot], ...]
    ret: TypeAnnot
    body: IrExpr


@dataclass(frozen=True)
class IrUnit:
    functions: tuple

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {f.name: f for f in self.functions})

    def function(self, name: str) -> IrFunction:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no function named {name!r}") from None

    def __contains__(self, name):
        return name in self._by_name

    @property
    def names(self):
        return [f.name for f in self.functions]


def subexprs(e):
    if isinstance(e, (Lit, Var)):
        return ()
    if isinstance(e, Bind):
        return (e.rhs, e.body)
    if isinstance(e, (_Binary, _Compare)):
        return (e.lhs, e.rhs)
    if isinstance(e, (WidenCast, WrapCast, MkSome)):
        return (e.inner,)
    if isinstance(e, Ite):
        return (e.cond, e.then, e.els)
    if isinstance(e, MatchOpt):
        return (e.scrutinee, e.none_arm, e.some_arm)
    if isinstance(e, IndexRead):
        return (e.arr, e.idx)
    if isinstance(e, ArrLen):
        return (e.arr,)
    if isinstance(e, Call):
        return e.args
    if isinstance(e, RecLoop):
        return (e.lo, e.hi, e.init, e.body)
    raise TypeError(f"not an IR expression: {e!r}")


def nodes(e):
    yield e
    for c in subexprs(e):
        yield from nodes(c)


def count_nodes(e, kinds) -> int:
    return sum(1 for n in nodes(e) if isinstance(n, kinds))


def free_vars(e) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Bind):
        return free_vars(e.rhs) | (free_vars(e.body) - {e.name})
    if isinstance(e, MatchOpt):
        return free_vars(e.scrutinee) | free_vars(e.none_arm) | (free_vars(e.some_arm) - {e.binder})
    if isinstance(e, RecLoop):
        inner = free_vars(e.body) - {e.binder, e.accum}
        return free_vars(e.lo) | free_vars(e.hi) | free_vars(e.init) | inner
    out = frozenset()
    for c in subexprs(e):
        out |= free_vars(c)
    return out


# ---------------------------------------------------------------------------
# Lowering

_ARITH_LOWERING = {
    "+": CheckedAdd, "-": CheckedSub, "*": CheckedMul, "%": Rem,
    "<<": Shl, ">>": Shr, "&": BitAnd, "|": BitOr, "^": BitXor,
}
_CMP_LOWERING = {"<": CmpLt, "<=": CmpLe, "==": CmpEq}


class LoweringError(Exception):
    pass


def lower_expr(e) -> IrExpr:
    if e.ty is None:
        raise LoweringError(f"unresolved expression {e!r}")
    if isinstance(e, fe.IntLit):
        return Lit(e.value, e.ty.canonical)
    if isinstance(e, fe.BoolLit):
        return Lit(e.value, TypeAnnot.BOOL)
    if isinstance(e, fe.NoneLit):
        return Lit(None, TypeAnnot.OPTION_USIZE)
    if isinstance(e, fe.SomeCtor):
        return MkSome(lower_expr(e.inner))
    if isinstance(e, fe.Var):
        return Var(e.name)
    if isinstance(e, fe.Let):
        return Bind(e.name, lower_expr(e.rhs), lower_expr(e.body))
    if isinstance(e, fe.BinOp):
        lhs, rhs = lower_expr(e.lhs), lower_expr(e.rhs)
        if e.op in _CMP_LOWERING:
            return _CMP_LOWERING[e.op](lhs, rhs)
        return _ARITH_LOWERING[e.op](e.lhs.ty.width, lhs, rhs)
    if isinstance(e, fe.Cast):
        src, dst = e.inner.ty.canonical, e.target.canonical
        node = WidenCast if e.kind is fe.CastKind.WIDEN else WrapCast
        return node(src, dst, lower_expr(e.inner))
    if isinstance(e, fe.If):
        return Ite(lower_expr(e.cond), lower_expr(e.then), lower_expr(e.els))
    if isinstance(e, fe.MatchOption):
        return MatchOpt(lower_expr(e.scrutinee), lower_expr(e.none_arm), e.some_binder, lower_expr(e.some_arm))
    if isinstance(e, fe.Index):
        return IndexRead(Var(e.array), lower_expr(e.index))
    if isinstance(e, fe.Len):
        return ArrLen(Var(e.array))
    if isinstance(e, fe.Call):
        return Call(e.fn_name, tuple(lower_expr(a) for a in e.args))
    if isinstance(e, fe.ForRange):
        return RecLoop(e.binder, lower_expr(e.lo), lower_expr(e.hi), e.accum_name, lower_expr(e.accum_init),
                       lower_expr(e.body))
    raise LoweringError(f"cannot lower {e!r}")


def _call_graph(functions):
    return {f.name: {n.fn for n in nodes(f.body) if isinstance(n, Call)} for f in functions}


def lower(unit: fe.SourceUnit) -> IrUnit:
    """Translate a resolved SourceUnit into the monadic IR."""
    functions = tuple(
        IrFunction(fn.name, tuple((n, t.canonical) for n, t in fn.params), fn.return_type.canonical,
                   lower_expr(fn.body))
        for fn in unit.functions
    )
    graph = _call_graph(functions)
    seen, active = set(), set()

    def visit(name):
        if name in active:
            raise LoweringError(f"recursive call graph through {name}")
        if name in seen:
            return
        active.add(name)
        for callee in graph.get(name, ()):
            if callee not in graph:
                raise LoweringError(f"call to unknown function {callee}")
            visit(callee)
        active.discard(name)
        seen.add(name)

    for name in graph:
        visit(name)
    return IrUnit(functions)


def extract(text: str, path: str = "<input>") -> IrUnit:
    """Parse, resolve and lower kernel source in one step."""
    return lower(fe.load_source(text, path))


# ---------------------------------------------------------------------------
# Canonical JSON


def _type_json(t: TypeAnnot) -> str:
    return t.value


def to_json_obj(e):
    op = type(e).__name__
    if isinstance(e, Lit):
        value = list(e.value) if isinstance(e.value, tuple) else e.value
        args = [value, _type_json(e.ty)]
    elif isinstance(e, Var):
        args = [e.name]
    elif isinstance(e, Bind):
        args = [e.name, to_json_obj(e.rhs), to_json_obj(e.body)]
    elif isinstance(e, _Binary):
        args = [e.width, to_json_obj(e.lhs), to_json_obj(e.rhs)]
    elif isinstance(e, _Compare):
        args = [to_json_obj(e.lhs), to_json_obj(e.rhs)]
    elif isinstance(e, (WidenCast, WrapCast)):
        args = [_type_json(e.src), _type_json(e.dst), to_json_obj(e.inner)]
    elif isinstance(e, Ite):
        args = [to_json_obj(e.cond), to_json_obj(e.then), to_json_obj(e.els)]
    elif isinstance(e, MkSome):
        args = [to_json_obj(e.inner)]
    elif isinstance(e, MatchOpt):
        args = [to_json_obj(e.scrutinee), to_json_obj(e.none_arm), e.binder, to_json_obj(e.some_arm)]
    elif isinstance(e, IndexRead):
        args = [to_json_obj(e.arr), to_json_obj(e.idx)]
    elif isinstance(e, ArrLen):
        args = [to_json_obj(e.arr)]
    elif isinstance(e, Call):
        args = [e.fn, [to_json_obj(a) for a in e.args]]
    elif isinstance(e, RecLoop):
        args = [e.binder, to_json_obj(e.lo), to_json_obj(e.hi), e.accum, to_json_obj(e.init), to_json_obj(e.body)]
    else:
        raise TypeError(f"not an IR expression: {e!r}")
    return {"op": op, "args": args}


_NODE_TYPES = {cls.__name__: cls for cls in (
    Lit, Var, Bind, CheckedAdd, CheckedSub, CheckedMul, Rem, Shl, Shr, BitAnd, BitOr, BitXor, CmpLt, CmpLe, CmpEq,
    WidenCast, WrapCast, Ite, MkSome, MatchOpt, IndexRead, ArrLen, Call, RecLoop)}


def from_json_obj(obj):
    cls = _NODE_TYPES[obj["op"]]
    a = obj["args"]
    if cls is Lit:
        value = tuple(a[0]) if isinstance(a[0], list) else a[0]
        return Lit(value, TypeAnnot(a[1]))
    if cls is Var:
        return Var(a[0])
    if cls is Bind:
        return Bind(a[0], from_json_obj(a[1]), from_json_obj(a[2]))
    if issubclass(cls, _Binary):
        return cls(a[0], from_json_obj(a[1]), from_json_obj(a[2]))
    if issubclass(cls, _Compare):
        return cls(from_json_obj(a[0]), from_json_obj(a[1]))
    if cls in (WidenCast, WrapCast):
        return cls(TypeAnnot(a[0]), TypeAnnot(a[1]), from_json_obj(a[2]))
    if cls is Ite:
        return Ite(*(from_json_obj(x) for x in a))
    if cls is MkSome:
        return MkSome(from_json_obj(a[0]))
    if cls is MatchOpt:
        return MatchOpt(from_json_obj(a[0]), from_json_obj(a[1]), a[2], from_json_obj(a[3]))
    if cls is IndexRead:
        return IndexRead(from_json_obj(a[0]), from_json_obj(a[1]))
    if cls is ArrLen:
        return ArrLen(from_json_obj(a[0]))
    if cls is Call:
        return Call(a[0], tuple(from_json_obj(x) for x in a[1]))
    return RecLoop(a[0], from_json_obj(a[1]), from_json_obj(a[2]), a[3], from_json_obj(a[4]), from_json_obj(a[5]))


def unit_to_json(unit: IrUnit, indent: Optional[int] = 2) -> str:
    doc = {"functions": [
        {"name": f.name, "params": [[n, _type_json(t)] for n, t in f.params], "ret": _type_json(f.ret),
         "body": to_json_obj(f.body)}
        for f in unit.functions
    ]}
    return json.dumps(doc, indent=indent)


def unit_from_json(text: str) -> IrUnit:
    doc = json.loads(text)
    return IrUnit(tuple(
        IrFunction(f["name"], tuple((n, TypeAnnot(t)) for n, t in f["params"]), TypeAnnot(f["ret"]),
                   from_json_obj(f["body"]))
        for f in doc["functions"]
    ))
