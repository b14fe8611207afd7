"""Lexer, parser, name/type resolver and pretty printer for the kernel language.

The kernel language is a small, closed subset of Rust: free functions over
``u32``/``u64``/``usize``/``bool``/``Option<usize>``/``&[u64]``, ``let``
bindings, ``if``/``match`` expressions and bounded ``for`` loops with a single
explicit accumulator.  Anything outside that fragment is rejected with a
positioned error rather than silently accepted.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union


class Position(NamedTuple):
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


class FrontendError(Exception):
    def __init__(self, message: str, pos: Optional[Position] = None):
        self.message = message
        self.pos = pos
        where = f"{pos}: " if pos is not None else ""
        super().__init__(where + message)


class LexError(FrontendError):
    pass


class ParseError(FrontendError):
    def __init__(self, message, pos=None, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} (expected one of: {', '.join(self.expected)})"
        super().__init__(message, pos)


class UnsupportedConstruct(FrontendError):
    def __init__(self, construct: str, pos=None):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", pos)


class KernelNameError(FrontendError):
    pass


class KernelTypeError(FrontendError):
    def __init__(self, message, pos=None, expected=None, found=None):
        self.expected = expected
        self.found = found
        super().__init__(message, pos)


# ---------------------------------------------------------------------------
# Types


class TypeAnnot(enum.Enum):
    U32 = "u32"
    U64 = "u64"
    USIZE = "usize"
    BOOL = "bool"
    OPTION_USIZE = "Option<usize>"
    ARRAY_U64 = "&[u64]"

    @property
    def canonical(self) -> "TypeAnnot":
        # usize is a 64-bit natural on every target we model
        return TypeAnnot.U64 if self is TypeAnnot.USIZE else self

    @property
    def is_int(self) -> bool:
        return self in (TypeAnnot.U32, TypeAnnot.U64, TypeAnnot.USIZE)

    @property
    def width(self) -> int:
        if self is TypeAnnot.U32:
            return 32
        if self in (TypeAnnot.U64, TypeAnnot.USIZE, TypeAnnot.OPTION_USIZE, TypeAnnot.ARRAY_U64):
            return 64
        if self is TypeAnnot.BOOL:
            return 1
        raise ValueError(self)

    def __str__(self):
        return self.value


def same_type(a: TypeAnnot, b: TypeAnnot) -> bool:
    return a.canonical is b.canonical


# ---------------------------------------------------------------------------
# Tokens

KEYWORDS = {"fn", "pub", "let", "if", "else", "match", "for", "in", "as", "None", "Some", "true", "false"}

# Recognised so that the parser can name them in an UnsupportedConstruct.
UNSUPPORTED_KEYWORDS = {
    "while": "while loop",
    "loop": "loop",
    "mut": "mutable binding",
    "impl": "impl block",
    "trait": "trait",
    "struct": "struct",
    "enum": "enum",
    "where": "trait bounds",
    "return": "early return",
    "break": "break",
    "continue": "continue",
    "unsafe": "unsafe",
    "use": "use declaration",
    "mod": "module",
    "const": "const item",
    "static": "static item",
    "ref": "reference pattern",
    "self": "method receiver",
    "Self": "Self type",
    "crate": "crate path",
    "dyn": "trait object",
    "move": "closure",
}

PUNCT = [
    # longest first
    ("..=", "dotdoteq"),
    ("<<", "shl"), (">>", "shr"), ("<=", "le"), (">=", "ge"), ("==", "eqeq"), ("!=", "ne"),
    ("->", "arrow"), ("=>", "fatarrow"), ("::", "coloncolon"), ("..", "dotdot"),
    ("&&", "andand"), ("||", "oror"),
    ("(", "lparen"), (")", "rparen"), ("{", "lbrace"), ("}", "rbrace"), ("[", "lbracket"),
    ("]", "rbracket"), (",", "comma"), (";", "semi"), (":", "colon"), ("=", "eq"), ("<", "lt"),
    (">", "gt"), ("+", "plus"), ("-", "minus"), ("*", "star"), ("%", "percent"), ("&", "amp"),
    ("|", "pipe"), ("^", "caret"), (".", "dot"), ("!", "bang"), ("/", "slash"),
]


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    pos: Position
    width: int = field(default=1, compare=False)  # source characters covered

    def __repr__(self):
        if self.kind in ("ident", "int"):
            return f"{self.kind} {self.value}"
        return self.kind


def _is_ident_start(ch):
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch):
    return _is_ident_start(ch) or ch.isascii() and ch.isdigit()


def tokenize(text: str) -> list[Token]:
    """Split kernel source into tokens; comments and whitespace are dropped."""
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        pos = Position(line, col)
        if ch in " \t\r\n":
            advance(1)
        elif text.startswith("//", i):
            end = text.find("\n", i)
            advance((n if end < 0 else end) - i)
        elif text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated block comment", pos)
            advance(end + 2 - i)
        elif _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            if word in KEYWORDS or word in UNSUPPORTED_KEYWORDS:
                tokens.append(Token("kw_" + word, word, pos, j - i))
            else:
                tokens.append(Token("ident", word, pos, j - i))
            advance(j - i)
        elif ch.isascii() and ch.isdigit():
            j = i
            if text.startswith(("0x", "0X"), i):
                j = i + 2
                while j < n and (text[j] in "0123456789abcdefABCDEF_"):
                    j += 1
                digits = text[i + 2:j].replace("_", "")
                if not digits:
                    raise LexError("hex literal without digits", pos)
                value = int(digits, 16)
            else:
                while j < n and (text[j].isascii() and text[j].isdigit() or text[j] == "_"):
                    j += 1
                value = int(text[i:j].replace("_", ""))
            if j < n and _is_ident_char(text[j]):
                raise LexError(f"malformed integer literal near {text[i:j + 1]!r}", pos)
            tokens.append(Token("int", str(value), pos, j - i))
            advance(j - i)
        else:
            for lexeme, kind in PUNCT:
                if text.startswith(lexeme, i):
                    tokens.append(Token(kind, lexeme, pos, len(lexeme)))
                    advance(len(lexeme))
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", pos)
    return tokens


# ---------------------------------------------------------------------------
# AST
#
# Positions and resolved types never take part in structural equality.


def _meta():
    return field(default=None, compare=False, repr=False)


@dataclass
class IntLit:
    value: int
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class BoolLit:
    value: bool
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class NoneLit:
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class SomeCtor:
    inner: "AstExpr"
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class Var:
    name: str
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class Let:
    name: str
    rhs: "AstExpr"
    body: "AstExpr"
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class BinOp:
    op: str
    lhs: "AstExpr"
    rhs: "AstExpr"
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


class CastKind(enum.Enum):
    WIDEN = "widen"
    WRAP = "wrap"


@dataclass
class Cast:
    target: TypeAnnot
    inner: "AstExpr"
    kind: Optional[CastKind] = _meta()
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class If:
    cond: "AstExpr"
    then: "AstExpr"
    els: "AstExpr"
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class MatchOption:
    scrutinee: "AstExpr"
    none_arm: "AstExpr"
    some_binder: str
    some_arm: "AstExpr"
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class Index:
    array: str
    index: "AstExpr"
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class Len:
    array: str
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class Call:
    fn_name: str
    args: list
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


@dataclass
class ForRange:
    """``for binder in lo..hi { accum = body; }`` as a value-producing loop.

    The loop starts from ``accum_init`` and yields the final accumulator; the
    parser always wraps it as ``Let(accum, ForRange(...), rest)``.
    """

    binder: str
    lo: "AstExpr"
    hi: "AstExpr"
    accum_name: str
    accum_init: "AstExpr"
    body: "AstExpr"
    pos: Optional[Position] = _meta()
    ty: Optional[TypeAnnot] = _meta()


AstExpr = Union[IntLit, BoolLit, NoneLit, SomeCtor, Var, Let, BinOp, Cast, If, MatchOption, Index, Len, Call,
                ForRange]


@dataclass
class FnDecl:
    name: str
    params: list  # list[tuple[str, TypeAnnot]]
    return_type: TypeAnnot
    body: AstExpr
    is_pub: bool = False
    pos: Optional[Position] = _meta()


@dataclass
class SourceUnit:
    path: str = field(compare=False)
    text: str = field(compare=False, repr=False)
    functions: list = field(default_factory=list)

    def function(self, name: str) -> FnDecl:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)


def children(e):
    """Immediate sub-expressions in source order."""
    if isinstance(e, (IntLit, BoolLit, NoneLit, Var, Len)):
        return []
    if isinstance(e, SomeCtor):
        return [e.inner]
    if isinstance(e, Let):
        return [e.rhs, e.body]
    if isinstance(e, BinOp):
        return [e.lhs, e.rhs]
    if isinstance(e, Cast):
        return [e.inner]
    if isinstance(e, If):
        return [e.cond, e.then, e.els]
    if isinstance(e, MatchOption):
        return [e.scrutinee, e.none_arm, e.some_arm]
    if isinstance(e, Index):
        return [e.index]
    if isinstance(e, Call):
        return list(e.args)
    if isinstance(e, ForRange):
        return [e.lo, e.hi, e.accum_init, e.body]
    raise TypeError(f"not an AST expression: {e!r}")


def walk(e):
    yield e
    for c in children(e):
        yield from walk(c)


# ---------------------------------------------------------------------------
# Parser

ARITH_OPS = {"+", "-", "*", "%", "&", "|", "^"}
SHIFT_OPS = {"<<", ">>"}
CMP_OPS = {"<", "<=", "=="}

# binding power of binary operators, loosest first
_BINARY = {
    "pipe": (6, "|"),
    "caret": (7, "^"),
    "amp": (8, "&"),
    "shl": (9, "<<"),
    "shr": (9, ">>"),
    "plus": (10, "+"),
    "minus": (10, "-"),
    "star": (11, "*"),
    "percent": (11, "%"),
}
_CMP = {"lt": "<", "le": "<=", "eqeq": "=="}
_UNSUPPORTED_BINARY = {
    "gt": "comparison operator >",
    "ge": "comparison operator >=",
    "ne": "comparison operator !=",
    "andand": "short-circuit operator &&",
    "oror": "short-circuit operator ||",
    "slash": "division operator /",
    "dotdoteq": "inclusive range",
}
PRECEDENCE = {op: prec for prec, op in _BINARY.values()}
PRECEDENCE.update({op: 5 for op in CMP_OPS})
CAST_PRECEDENCE = 12


class _Parser:
    def __init__(self, tokens, path):
        self.toks = tokens
        self.i = 0
        self.path = path

    # -- token helpers

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at(self, kind, k=0):
        t = self.peek(k)
        return t is not None and t.kind == kind

    def pos(self):
        t = self.peek()
        if t is not None:
            return t.pos
        if self.toks:
            last = self.toks[-1]
            return Position(last.pos.line, last.pos.col + last.width)
        return Position(1, 1)

    def next(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", self.pos())
        self.i += 1
        return t

    def expect(self, kind, *also):
        t = self.peek()
        if t is None or t.kind != kind:
            self._unsupported_here()
            found = "end of input" if t is None else repr(t.value)
            raise ParseError(f"unexpected {found}", self.pos(), (kind,) + also)
        self.i += 1
        return t

    def _unsupported_here(self):
        t = self.peek()
        if t is None:
            return
        if t.kind.startswith("kw_") and t.value in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(UNSUPPORTED_KEYWORDS[t.value], t.pos)
        if t.kind in _UNSUPPORTED_BINARY:
            raise UnsupportedConstruct(_UNSUPPORTED_BINARY[t.kind], t.pos)
        if t.kind == "coloncolon":
            raise UnsupportedConstruct("path expression (external-crate call)", t.pos)

    # -- items

    def unit(self, text):
        functions = []
        while self.peek() is not None:
            functions.append(self.fn_decl())
        return SourceUnit(path=self.path, text=text, functions=functions)

    def fn_decl(self):
        start = self.pos()
        is_pub = False
        if self.at("kw_pub"):
            self.next()
            is_pub = True
        self.expect("kw_fn")
        name = self.expect("ident").value
        if self.at("lt"):
            raise UnsupportedConstruct("generic parameters", self.pos())
        self.expect("lparen")
        params = []
        while not self.at("rparen"):
            if self.at("kw_mut"):
                raise UnsupportedConstruct("mutable binding", self.pos())
            pname = self.expect("ident").value
            self.expect("colon")
            params.append((pname, self.type_annot()))
            if not self.at("rparen"):
                self.expect("comma", "rparen")
        self.expect("rparen")
        self.expect("arrow")
        ret = self.type_annot()
        if self.at("kw_where"):
            raise UnsupportedConstruct("trait bounds", self.pos())
        body = self.block()
        return FnDecl(name, params, ret, body, is_pub, pos=start)

    def type_annot(self):
        t = self.peek()
        pos = self.pos()
        if t is not None and t.kind == "amp":
            self.next()
            if self.at("lbracket") and self.at("ident", 1) and self.peek(1).value == "u64" and self.at("rbracket", 2):
                self.i += 3
                return TypeAnnot.ARRAY_U64
            raise UnsupportedConstruct("reference type", pos)
        if t is not None and t.kind == "ident":
            if t.value in ("u32", "u64", "usize", "bool"):
                self.next()
                return TypeAnnot(t.value)
            if t.value == "Option":
                self.next()
                self.expect("lt")
                inner = self.expect("ident")
                if inner.value != "usize":
                    raise UnsupportedConstruct(f"Option<{inner.value}>", inner.pos)
                self.expect("gt")
                return TypeAnnot.OPTION_USIZE
            if self.at("lt", 1):
                raise UnsupportedConstruct("generic type", pos)
            raise UnsupportedConstruct(f"type {t.value}", pos)
        self._unsupported_here()
        raise ParseError("expected a type", pos, ("u32", "u64", "usize", "bool", "Option", "&[u64]"))

    # -- blocks and statements

    def block(self):
        self.expect("lbrace")
        stmts = []
        while True:
            if self.at("kw_let"):
                pos = self.next().pos
                if self.at("kw_mut"):
                    raise UnsupportedConstruct("mutable binding", self.pos())
                name = self.expect("ident").value
                if self.at("colon"):
                    raise ParseError("type ascription on let is not part of the grammar", self.pos(), ("eq",))
                self.expect("eq")
                rhs = self.expr()
                self.expect("semi")
                stmts.append(("let", name, rhs, pos))
            elif self.at("kw_for"):
                pos = self.next().pos
                binder = self.expect("ident").value
                self.expect("kw_in")
                lo = self.expr()
                self.expect("dotdot")
                hi = self.expr()
                self.expect("lbrace")
                acc_tok = self.expect("ident")
                self.expect("eq")
                body = self.expr()
                self.expect("semi")
                self.expect("rbrace")
                acc = acc_tok.value
                loop = ForRange(binder, lo, hi, acc, Var(acc, pos=acc_tok.pos), body, pos=pos)
                stmts.append(("let", acc, loop, pos))
            else:
                break
        result = self.expr()
        if self.at("semi"):
            raise UnsupportedConstruct("expression statement", self.pos())
        self.expect("rbrace")
        for _, name, rhs, pos in reversed(stmts):
            result = Let(name, rhs, result, pos=pos)
        return result

    # -- expressions

    def expr(self):
        lhs = self.binary(6)
        t = self.peek()
        if t is not None and t.kind in _CMP:
            self.next()
            rhs = self.binary(6)
            lhs = BinOp(_CMP[t.kind], lhs, rhs, pos=t.pos)
            t2 = self.peek()
            if t2 is not None and t2.kind in _CMP:
                raise ParseError("comparison operators cannot be chained", t2.pos)
        return lhs

    def binary(self, min_prec):
        lhs = self.cast_expr()
        while True:
            t = self.peek()
            if t is None:
                return lhs
            if t.kind in _UNSUPPORTED_BINARY:
                raise UnsupportedConstruct(_UNSUPPORTED_BINARY[t.kind], t.pos)
            if t.kind not in _BINARY:
                return lhs
            prec, op = _BINARY[t.kind]
            if prec < min_prec:
                return lhs
            self.next()
            rhs = self.binary(prec + 1)
            lhs = BinOp(op, lhs, rhs, pos=t.pos)

    def cast_expr(self):
        e = self.primary()
        while self.at("kw_as"):
            pos = self.next().pos
            e = Cast(self.type_annot(), e, pos=pos)
        return e

    def primary(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", self.pos(), ("expression",))
        pos = t.pos
        k = t.kind
        if k == "int":
            self.next()
            return IntLit(int(t.value), pos=pos)
        if k in ("kw_true", "kw_false"):
            self.next()
            return BoolLit(k == "kw_true", pos=pos)
        if k == "kw_None":
            self.next()
            return NoneLit(pos=pos)
        if k == "kw_Some":
            self.next()
            self.expect("lparen")
            inner = self.expr()
            self.expect("rparen")
            return SomeCtor(inner, pos=pos)
        if k == "lparen":
            self.next()
            e = self.expr()
            self.expect("rparen")
            return e
        if k == "lbrace":
            return self.block()
        if k == "kw_if":
            self.next()
            cond = self.expr()
            then = self.block()
            if not self.at("kw_else"):
                raise ParseError("if without else", self.pos(), ("kw_else",))
            self.next()
            if self.at("kw_if"):
                raise UnsupportedConstruct("else-if chain", self.pos())
            els = self.block()
            return If(cond, then, els, pos=pos)
        if k == "kw_match":
            return self.match_expr()
        if k == "ident":
            return self.name_expr()
        if k == "amp":
            raise UnsupportedConstruct("reference", pos)
        if k == "star":
            raise UnsupportedConstruct("dereference", pos)
        if k == "minus":
            raise UnsupportedConstruct("unary negation", pos)
        if k == "bang":
            raise UnsupportedConstruct("logical negation", pos)
        if k == "pipe" or k == "oror":
            raise UnsupportedConstruct("closure", pos)
        self._unsupported_here()
        raise ParseError(f"unexpected {t.value!r}", pos, ("expression",))

    def match_expr(self):
        pos = self.next().pos
        scrutinee = self.expr()
        self.expect("lbrace")
        self.expect("kw_None", "kw_Some")
        self.expect("fatarrow")
        none_arm = self.expr()
        if self.at("comma"):
            self.next()
        elif not isinstance(none_arm, Let) and not self._was_block():
            raise ParseError("expected ',' after match arm", self.pos(), ("comma",))
        self.expect("kw_Some")
        self.expect("lparen")
        binder = self.expect("ident").value
        self.expect("rparen")
        self.expect("fatarrow")
        some_arm = self.expr()
        if self.at("comma"):
            self.next()
        self.expect("rbrace")
        return MatchOption(scrutinee, none_arm, binder, some_arm, pos=pos)

    def _was_block(self):
        prev = self.toks[self.i - 1] if self.i else None
        return prev is not None and prev.kind == "rbrace"

    def name_expr(self):
        t = self.next()
        name, pos = t.value, t.pos
        if self.at("coloncolon"):
            raise UnsupportedConstruct("path expression (external-crate call)", self.pos())
        if self.at("bang"):
            raise UnsupportedConstruct("macro invocation", self.pos())
        if self.at("lparen"):
            self.next()
            args = []
            while not self.at("rparen"):
                args.append(self.expr())
                if not self.at("rparen"):
                    self.expect("comma", "rparen")
            self.expect("rparen")
            return Call(name, args, pos=pos)
        if self.at("lbracket"):
            self.next()
            idx = self.expr()
            self.expect("rbracket")
            return Index(name, idx, pos=pos)
        if self.at("dot"):
            dot = self.next()
            method = self.expect("ident")
            if method.value == "len" and self.at("lparen") and self.at("rparen", 1):
                self.i += 2
                return Len(name, pos=pos)
            raise UnsupportedConstruct(f"method call .{method.value}()", dot.pos)
        return Var(name, pos=pos)


def parse(tokens: list[Token], path: str = "<input>", text: str = "") -> SourceUnit:
    """Build a SourceUnit from a token stream."""
    try:
        return _Parser(tokens, path).unit(text)
    except RecursionError:
        pos = tokens[0].pos if tokens else None
        raise ParseError("expression nesting too deep", pos) from None


def parse_source(text: str, path: str = "<input>") -> SourceUnit:
    return parse(tokenize(text), path, text)


# ---------------------------------------------------------------------------
# Resolution


class _Resolver:
    def __init__(self, unit):
        self.unit = unit
        self.sigs = {}

    def run(self):
        for fn in self.unit.functions:
            if fn.name in self.sigs:
                raise KernelNameError(f"duplicate function {fn.name}", fn.pos)
            names = [p for p, _ in fn.params]
            if len(set(names)) != len(names):
                raise KernelNameError(f"duplicate parameter in {fn.name}", fn.pos)
            self.sigs[fn.name] = ([t for _, t in fn.params], fn.return_type)
        calls = {}
        for fn in self.unit.functions:
            scope = dict(fn.params)
            self.check(fn.body, scope, fn.return_type)
            if not same_type(fn.body.ty, fn.return_type):
                raise KernelTypeError(f"body of {fn.name} has type {fn.body.ty}, declared {fn.return_type}",
                                      fn.pos, fn.return_type, fn.body.ty)
            calls[fn.name] = {e.fn_name for e in walk(fn.body) if isinstance(e, Call)}
        _reject_cycles(calls, {fn.name: fn.pos for fn in self.unit.functions})
        return self.unit

    def check(self, e, scope, expected=None):
        """Annotate ``e`` with its type; ``expected`` only steers integer literals."""
        ty = self._infer(e, scope, expected)
        e.ty = ty
        return ty

    def _int_literal(self, e, expected):
        ty = expected if expected is not None and expected.is_int else TypeAnnot.U64
        if expected is not None and not expected.is_int:
            raise KernelTypeError(f"integer literal where {expected} expected", e.pos, expected, TypeAnnot.U64)
        if e.value >= 1 << ty.width:
            raise KernelTypeError(f"literal {e.value} does not fit {ty}", e.pos, ty, None)
        return ty

    def _pair(self, lhs, rhs, scope):
        if isinstance(lhs, IntLit) and not isinstance(rhs, IntLit):
            rt = self.check(rhs, scope)
            return self.check(lhs, scope, rt), rt
        lt = self.check(lhs, scope)
        return lt, self.check(rhs, scope, lt)

    def _infer(self, e, scope, expected):
        if isinstance(e, IntLit):
            return self._int_literal(e, expected)
        if isinstance(e, BoolLit):
            return TypeAnnot.BOOL
        if isinstance(e, NoneLit):
            return TypeAnnot.OPTION_USIZE
        if isinstance(e, SomeCtor):
            it = self.check(e.inner, scope, TypeAnnot.USIZE)
            self._expect(it, TypeAnnot.USIZE, e.inner)
            return TypeAnnot.OPTION_USIZE
        if isinstance(e, Var):
            if e.name not in scope:
                raise KernelNameError(f"unbound name {e.name}", e.pos)
            return scope[e.name]
        if isinstance(e, Let):
            rt = self.check(e.rhs, scope)
            return self.check(e.body, {**scope, e.name: rt}, expected)
        if isinstance(e, BinOp):
            return self._binop(e, scope, expected)
        if isinstance(e, Cast):
            it = self.check(e.inner, scope)
            if not (it.is_int or it is TypeAnnot.BOOL):
                raise KernelTypeError(f"cannot cast {it}", e.pos, None, it)
            if not e.target.is_int:
                raise KernelTypeError(f"cannot cast to {e.target}", e.pos, None, e.target)
            e.kind = CastKind.WIDEN if e.target.width >= it.width else CastKind.WRAP
            return e.target
        if isinstance(e, If):
            self._expect(self.check(e.cond, scope), TypeAnnot.BOOL, e.cond)
            if isinstance(e.then, IntLit) and not isinstance(e.els, IntLit):
                et = self.check(e.els, scope, expected)
                tt = self.check(e.then, scope, et)
            else:
                tt = self.check(e.then, scope, expected)
                et = self.check(e.els, scope, tt)
            self._expect(et, tt, e.els)
            return tt
        if isinstance(e, MatchOption):
            self._expect(self.check(e.scrutinee, scope), TypeAnnot.OPTION_USIZE, e.scrutinee)
            nt = self.check(e.none_arm, scope, expected)
            st = self.check(e.some_arm, {**scope, e.some_binder: TypeAnnot.USIZE}, nt)
            if isinstance(e.none_arm, IntLit) and not isinstance(e.some_arm, IntLit):
                nt = self.check(e.none_arm, scope, st)
            self._expect(st, nt, e.some_arm)
            return nt
        if isinstance(e, Index):
            self._array(e.array, scope, e.pos)
            it = self.check(e.index, scope, TypeAnnot.USIZE)
            if not it.is_int:
                raise KernelTypeError("array index must be an integer", e.index.pos, TypeAnnot.USIZE, it)
            return TypeAnnot.U64
        if isinstance(e, Len):
            self._array(e.array, scope, e.pos)
            return TypeAnnot.USIZE
        if isinstance(e, Call):
            if e.fn_name not in self.sigs:
                raise KernelNameError(f"call to undeclared function {e.fn_name}", e.pos)
            ptys, ret = self.sigs[e.fn_name]
            if len(ptys) != len(e.args):
                raise KernelTypeError(f"{e.fn_name} takes {len(ptys)} arguments, got {len(e.args)}", e.pos)
            for a, pt in zip(e.args, ptys):
                self._expect(self.check(a, scope, pt), pt, a)
            return ret
        if isinstance(e, ForRange):
            lt, ht = self._pair(e.lo, e.hi, scope)
            if not lt.is_int:
                raise KernelTypeError("loop bounds must be integers", e.lo.pos, TypeAnnot.USIZE, lt)
            self._expect(ht, lt, e.hi)
            at = self.check(e.accum_init, scope)
            inner = {**scope, e.binder: lt, e.accum_name: at}
            self._expect(self.check(e.body, inner, at), at, e.body)
            return at
        raise TypeError(f"not an AST expression: {e!r}")

    def _binop(self, e, scope, expected):
        op = e.op
        if op in SHIFT_OPS:
            lt = self.check(e.lhs, scope, expected if expected is not None and expected.is_int else None)
            rt = self.check(e.rhs, scope, TypeAnnot.U32)
            if not lt.is_int or not rt.is_int:
                raise KernelTypeError(f"operands of {op} must be integers", e.pos, TypeAnnot.U64, lt)
            return lt
        if op in ARITH_OPS:
            if isinstance(e.lhs, IntLit) and isinstance(e.rhs, IntLit) and expected is not None and expected.is_int:
                lt = self.check(e.lhs, scope, expected)
                rt = self.check(e.rhs, scope, expected)
            else:
                lt, rt = self._pair(e.lhs, e.rhs, scope)
            if not lt.is_int:
                raise KernelTypeError(f"operands of {op} must be integers", e.lhs.pos, TypeAnnot.U64, lt)
            self._expect(rt, lt, e.rhs)
            return lt
        if op in CMP_OPS:
            lt, rt = self._pair(e.lhs, e.rhs, scope)
            if op != "==" and not lt.is_int:
                raise KernelTypeError(f"operands of {op} must be integers", e.lhs.pos, TypeAnnot.U64, lt)
            if not (lt.is_int or lt is TypeAnnot.BOOL):
                raise KernelTypeError(f"cannot compare {lt}", e.lhs.pos, None, lt)
            self._expect(rt, lt, e.rhs)
            return TypeAnnot.BOOL
        raise UnsupportedConstruct(f"operator {op}", e.pos)

    def _array(self, name, scope, pos):
        if name not in scope:
            raise KernelNameError(f"unbound name {name}", pos)
        if scope[name] is not TypeAnnot.ARRAY_U64:
            raise KernelTypeError(f"{name} is not an array", pos, TypeAnnot.ARRAY_U64, scope[name])

    @staticmethod
    def _expect(found, expected, node):
        if not same_type(found, expected):
            raise KernelTypeError(f"expected {expected}, found {found}", getattr(node, "pos", None), expected, found)


def _reject_cycles(calls, positions):
    state = {}

    def visit(name, stack):
        state[name] = "active"
        for callee in sorted(calls.get(name, ())):
            if state.get(callee) == "active":
                raise UnsupportedConstruct(f"recursion ({' -> '.join(stack + [callee])})", positions.get(name))
            if callee not in state:
                visit(callee, stack + [callee])
        state[name] = "done"

    for name in calls:
        if name not in state:
            visit(name, [name])


def resolve(unit: SourceUnit) -> SourceUnit:
    """Bind names and annotate every expression with its type (in place)."""
    return _Resolver(unit).run()


def load_source(text: str, path: str = "<input>") -> SourceUnit:
    """tokenize + parse + resolve."""
    return resolve(parse_source(text, path))


# ---------------------------------------------------------------------------
# Pretty printing

_INDENT = "    "


def _atomic(e):
    return isinstance(e, (IntLit, BoolLit, NoneLit, SomeCtor, Var, Index, Len, Call))


def _fmt_operand(e, depth, parent_prec, right):
    s = _fmt_expr(e, depth)
    if isinstance(e, BinOp):
        prec = PRECEDENCE[e.op]
        if prec < parent_prec or (prec == parent_prec and right) or (prec == 5 and parent_prec == 5):
            return f"({s})"
        return s
    if isinstance(e, Cast):
        return s if parent_prec <= CAST_PRECEDENCE else f"({s})"
    if _atomic(e):
        return s
    return f"({s})"


def _fmt_block(e, depth):
    pad = _INDENT * (depth + 1)
    lines = []
    while isinstance(e, Let):
        rhs = e.rhs
        if (isinstance(rhs, ForRange) and rhs.accum_name == e.name and isinstance(rhs.accum_init, Var)
                and rhs.accum_init.name == e.name):
            lo = _fmt_expr(rhs.lo, depth + 1)
            hi = _fmt_expr(rhs.hi, depth + 1)
            body = _fmt_expr(rhs.body, depth + 2)
            lines.append(f"{pad}for {rhs.binder} in {lo}..{hi} {{\n{pad}{_INDENT}{e.name} = {body};\n{pad}}}")
        else:
            lines.append(f"{pad}let {e.name} = {_fmt_expr(rhs, depth + 1)};")
        e = e.body
    lines.append(pad + _fmt_expr(e, depth + 1))
    return "{\n" + "\n".join(lines) + "\n" + _INDENT * depth + "}"


def _fmt_expr(e, depth):
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, NoneLit):
        return "None"
    if isinstance(e, SomeCtor):
        return f"Some({_fmt_expr(e.inner, depth)})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Let):
        return _fmt_block(e, depth)
    if isinstance(e, BinOp):
        prec = PRECEDENCE[e.op]
        lhs = _fmt_operand(e.lhs, depth, prec, False)
        rhs = _fmt_operand(e.rhs, depth, prec, True)
        return f"{lhs} {e.op} {rhs}"
    if isinstance(e, Cast):
        return f"{_fmt_operand(e.inner, depth, CAST_PRECEDENCE, False)} as {e.target}"
    if isinstance(e, If):
        cond = _fmt_expr(e.cond, depth)
        if not isinstance(e.cond, (BinOp, Cast)) and not _atomic(e.cond):
            cond = f"({cond})"
        return f"if {cond} {_fmt_block(e.then, depth)} else {_fmt_block(e.els, depth)}"
    if isinstance(e, MatchOption):
        scr = _fmt_expr(e.scrutinee, depth)
        if not isinstance(e.scrutinee, (BinOp, Cast)) and not _atomic(e.scrutinee):
            scr = f"({scr})"
        pad = _INDENT * (depth + 1)
        none_arm = _fmt_expr(e.none_arm, depth + 1)
        some_arm = _fmt_expr(e.some_arm, depth + 1)
        return (f"match {scr} {{\n{pad}None => {none_arm},\n{pad}Some({e.some_binder}) => {some_arm},\n"
                f"{_INDENT * depth}}}")
    if isinstance(e, Index):
        return f"{e.array}[{_fmt_expr(e.index, depth)}]"
    if isinstance(e, Len):
        return f"{e.array}.len()"
    if isinstance(e, Call):
        return f"{e.fn_name}({', '.join(_fmt_expr(a, depth) for a in e.args)})"
    if isinstance(e, ForRange):
        # only reachable for hand-built ASTs; the parser wraps loops in a Let
        return _fmt_block(Let(e.accum_name, e, Var(e.accum_name)), depth)
    raise TypeError(f"not an AST expression: {e!r}")


def pretty_print_fn(fn: FnDecl) -> str:
    params = ", ".join(f"{n}: {t}" for n, t in fn.params)
    head = f"{'pub ' if fn.is_pub else ''}fn {fn.name}({params}) -> {fn.return_type} "
    return head + _fmt_block(fn.body, 0)


def pretty_print(unit: SourceUnit) -> str:
    return "\n\n".join(pretty_print_fn(fn) for fn in unit.functions) + "\n"
