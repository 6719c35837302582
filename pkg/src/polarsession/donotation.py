"""Do-notation: parse, check linearity and elaborate straight to diagrams.

Surface syntax::

    name(param, param: Type):
      gen(a, b) -> (c, d)
      gen(c) -> e
      return(d, e)

`→` is accepted for `->`. A statement may rebind names it consumes; binders
are renamed internally so every variable is still used exactly once.
Session programs additionally allow ``?Type -> v`` (receive) and ``!v``
(send); those are handled by the session module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .diagram import Diagram, DiagramBuilder
from .errors import LinearityError, ParseError, TypeMismatchError, ValidationError
from .signature import Polygraph

SEND_STMT = "!"
RECV_STMT = "?"


@dataclass(frozen=True)
class Statement:
    generator: str
    args: tuple[str, ...]
    binders: tuple[str, ...]
    line: int = field(default=0, compare=False)
    type_arg: str | None = None  # receive statements carry the received type


@dataclass(frozen=True)
class DoProgram:
    name: str
    params: tuple[tuple[str, str | None], ...]
    statements: tuple[Statement, ...]
    returns: tuple[str, ...]


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)|(?P<arrow>->|→)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<punct>[(),:;!?])")


def _tokenize(text: str):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind in ("arrow", "ident", "punct"):
            tokens.append((kind, "->" if kind == "arrow" else m.group(), line, col))
        pos = m.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, effects: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.effects = effects

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def take(self, value=None, kind=None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1] or 'end of input'!r}")
        if kind is not None and tok[0] != kind:
            self.fail(f"expected {kind}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def ident(self):
        return self.take(kind="ident")[1]

    def var_list(self, allow_types=False):
        self.take("(")
        out = []
        if self.peek()[1] != ")":
            while True:
                name = self.ident()
                typ = None
                if allow_types and self.peek()[1] == ":":
                    self.take(":")
                    typ = self.ident()
                out.append((name, typ) if allow_types else name)
                if self.peek()[1] == ",":
                    self.take(",")
                    continue
                break
        self.take(")")
        return out

    def binders(self):
        if self.peek()[1] == "(":
            return self.var_list()
        return [self.ident()]

    def program(self) -> DoProgram:
        name = self.ident()
        params = self.var_list(allow_types=True)
        self.take(":")
        stmts = []
        while True:
            while self.peek()[1] == ";":
                self.take(";")
            tok = self.peek()
            if tok[0] == "ident" and tok[1] == "return":
                break
            if tok[0] == "eof":
                self.fail("missing return statement")
            stmts.append(self.statement())
        self.take("return")
        rets = self.var_list()
        while self.peek()[1] == ";":
            self.take(";")
        if self.peek()[0] != "eof":
            self.fail(f"trailing input {self.peek()[1]!r}")
        return DoProgram(name, tuple((n, t) for n, t in params), tuple(stmts), tuple(rets))

    def statement(self) -> Statement:
        tok = self.peek()
        if tok[1] in (SEND_STMT, RECV_STMT):
            if not self.effects:
                self.fail(f"'{tok[1]}' statements are only allowed in session programs")
            self.take()
            if tok[1] == SEND_STMT:
                if self.peek()[1] == "(":
                    args = self.var_list()
                else:
                    args = [self.ident()]
                return Statement(SEND_STMT, tuple(args), (), tok[2])
            typ = self.ident()
            self.take("->")
            binders = self.binders()
            if len(binders) != 1:
                self.fail("a receive binds exactly one variable", tok)
            return Statement(RECV_STMT, (), tuple(binders), tok[2], type_arg=typ)
        gen = self.ident()
        args = self.var_list()
        binders = []
        if self.peek()[0] == "arrow":
            self.take("->")
            binders = self.binders()
        return Statement(gen, tuple(args), tuple(binders), tok[2])


def parse(text: str, effects: bool = False) -> DoProgram:
    return _Parser(text, effects).program()


def pretty(program: DoProgram) -> str:
    params = ", ".join(n if t is None else f"{n}: {t}" for n, t in program.params)
    lines = [f"{program.name}({params}):"]
    for st in program.statements:
        if st.generator == SEND_STMT:
            lines.append(f"  !{st.args[0]}")
        elif st.generator == RECV_STMT:
            lines.append(f"  ?{st.type_arg} -> {st.binders[0]}")
        else:
            lines.append(f"  {st.generator}({', '.join(st.args)}) -> ({', '.join(st.binders)})")
    lines.append(f"  return({', '.join(program.returns)})")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------- checking

@dataclass(frozen=True)
class TypedStatement:
    generator: str
    args: tuple[int, ...]
    binders: tuple[int, ...]


@dataclass(frozen=True)
class TypedProgram:
    """A checked program in SSA form: variables are integers with types."""

    program: DoProgram
    polygraph: Polygraph
    var_types: tuple[str, ...]
    var_names: tuple[str, ...]
    params: tuple[int, ...]
    statements: tuple[TypedStatement, ...]
    returns: tuple[int, ...]


def check(program: DoProgram, sig: Polygraph, send_recv=None) -> TypedProgram:
    """Type and linearity check.

    `send_recv` maps a type to its (send generator, receive generator) names
    and enables the `!`/`?` statements.
    """
    types: list[str | None] = []
    names: list[str] = []
    live: dict[str, int] = {}
    consumed: set[str] = set()

    def fresh(name, typ):
        types.append(typ)
        names.append(name)
        return len(types) - 1

    def bind(name, typ, where):
        if name in live:
            raise LinearityError(f"{where}: variable {name!r} is rebound while still unused")
        live[name] = fresh(name, typ)
        consumed.discard(name)
        return live[name]

    def use(name, expected, where):
        if name not in live:
            if name in consumed:
                raise LinearityError(f"{where}: variable {name!r} is used more than once")
            raise LinearityError(f"{where}: variable {name!r} is unbound")
        v = live.pop(name)
        consumed.add(name)
        if types[v] is None:
            types[v] = expected
        elif expected is not None and types[v] != expected:
            raise TypeMismatchError(f"{where}: variable {name!r} has type {types[v]}, expected {expected}")
        return v

    params = []
    for name, typ in program.params:
        if typ is not None and not sig.has_object(typ):
            raise ValidationError(f"parameter {name!r}: undeclared type {typ!r}")
        params.append(bind(name, typ, f"parameter {name!r}"))

    stmts = []
    for k, st in enumerate(program.statements):
        where = f"statement {k + 1} (line {st.line})"
        if st.generator in (SEND_STMT, RECV_STMT):
            if send_recv is None:
                raise ValidationError(f"{where}: send/receive statements need a session signature")
            if st.generator == RECV_STMT:
                if st.type_arg not in send_recv:
                    raise ValidationError(f"{where}: no receive generator for type {st.type_arg!r}")
                gen = send_recv[st.type_arg][1]
                stmts.append(TypedStatement(gen, (), (bind(st.binders[0], st.type_arg, where),)))
            else:
                if len(st.args) != 1:
                    raise ValidationError(f"{where}: a send takes exactly one variable")
                name = st.args[0]
                if name in live and types[live[name]] is None:
                    raise ValidationError(f"{where}: cannot infer the type of {name!r}; annotate it")
                v = use(name, None, where)
                if types[v] not in send_recv:
                    raise ValidationError(f"{where}: no send generator for type {types[v]!r}")
                stmts.append(TypedStatement(send_recv[types[v]][0], (v,), ()))
            continue
        try:
            gen = sig.generator(st.generator)
        except ValidationError:
            raise ValidationError(f"{where}: unknown generator {st.generator!r}") from None
        if len(st.args) != len(gen.inputs):
            raise TypeMismatchError(
                f"{where}: {st.generator} takes {len(gen.inputs)} arguments, got {len(st.args)}")
        if len(st.binders) != len(gen.outputs):
            raise TypeMismatchError(
                f"{where}: {st.generator} produces {len(gen.outputs)} results, got {len(st.binders)}")
        if len(set(st.binders)) != len(st.binders):
            raise LinearityError(f"{where}: duplicate binder")
        args = tuple(use(a, t, where) for a, t in zip(st.args, gen.inputs))
        binders = tuple(bind(b, t, where) for b, t in zip(st.binders, gen.outputs))
        stmts.append(TypedStatement(st.generator, args, binders))

    rets = tuple(use(r, None, "return") for r in program.returns)
    if live:
        name = next(iter(live))
        raise LinearityError(f"variable {name!r} is never used")
    for v, t in enumerate(types):
        if t is None:
            raise ValidationError(f"cannot infer the type of {names[v]!r}; annotate it")
    return TypedProgram(program, sig, tuple(types), tuple(names), tuple(params),
                        tuple(stmts), rets)


def elaborate(typed: TypedProgram) -> Diagram:
    """One node per statement, one wire per variable."""
    b = DiagramBuilder(typed.polygraph)
    wire = {}
    for v in typed.params:
        wire[v] = b.add_input(typed.var_types[v])
    for st in typed.statements:
        outs = b.apply(st.generator, [wire[v] for v in st.args])
        for v, w in zip(st.binders, outs):
            wire[v] = w
    return b.build([wire[v] for v in typed.returns])


def elaborate_text(text: str, sig: Polygraph) -> Diagram:
    return elaborate(check(parse(text), sig))


def insertion_count(n: int, m: int) -> int:
    """Ways of inserting n new items into an m-item list, keeping its order.

    Uses Ins(0, m) = 1 and Ins(n + 1, m) = (m + 1) * Ins(n, m + 1).
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    factor = 1
    while n > 0:
        factor *= m + 1
        n, m = n - 1, m + 1
    return factor
