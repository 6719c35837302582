"""Polar lists and polar shuffles, the combinatorial algebra of message passing.

A position is a pair (list, index) where list -1 is the output list and
lists 0..n-1 are the inputs. The pairing maps every domain position (input
sends and output receives) to a codomain position (output sends and input
receives). A polar shuffle is valid when the pairing preserves types and the
graph made of the pairing edges plus the forward edges inside every list is
acyclic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .errors import CycleError, ParseError, TypeMismatchError, ValidationError
from .shuffle import Shuffling

OUT = -1
DEFAULT_TYPE = "X"


class Polarity(Enum):
    SEND = "!"
    RECV = "?"

    @property
    def symbol(self) -> str:
        return "•" if self is Polarity.SEND else "∘"


SEND = Polarity.SEND
RECV = Polarity.RECV


class PolarItem(NamedTuple):
    type: str
    polarity: Polarity

    def __str__(self):
        return f"{self.type}{self.polarity.symbol}"


PolarList = tuple  # tuple[PolarItem, ...]
Position = tuple  # (list index or OUT, index)


def _items(seq) -> tuple[PolarItem, ...]:
    if type(seq) is tuple and all(type(it) is PolarItem for it in seq):
        return seq
    return tuple(it if type(it) is PolarItem else PolarItem(*it) for it in seq)


def plist(text: str | list) -> tuple[PolarItem, ...]:
    """Parse a polar list like ``"X! Y?"`` (also accepts • and ∘)."""
    if not isinstance(text, str):
        return _items(text)
    items = []
    for tok in text.replace(",", " ").split():
        mark = tok[-1]
        if mark in "!•":
            items.append(PolarItem(tok[:-1], SEND))
        elif mark in "?∘":
            items.append(PolarItem(tok[:-1], RECV))
        else:
            raise ParseError(f"polar item {tok!r} lacks a polarity mark")
    return tuple(items)


def format_list(items) -> str:
    return " ".join(f"{it.type}{it.polarity.value}" for it in items)


def _is_domain(lst: int, pol: Polarity) -> bool:
    return (lst == OUT) == (pol is RECV)


@dataclass(frozen=True, eq=False)
class PolarShuffle:
    inputs: tuple[tuple[PolarItem, ...], ...]
    output: tuple[PolarItem, ...]
    pairing: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(_items(l) for l in self.inputs))
        object.__setattr__(self, "output", _items(self.output))
        object.__setattr__(self, "pairing", dict(self.pairing))

    def item(self, pos: Position) -> PolarItem:
        lst, i = pos
        return self.output[i] if lst == OUT else self.inputs[lst][i]

    def list_at(self, lst: int):
        return self.output if lst == OUT else self.inputs[lst]

    def positions(self):
        for lst in list(range(len(self.inputs))) + [OUT]:
            for i in range(len(self.list_at(lst))):
                yield (lst, i)

    def domain(self) -> list[Position]:
        return [p for p in self.positions() if _is_domain(p[0], self.item(p).polarity)]

    def codomain(self) -> list[Position]:
        return [p for p in self.positions() if not _is_domain(p[0], self.item(p).polarity)]

    @property
    def arity(self) -> int:
        return len(self.inputs)

    @property
    def size(self) -> int:
        return len(self.output) + sum(len(l) for l in self.inputs)

    def sorted_pairs(self) -> tuple:
        return tuple(sorted(self.pairing.items()))

    def __eq__(self, other):
        if not isinstance(other, PolarShuffle):
            return NotImplemented
        return (self.inputs, self.output, self.sorted_pairs()) == \
            (other.inputs, other.output, other.sorted_pairs())

    def __hash__(self):
        return hash((self.inputs, self.output, self.sorted_pairs()))

    def __repr__(self):
        ins = " | ".join(format_list(l) for l in self.inputs)
        return f"PolarShuffle([{ins}] -> [{format_list(self.output)}], {len(self.pairing)} pairs)"


@dataclass
class ValidationReport:
    ok: bool
    reason: str = ""
    witness: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _structure(s: PolarShuffle) -> ValidationReport:
    dom = set(s.domain())
    cod = set(s.codomain())
    keys = set(s.pairing)
    if keys != dom:
        missing = sorted(dom - keys)
        extra = sorted(keys - dom)
        return ValidationReport(False, f"pairing domain mismatch: missing {missing}, unexpected {extra}")
    values = list(s.pairing.values())
    if len(set(values)) != len(values) or set(values) != cod:
        return ValidationReport(False, "pairing is not a bijection onto the codomain")
    for a, b in s.pairing.items():
        if s.item(a).type != s.item(b).type:
            return ValidationReport(False, f"type mismatch: {a} is {s.item(a).type}, {b} is {s.item(b).type}",
                                    [a, b])
    return ValidationReport(True)


def validate(s: PolarShuffle) -> ValidationReport:
    """Linear-time check: type-preserving bijection and an acyclic graph."""
    # number vertices list by list; list offsets make the linear edges implicit
    lists = list(s.inputs) + [s.output]
    out_index = len(s.inputs)
    offset = [0]
    for l in lists:
        offset.append(offset[-1] + len(l))
    nv = offset[-1]
    vtype = [it.type for l in lists for it in l]
    is_dom = []
    for k, l in enumerate(lists):
        want = RECV if k == out_index else SEND
        is_dom.extend(it.polarity is want for it in l)

    pair_succ = [-1] * nv
    pair_pred = [-1] * nv
    structural = len(s.pairing) == sum(is_dom)
    try:
        pairs = [(la, ia, lb, ib) for (la, ia), (lb, ib) in s.pairing.items()] if structural else []
    except (TypeError, ValueError):
        structural, pairs = False, []
    if structural:
        for la, ia, lb, ib in pairs:
            ka = out_index if la == OUT else la
            kb = out_index if lb == OUT else lb
            if not (0 <= ka <= out_index and 0 <= kb <= out_index
                    and 0 <= ia < len(lists[ka]) and 0 <= ib < len(lists[kb])):
                structural = False
                break
            va, vb = offset[ka] + ia, offset[kb] + ib
            if not is_dom[va] or is_dom[vb] or pair_pred[vb] >= 0 or vtype[va] != vtype[vb]:
                structural = False
                break
            pair_succ[va] = vb
            pair_pred[vb] = va
    if not structural:
        try:
            report = _structure(s)
        except (IndexError, TypeError) as exc:
            return ValidationReport(False, f"position out of range: {exc}")
        return report if not report.ok else ValidationReport(False, "pairing is not a bijection onto the codomain")
    is_last = [False] * nv
    is_first = [False] * nv
    for k in range(len(lists)):
        if offset[k + 1] > offset[k]:
            is_first[offset[k]] = True
            is_last[offset[k + 1] - 1] = True
    indeg = [0] * nv
    for v in range(nv):
        if not is_first[v]:
            indeg[v] += 1
        if pair_pred[v] >= 0:
            indeg[v] += 1
    stack = [v for v in range(nv) if indeg[v] == 0]
    done = 0
    while stack:
        v = stack.pop()
        done += 1
        if not is_last[v]:
            indeg[v + 1] -= 1
            if indeg[v + 1] == 0:
                stack.append(v + 1)
        u = pair_succ[v]
        if u >= 0:
            indeg[u] -= 1
            if indeg[u] == 0:
                stack.append(u)
    if done == nv:
        return ValidationReport(True)

    def pos_of(v):
        for k in range(len(lists)):
            if offset[k] <= v < offset[k + 1]:
                return (OUT if k == len(s.inputs) else k, v - offset[k])

    # every blocked vertex has a blocked predecessor: walk back to a cycle
    v = next(u for u in range(nv) if indeg[u] > 0)
    seen: dict[int, int] = {}
    path = []
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        preds = []
        if not is_first[v]:
            preds.append(v - 1)
        if pair_pred[v] >= 0:
            preds.append(pair_pred[v])
        v = next(p for p in preds if indeg[p] > 0)
    cycle = [pos_of(u) for u in path[seen[v]:][::-1]]
    return ValidationReport(False, "induced graph has a cycle", cycle)


def check(s: PolarShuffle) -> PolarShuffle:
    report = validate(s)
    if not report.ok:
        if report.witness and "cycle" in report.reason:
            raise CycleError(f"invalid polar shuffle: {report.reason} {report.witness}", report.witness)
        raise ValidationError(f"invalid polar shuffle: {report.reason}")
    return s


# ------------------------------------------------------------ algebra

def identity(gamma) -> PolarShuffle:
    gamma = plist(gamma)
    pairing = {}
    for i, it in enumerate(gamma):
        if it.polarity is SEND:
            pairing[(0, i)] = (OUT, i)
        else:
            pairing[(OUT, i)] = (0, i)
    return PolarShuffle((gamma,), gamma, pairing)


def compose(s: PolarShuffle, position: int, t: PolarShuffle) -> PolarShuffle:
    """Plug the output of `s` into input list `position` of `t`."""
    if not 0 <= position < t.arity:
        raise ValidationError(f"position {position} out of range for arity {t.arity}")
    if s.output != t.inputs[position]:
        raise TypeMismatchError(
            f"border mismatch: [{format_list(s.output)}] against [{format_list(t.inputs[position])}]")
    n = s.arity

    def from_s(pos):
        return (pos[0] + position, pos[1])

    def from_t(pos):
        lst = pos[0]
        if lst == OUT or lst < position:
            return pos
        return (lst + n - 1, pos[1])

    def follow_s(pos):
        while True:
            tgt = s.pairing[pos]
            if tgt[0] != OUT:
                return from_s(tgt)
            # a send on the border continues inside t
            tgt = t.pairing[(position, tgt[1])]
            if tgt[0] != position:
                return from_t(tgt)
            pos = (OUT, tgt[1])

    def follow_t(pos):
        tgt = t.pairing[pos]
        if tgt[0] != position:
            return from_t(tgt)
        return follow_s((OUT, tgt[1]))

    pairing = {}
    for pos in s.domain():
        if pos[0] != OUT:
            pairing[from_s(pos)] = follow_s(pos)
    for pos in t.domain():
        if pos[0] != position:
            pairing[from_t(pos)] = follow_t(pos)
    inputs = t.inputs[:position] + s.inputs + t.inputs[position + 1:]
    result = PolarShuffle(inputs, t.output, pairing)
    report = validate(result)
    assert report.ok, f"composite of valid polar shuffles failed validation: {report}"
    return result


def tensor(s: PolarShuffle, t: PolarShuffle) -> PolarShuffle:
    if s.arity != t.arity:
        raise ValidationError(f"arity mismatch: {s.arity} against {t.arity}")

    def shift(pos):
        lst, i = pos
        if lst == OUT:
            return (OUT, i + len(s.output))
        return (lst, i + len(s.inputs[lst]))

    pairing = dict(s.pairing)
    for a, b in t.pairing.items():
        pairing[shift(a)] = shift(b)
    inputs = tuple(a + b for a, b in zip(s.inputs, t.inputs))
    return PolarShuffle(inputs, s.output + t.output, pairing)


def infer(inputs, output) -> PolarShuffle | None:
    """The unique type-forced polar shuffle between distinctly typed lists."""
    inputs = tuple(plist(l) for l in inputs)
    output = plist(output)
    skeleton = PolarShuffle(inputs, output, {})
    dom: dict[str, Position] = {}
    cod: dict[str, Position] = {}
    for pos in skeleton.positions():
        it = skeleton.item(pos)
        side = dom if _is_domain(pos[0], it.polarity) else cod
        if it.type in side:
            raise ValidationError(f"not distinctly typed: {it.type!r} repeats with the same variance")
        side[it.type] = pos
    if set(dom) != set(cod):
        odd = sorted(set(dom) ^ set(cod))
        raise ValidationError(f"not distinctly typed: {odd[0]!r} appears only once")
    s = PolarShuffle(inputs, output, {dom[x]: cod[x] for x in dom})
    return s if validate(s).ok else None


# ------------------------------------------------------------ builders

def link_shuffle(gamma, x: str, delta) -> PolarShuffle:
    """Unary shuffle Γ, X•, X∘, Δ  ->  Γ, Δ linking the two X ends."""
    gamma, delta = plist(gamma), plist(delta)
    src = gamma + (PolarItem(x, SEND), PolarItem(x, RECV)) + delta
    tgt = gamma + delta
    g = len(gamma)
    idx = list(range(g)) + [None, None] + list(range(g, len(tgt)))
    return _unary(src, tgt, idx, links=[(g, g + 1)])


def spawn_shuffle(gamma, x: str, delta) -> PolarShuffle:
    """Unary shuffle Γ, Δ  ->  Γ, X∘, X•, Δ opening a fresh channel."""
    gamma, delta = plist(gamma), plist(delta)
    src = gamma + delta
    tgt = gamma + (PolarItem(x, RECV), PolarItem(x, SEND)) + delta
    g = len(gamma)
    idx = list(range(g)) + [i + 2 for i in range(g, len(src))]
    return _unary(src, tgt, idx, spawns=[(g, g + 1)])


def _unary(src, tgt, idx, links=(), spawns=()) -> PolarShuffle:
    """Unary shuffle sending src[i] to tgt[idx[i]] (None for linked items)."""
    pairing = {}
    for i, j in enumerate(idx):
        if j is None:
            continue
        if src[i] != tgt[j]:
            raise TypeMismatchError(f"{src[i]} cannot move to {tgt[j]}")
        if src[i].polarity is SEND:
            pairing[(0, i)] = (OUT, j)
        else:
            pairing[(OUT, j)] = (0, i)
    for a, b in links:
        pairing[(0, a)] = (0, b)
    for a, b in spawns:
        pairing[(OUT, a)] = (OUT, b)
    return PolarShuffle((tuple(src),), tuple(tgt), pairing)


def reorder(src, perm) -> PolarShuffle:
    """Unary shuffle whose output position j holds src[perm[j]]."""
    src = plist(src)
    tgt = tuple(src[i] for i in perm)
    idx = [0] * len(src)
    for j, i in enumerate(perm):
        idx[i] = j
    return _unary(src, tgt, idx)


def lift(plain: Shuffling, lists) -> PolarShuffle:
    """Polar shuffle interleaving the lists as `plain` does, with no channels."""
    lists = tuple(plist(l) for l in lists)
    if tuple(len(l) for l in lists) != plain.block_sizes:
        raise ValidationError("list lengths do not match the shuffling's blocks")
    output = []
    pairing = {}
    cursor = [0] * len(lists)
    for j, b in enumerate(plain.assignment):
        i = cursor[b]
        cursor[b] += 1
        it = lists[b][i]
        output.append(it)
        if it.polarity is SEND:
            pairing[(b, i)] = (OUT, j)
        else:
            pairing[(OUT, j)] = (b, i)
    return PolarShuffle(lists, tuple(output), pairing)


def _check_item(item, pol: Polarity) -> PolarItem:
    if isinstance(item, str):
        item = PolarItem(item, pol)
    item = PolarItem(*item)
    if item.polarity is not pol:
        raise ValidationError(f"{item} does not have polarity {pol.symbol}")
    return item


def wait(gamma, x, delta, psi) -> PolarShuffle:
    """Send later: Γ, X•, Δ, Ψ  ->  Γ, Δ, X•, Ψ."""
    gamma, delta, psi = plist(gamma), plist(delta), plist(psi)
    x = _check_item(x, SEND)
    src = gamma + (x,) + delta + psi
    g, d = len(gamma), len(delta)
    perm = list(range(g)) + [g + 1 + i for i in range(d)] + [g] + list(range(g + 1 + d, len(src)))
    return reorder(src, perm)


def rush(gamma, x, delta, psi) -> PolarShuffle:
    """Receive sooner: Γ, Δ, X∘, Ψ  ->  Γ, X∘, Δ, Ψ."""
    gamma, delta, psi = plist(gamma), plist(delta), plist(psi)
    x = _check_item(x, RECV)
    src = gamma + delta + (x,) + psi
    g, d = len(gamma), len(delta)
    perm = list(range(g)) + [g + d] + [g + i for i in range(d)] + list(range(g + d + 1, len(src)))
    return reorder(src, perm)


def send_sooner(gamma, x, delta, psi) -> PolarShuffle:
    """The forbidden mirror of wait: Γ, Δ, X•, Ψ  ->  Γ, X•, Δ, Ψ (unvalidated)."""
    gamma, delta, psi = plist(gamma), plist(delta), plist(psi)
    x = _check_item(x, SEND)
    src = gamma + delta + (x,) + psi
    g, d = len(gamma), len(delta)
    perm = list(range(g)) + [g + d] + [g + i for i in range(d)] + list(range(g + d + 1, len(src)))
    return reorder(src, perm)


def receive_later(gamma, x, delta, psi) -> PolarShuffle:
    """The forbidden mirror of rush: Γ, X∘, Δ, Ψ  ->  Γ, Δ, X∘, Ψ (unvalidated)."""
    gamma, delta, psi = plist(gamma), plist(delta), plist(psi)
    x = _check_item(x, RECV)
    src = gamma + (x,) + delta + psi
    g, d = len(gamma), len(delta)
    perm = list(range(g)) + [g + 1 + i for i in range(d)] + [g] + list(range(g + 1 + d, len(src)))
    return reorder(src, perm)


def swap_same_polarity(gamma, x, y, delta) -> PolarShuffle:
    """Γ, X, Y, Δ  ->  Γ, Y, X, Δ for two items of equal polarity."""
    gamma, delta = plist(gamma), plist(delta)
    x, y = PolarItem(*x), PolarItem(*y)
    if x.polarity is not y.polarity:
        raise ValidationError(f"cannot swap {x} and {y}: polarities differ")
    src = gamma + (x, y) + delta
    g = len(gamma)
    perm = list(range(g)) + [g + 1, g] + list(range(g + 2, len(src)))
    return reorder(src, perm)


# -------------------------------------------------------- factorization

@dataclass(frozen=True)
class Factorization:
    """Reorder each input, interleave, link, then spawn.

    `reorders[i]` is a unary wait/rush shuffle on input i, `pure_shuffle` the
    plain interleaving (with `pure` its lifted polar form), `link_stage` the
    unary shuffle removing linked pairs and `spawn_stage` the unary shuffle
    inserting spawned channels.
    """

    reorders: tuple[PolarShuffle, ...]
    pure_shuffle: Shuffling
    pure: PolarShuffle
    links: tuple[tuple[int, int], ...]
    link_stage: PolarShuffle
    spawn_list: tuple[tuple[str, int, int], ...]
    spawn_stage: PolarShuffle


def _topological_rank(s: PolarShuffle) -> dict:
    succ: dict = {p: [] for p in s.positions()}
    for lst in list(range(s.arity)) + [OUT]:
        l = s.list_at(lst)
        for i in range(len(l) - 1):
            succ[(lst, i)].append((lst, i + 1))
    for a, b in s.pairing.items():
        succ[a].append(b)
    indeg = {p: 0 for p in succ}
    for p in succ:
        for q in succ[p]:
            indeg[q] += 1
    ready = sorted((p for p in succ if indeg[p] == 0), reverse=True)
    rank = {}
    while ready:
        p = ready.pop()
        rank[p] = len(rank)
        for q in succ[p]:
            indeg[q] -= 1
            if indeg[q] == 0:
                ready.append(q)
    if len(rank) != len(succ):
        raise CycleError("cannot factor an invalid polar shuffle")
    return rank


def factor(s: PolarShuffle) -> Factorization:
    check(s)
    rank = _topological_rank(s)
    inv = {b: a for a, b in s.pairing.items()}

    def partner(pos):
        return s.pairing.get(pos, inv.get(pos))

    # key each input element: pass-throughs by their output partner, linked ones by themselves
    keyed = []
    for lst in range(s.arity):
        for i, it in enumerate(s.inputs[lst]):
            other = partner((lst, i))
            key = rank[other] if other[0] == OUT else rank[(lst, i)]
            keyed.append((key, lst, i))
    keyed.sort()
    reorders = []
    new_lists = []
    new_index = {}
    for lst in range(s.arity):
        mine = [(k, i) for k, l, i in keyed if l == lst]
        perm = [i for _, i in mine]
        for j, i in enumerate(perm):
            new_index[(lst, i)] = j
        reorders.append(reorder(s.inputs[lst], perm))
        new_lists.append(tuple(s.inputs[lst][i] for i in perm))
    pure_shuffle = Shuffling(tuple(len(l) for l in new_lists), tuple(l for _, l, _ in keyed))
    pure = lift(pure_shuffle, new_lists)

    merged = [s.inputs[l][i] for _, l, i in keyed]
    merged_index = {(l, i): j for j, (_, l, i) in enumerate(keyed)}
    links = []
    passing = []
    for j, (_, l, i) in enumerate(keyed):
        other = partner((l, i))
        if other[0] == OUT:
            passing.append(j)
        elif s.item((l, i)).polarity is SEND:
            links.append((j, merged_index[other]))
    middle = tuple(merged[j] for j in passing)
    idx = [None] * len(merged)
    for k, j in enumerate(passing):
        idx[j] = k
    link_stage = _unary(tuple(merged), middle, idx, links=links)

    spawns = []
    out_pass = []
    for j, it in enumerate(s.output):
        other = partner((OUT, j))
        if other[0] == OUT:
            if it.polarity is RECV:
                spawns.append((it.type, j, other[1]))
        else:
            out_pass.append(j)
    spawn_stage = _unary(middle, s.output, out_pass, spawns=[(a, b) for _, a, b in spawns])
    return Factorization(tuple(reorders), pure_shuffle, pure, tuple(links), link_stage,
                         tuple(spawns), spawn_stage)


def recompose(f: Factorization) -> PolarShuffle:
    tail = compose(f.link_stage, 0, f.spawn_stage)
    result = compose(f.pure, 0, tail)
    for i, r in enumerate(f.reorders):
        result = compose(r, i, result)
    return result


# ------------------------------------------------------------ encodings

@dataclass
class Encoding:
    """A parsed `.msg` session encoding."""

    name: str
    part_names: list[str]
    shuffle: PolarShuffle
    edge_names: dict  # position -> variable name


_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(){},=:!?])|(?P<comment>#[^\n]*))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            # skip whitespace to report the real offending character
            while text[pos].isspace():
                if text[pos] == "\n":
                    line, line_start = line + 1, pos + 1
                pos += 1
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        for k in range(pos, m.end()):
            if text[k] == "\n":
                line, line_start = line + 1, k + 1
        start = m.start("ident") if m.group("ident") else m.start("punct") if m.group("punct") else None
        if start is not None:
            tokens.append((m.group("ident") or m.group("punct"), line, start - line_start + 1,
                           bool(m.group("ident"))))
        pos = m.end()
    return tokens


class _Cursor:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, None, False)

    def take(self, expected=None, ident=False):
        tok = self.peek()
        if tok[0] is None:
            last = self.tokens[-1] if self.tokens else (None, 1, 1, False)
            raise ParseError(f"unexpected end of input, expected {expected or 'identifier'}", last[1], last[2])
        if ident and not tok[3]:
            raise ParseError(f"expected identifier, found {tok[0]!r}", tok[1], tok[2])
        if expected is not None and tok[0] != expected:
            raise ParseError(f"expected {expected!r}, found {tok[0]!r}", tok[1], tok[2])
        self.i += 1
        return tok


def _parse_polarized(cur: _Cursor):
    cur.take("(")
    items = []
    if cur.peek()[0] == ")":
        cur.take(")")
        return items
    while True:
        mark = cur.peek()
        if mark[0] not in ("!", "?"):
            raise ParseError(f"expected '!' or '?', found {mark[0]!r}", mark[1], mark[2])
        cur.take()
        name = cur.take(ident=True)
        typ = None
        if cur.peek()[0] == ":":
            cur.take(":")
            typ = cur.take(ident=True)[0]
        items.append((SEND if mark[0] == "!" else RECV, name[0], typ, name[1], name[2]))
        nxt = cur.take()
        if nxt[0] == ")":
            return items
        if nxt[0] != ",":
            raise ParseError(f"expected ',' or ')', found {nxt[0]!r}", nxt[1], nxt[2])


def parse_encoding(text: str, default_type: str = DEFAULT_TYPE, validate_result: bool = True) -> Encoding:
    """Parse ``name(?a, !b) = { part(!a, ?c), ... }``.

    An edge variable must occur exactly twice: once in the domain (a part's
    `!` or the header's `?`) and once in the codomain (the header's `!` or a
    part's `?`). An optional ``:Type`` annotation types an edge.
    """
    cur = _Cursor(_tokenize(text))
    name = cur.take(ident=True)[0]
    header = _parse_polarized(cur)
    cur.take("=")
    cur.take("{")
    parts = []
    while cur.peek()[0] != "}":
        pname = cur.take(ident=True)[0]
        parts.append((pname, _parse_polarized(cur)))
        if cur.peek()[0] == ",":
            cur.take(",")
        elif cur.peek()[0] != "}":
            tok = cur.peek()
            raise ParseError(f"expected ',' or '}}', found {tok[0]!r}", tok[1], tok[2])
    cur.take("}")
    if cur.peek()[0] is not None:
        tok = cur.peek()
        raise ParseError(f"trailing input {tok[0]!r}", tok[1], tok[2])

    occurrences: dict[str, list] = {}
    lists = [(k, items) for k, (_, items) in enumerate(parts)] + [(OUT, header)]
    for lst, items in lists:
        for i, (pol, var, typ, line, col) in enumerate(items):
            occurrences.setdefault(var, []).append(((lst, i), pol, typ, line, col))
    pairing = {}
    types: dict[Position, str] = {}
    edge_names = {}
    for var, occ in occurrences.items():
        if len(occ) != 2:
            _, _, _, line, col = occ[-1]
            raise ParseError(f"edge {var!r} is used {len(occ)} times, expected exactly 2", line, col)
        dom = [o for o in occ if _is_domain(o[0][0], o[1])]
        cod = [o for o in occ if not _is_domain(o[0][0], o[1])]
        if len(dom) != 1:
            _, _, _, line, col = occ[1]
            side = "domain" if dom else "codomain"
            raise ParseError(
                f"edge {var!r} joins two {side} occurrences; an edge must connect a part's '!' or the "
                f"header's '?' to the header's '!' or a part's '?'", line, col)
        annotated = {o[2] for o in occ if o[2] is not None}
        if len(annotated) > 1:
            raise ParseError(f"edge {var!r} has conflicting types {sorted(annotated)}", occ[1][3], occ[1][4])
        typ = annotated.pop() if annotated else default_type
        pairing[dom[0][0]] = cod[0][0]
        for o in occ:
            types[o[0]] = typ
            edge_names[o[0]] = var

    def build(lst, items):
        return tuple(PolarItem(types[(lst, i)], pol) for i, (pol, *_rest) in enumerate(items))

    shuffle = PolarShuffle(tuple(build(k, items) for k, items in lists[:-1]), build(OUT, header), pairing)
    if validate_result:
        report = validate(shuffle)
        if not report.ok:
            names = [edge_names.get(p, str(p)) for p in report.witness]
            raise CycleError(f"encoding {name!r} is invalid: {report.reason} through {names}", names)
    return Encoding(name, [p for p, _ in parts], shuffle, edge_names)


def print_encoding(s: PolarShuffle, name: str = "session", part_names=None,
                   edge_names: dict | None = None, annotate: bool | None = None) -> str:
    """Render a polar shuffle in the `.msg` syntax; inverse of parse_encoding."""
    part_names = part_names or [f"p{i}" for i in range(s.arity)]
    names = {}
    for k, (a, b) in enumerate(sorted(s.pairing.items())):
        var = (edge_names or {}).get(a) or f"e{k}"
        names[a] = names[b] = var
    if annotate is None:
        annotate = any(s.item(p).type != DEFAULT_TYPE for p in s.positions())

    def render(lst):
        out = []
        for i, it in enumerate(s.list_at(lst)):
            suffix = f":{it.type}" if annotate else ""
            out.append(f"{it.polarity.value}{names[(lst, i)]}{suffix}")
        return ", ".join(out)

    lines = [f"{name}({render(OUT)}) = {{"]
    for k in range(s.arity):
        lines.append(f"  {part_names[k]}({render(k)}),")
    lines.append("}")
    return "\n".join(lines) + "\n"
