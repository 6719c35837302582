"""Sessions: effectful diagrams threaded by the runtime wire R.

A session over a base polygraph lives in the runtime extension of its
session polygraph, with boundary R,dom -> R,cod. Reading the send/receive
nodes along the R path gives its event list (• for send, ∘ for receive).
Sessions split into combs, glue along polar shuffles, and contain the
process category Proc.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import polar
from .diagram import Diagram, DiagramBuilder, Node, canonical_form, is_equal
from .donotation import check as check_program
from .donotation import parse as parse_program
from .errors import ValidationError
from .polar import OUT, RECV, SEND, PolarItem, PolarShuffle
from .shuffle import Shuffling
from .signature import (RECV_PREFIX, RUNTIME, SEND_PREFIX, Polygraph, event_of,
                        is_runtime_generator, pure_restriction, runtime_extend,
                        session_polygraph)


def session_runtime(base: Polygraph) -> Polygraph:
    """Runtime extension of the session polygraph over a pure base."""
    return runtime_extend(session_polygraph(base))


@dataclass(frozen=True, eq=False)
class Session:
    diagram: Diagram
    effects: tuple[int, ...]  # effectful node indices in R-path order

    @classmethod
    def of(cls, d: Diagram) -> "Session":
        return cls(d, _runtime_path(d))

    @property
    def polygraph(self) -> Polygraph:
        return self.diagram.polygraph

    @property
    def dom(self) -> tuple[str, ...]:
        return self.diagram.dom[1:]

    @property
    def cod(self) -> tuple[str, ...]:
        return self.diagram.cod[1:]

    def __repr__(self):
        ev = polar.format_list(events(self))
        return f"Session({list(self.dom)} -> {list(self.cod)}, events [{ev}], {len(self.diagram.nodes)} nodes)"


def _runtime_path(d: Diagram) -> tuple[int, ...]:
    if not d.dom or d.dom[0] != RUNTIME or not d.cod or d.cod[0] != RUNTIME:
        raise ValidationError("a session's boundaries must start with the runtime wire R")
    if RUNTIME in d.dom[1:] or RUNTIME in d.cod[1:]:
        raise ValidationError("only boundary position 0 may carry the runtime wire")
    cons = d.consumers()
    path = []
    w = d.inputs[0]
    while True:
        c = cons[w]
        if c[0] == "out":
            if c[1] != 0:
                raise ValidationError("the runtime wire does not end at output position 0")
            break
        node = d.nodes[c[0]]
        gen = d.polygraph.generator(node.gen)
        if c[1] != 0 or not is_runtime_generator(gen):
            raise ValidationError(f"the runtime wire enters {node.gen} at a non-runtime port")
        path.append(c[0])
        w = node.outs[0]
    touching = {k for k, n in enumerate(d.nodes)
                if RUNTIME in d.polygraph.generator(n.gen).inputs
                or RUNTIME in d.polygraph.generator(n.gen).outputs}
    if touching != set(path):
        raise ValidationError("some node touches R outside the runtime path")
    return tuple(path)


def events(s: Session) -> tuple[PolarItem, ...]:
    """The send/receive nodes along R: send_X gives X•, recv_X gives X∘."""
    out = []
    for k in s.effects:
        ev = event_of(s.polygraph.generator(s.diagram.nodes[k].gen))
        if ev is not None:
            out.append(PolarItem(ev[1], SEND if ev[0] == "send" else RECV))
    return tuple(out)


def is_equal_sessions(a: Session, b: Session) -> bool:
    return is_equal(a.diagram, b.diagram)


# --------------------------------------------------------------- combs

@dataclass(frozen=True, eq=False)
class Comb:
    """Pure pieces f_0..f_n separated by the events in `holes`.

    Piece i maps residuals[i] (plus the received value, when event i is a
    receive) to residuals[i+1] (plus the sent value, when event i+1 is a
    send). residuals[0] is the session's domain and residuals[n+1] its
    codomain.
    """

    holes: tuple[PolarItem, ...]
    pieces: tuple[Diagram, ...]
    residuals: tuple[tuple[str, ...], ...]
    runtime: Polygraph


def to_comb(s: Session) -> Comb:
    d = s.diagram
    for k in s.effects:
        if event_of(d.polygraph.generator(d.nodes[k].gen)) is None:
            raise ValidationError(f"{d.nodes[k].gen} is not a send or receive; only sessions split into combs")
    n = len(s.effects)
    event_index = {k: i + 1 for i, k in enumerate(s.effects)}
    prod, cons = d.producers(), d.consumers()
    r_wires = {d.inputs[0]} | {d.nodes[k].outs[0] for k in s.effects}

    piece: dict[int, int] = {}
    for k, node in enumerate(d.nodes):  # nodes are stored in topological order
        if k in event_index:
            continue
        t = 0
        for w in node.ins:
            t = max(t, _prod_time(w, prod, piece, event_index))
        piece[k] = t

    def cons_time(w):
        c = cons[w][0]
        if c == "out":
            return n
        if c in event_index:
            return event_index[c] - 1
        return piece[c]

    rank = {w: i for i, w in enumerate(canonical_form(d).wire_order)}
    residual_wires = [[] for _ in range(n + 2)]
    for w in range(len(d.wire_types)):
        if w in r_wires:
            continue
        a, b = _prod_time(w, prod, piece, event_index), cons_time(w)
        for i in range(a + 1, b + 1):
            residual_wires[i].append(w)
    for lst in residual_wires:
        lst.sort(key=rank.__getitem__)
    residual_wires[0] = list(d.inputs[1:])
    residual_wires[n + 1] = list(d.outputs[1:])

    base = pure_restriction(d.polygraph)
    pieces = []
    holes = events(s)
    for i in range(n + 1):
        ins = list(residual_wires[i])
        if i >= 1 and holes[i - 1].polarity is RECV:
            ins.append(d.nodes[s.effects[i - 1]].outs[1])
        outs = list(residual_wires[i + 1])
        if i < n and holes[i].polarity is SEND:
            outs.append(d.nodes[s.effects[i]].ins[1])
        nodes = [d.nodes[k] for k in range(len(d.nodes)) if piece.get(k) == i]
        used = set(ins) | set(outs)
        for node in nodes:
            used.update(node.ins)
            used.update(node.outs)
        order = sorted(used)
        pos = {w: j for j, w in enumerate(order)}
        pieces.append(Diagram.make(
            base, [d.wire_types[w] for w in order],
            [Node(nd.gen, tuple(pos[w] for w in nd.ins), tuple(pos[w] for w in nd.outs)) for nd in nodes],
            [pos[w] for w in ins], [pos[w] for w in outs]))
    residuals = tuple(tuple(d.wire_types[w] for w in lst) for lst in residual_wires)
    return Comb(holes, tuple(pieces), residuals, d.polygraph)


def _prod_time(w, prod, piece, event_index):
    p = prod[w][0]
    if p == "in":
        return 0
    if p in event_index:
        return event_index[p]
    return piece[p]


def from_comb(c: Comb) -> Session:
    """Thread R through the pieces, placing each event between its neighbours."""
    b = DiagramBuilder(c.runtime)
    r = b.add_input(RUNTIME)
    current = [b.add_input(t) for t in c.residuals[0]]
    n = len(c.holes)
    for i, piece in enumerate(c.pieces):
        outs = b.inline(piece, current)
        if i == n:
            current = outs
            break
        hole = c.holes[i]
        if hole.polarity is SEND:
            *current, x = outs
            (r,) = b.apply(SEND_PREFIX + hole.type, [r, x])
        else:
            current = outs
            r, x = b.apply(RECV_PREFIX + hole.type, [r])
            current = current + [x]
    return Session.of(b.build([r] + current))


# ------------------------------------------------------------- gluing

def _disjoint_parts(parts):
    """Concatenate the parts' wires and nodes; R wires are dropped later."""
    types: list[str] = []
    nodes: list[Node] = []
    part_effects = []
    doms, cods = [], []
    for s in parts:
        off = len(types)
        base_node = len(nodes)
        d = s.diagram
        types.extend(d.wire_types)
        for n in d.nodes:
            nodes.append(Node(n.gen, tuple(w + off for w in n.ins), tuple(w + off for w in n.outs)))
        part_effects.append([base_node + k for k in s.effects])
        doms.append([w + off for w in d.inputs[1:]])
        cods.append([w + off for w in d.outputs[1:]])
    return types, nodes, part_effects, doms, cods


def _rethread(polygraph, types, nodes, effect_nodes, doms, cods, replace=None):
    """Rebuild R through `effect_nodes` (a list of Node or new-node specs) in order."""
    replace = replace or {}

    def fix(w):
        while w in replace:
            w = replace[w]
        return w

    types = list(types)
    r = len(types)
    types.append(RUNTIME)
    r0 = r
    out_nodes = [Node(n.gen, tuple(fix(w) for w in n.ins), tuple(fix(w) for w in n.outs)) for n in nodes]
    for gen, data_ins, data_outs in effect_nodes:
        nxt = len(types)
        types.append(RUNTIME)
        out_nodes.append(Node(gen, (r,) + tuple(fix(w) for w in data_ins),
                              (nxt,) + tuple(fix(w) for w in data_outs)))
        r = nxt
    inputs = [r0] + [fix(w) for dom in doms for w in dom]
    outputs = [r] + [fix(w) for cod in cods for w in cod]
    used = set(inputs) | set(outputs)
    for n in out_nodes:
        used.update(n.ins)
        used.update(n.outs)
    order = sorted(used)
    pos = {w: i for i, w in enumerate(order)}
    d = Diagram.make(polygraph, [types[w] for w in order],
                     [Node(n.gen, tuple(pos[w] for w in n.ins), tuple(pos[w] for w in n.outs))
                      for n in out_nodes],
                     [pos[w] for w in inputs], [pos[w] for w in outputs])
    return Session.of(d)


def _same_runtime(parts) -> Polygraph:
    if not parts:
        raise ValidationError("need at least one part to determine the polygraph")
    p = parts[0].polygraph
    for s in parts[1:]:
        if s.polygraph is not p and s.polygraph != p:
            raise ValidationError("parts live over different polygraphs")
    return p


def glue(parts, s: PolarShuffle, polygraph: Polygraph | None = None) -> Session:
    """Glue sessions along a polar shuffle.

    Linked send/receive pairs are deleted and their wires fused; pass-through
    events keep their nodes; spawned channels get a fresh receive feeding a
    fresh send. R is rethreaded through the output list in order. The
    polygraph is only needed when there are no parts.
    """
    parts = list(parts)
    if polygraph is None:
        polygraph = _same_runtime(parts)
    elif parts and _same_runtime(parts) != polygraph:
        raise ValidationError("parts live over a different polygraph")
    report = polar.validate(s)
    if not report.ok:
        raise ValidationError(f"cannot glue along an invalid polar shuffle: {report.reason}")
    if len(parts) != s.arity:
        raise ValidationError(f"{len(parts)} parts for a shuffle of arity {s.arity}")
    for i, part in enumerate(parts):
        ev = events(part)
        if len(ev) != len(part.effects):
            raise ValidationError(f"part {i} has effects that are not sends or receives")
        if ev != s.inputs[i]:
            for j, (a, b) in enumerate(zip(ev, s.inputs[i])):
                if a != b:
                    raise ValidationError(f"part {i}, event {j}: session has {a}, shuffle expects {b}")
            raise ValidationError(
                f"part {i}: session has {len(ev)} events, shuffle expects {len(s.inputs[i])}")
    types, nodes, part_effects, doms, cods = _disjoint_parts(parts)
    effect_set = {k for eff in part_effects for k in eff}
    pure_nodes = [n for k, n in enumerate(nodes) if k not in effect_set]

    def node_at(pos):
        return nodes[part_effects[pos[0]][pos[1]]]

    replace = {}
    for a, b in s.pairing.items():
        if a[0] != OUT and b[0] != OUT:
            # link: the receive's value wire becomes the send's value wire
            replace[node_at(b).outs[1]] = node_at(a).ins[1]

    inv = {b: a for a, b in s.pairing.items()}
    spawn_wire = {}
    effect_nodes = []
    for j, it in enumerate(s.output):
        if it.polarity is RECV:
            partner = s.pairing[(OUT, j)]
            if partner[0] == OUT:
                w = len(types)
                types.append(it.type)
                spawn_wire[partner[1]] = w
                effect_nodes.append((RECV_PREFIX + it.type, (), (w,)))
            else:
                n = node_at(partner)
                effect_nodes.append((n.gen, n.ins[1:], n.outs[1:]))
        else:
            partner = inv[(OUT, j)]
            if partner[0] == OUT:
                effect_nodes.append((SEND_PREFIX + it.type, (spawn_wire[j],), ()))
            else:
                n = node_at(partner)
                effect_nodes.append((n.gen, n.ins[1:], n.outs[1:]))
    return _rethread(polygraph, types, pure_nodes, effect_nodes, doms, cods, replace)


def interleave(parts, shuffling: Shuffling) -> Session:
    """Merge the effect sequences of the parts as the shuffling prescribes.

    Works for any effectful generators, not only sends and receives.
    """
    parts = list(parts)
    polygraph = _same_runtime(parts)
    if shuffling.block_sizes != tuple(len(p.effects) for p in parts):
        raise ValidationError("shuffling blocks do not match the parts' effect counts")
    types, nodes, part_effects, doms, cods = _disjoint_parts(parts)
    effect_set = {k for eff in part_effects for k in eff}
    pure_nodes = [n for k, n in enumerate(nodes) if k not in effect_set]
    cursor = [0] * len(parts)
    effect_nodes = []
    for b in shuffling.assignment:
        n = nodes[part_effects[b][cursor[b]]]
        cursor[b] += 1
        effect_nodes.append((n.gen, n.ins[1:], n.outs[1:]))
    return _rethread(polygraph, types, pure_nodes, effect_nodes, doms, cods)


def identity_session(polygraph: Polygraph, types=()) -> Session:
    b = DiagramBuilder(polygraph)
    ws = [b.add_input(RUNTIME)] + [b.add_input(t) for t in types]
    return Session.of(b.build(ws))


# --------------------------------------------------------------- Proc

def in_proc(d: Diagram, runtime: Polygraph | None = None) -> Session:
    """Receive the inputs (last first), run d, then send the outputs in order."""
    runtime = runtime or session_runtime(d.polygraph)
    b = DiagramBuilder(runtime)
    r = b.add_input(RUNTIME)
    received = []
    for t in reversed(d.dom):
        r, x = b.apply(RECV_PREFIX + t, [r])
        received.append(x)
    for x in b.inline(d, received[::-1]):
        (r,) = b.apply(SEND_PREFIX + b.wire_types[x], [r, x])
    return Session.of(b.build([r]))


def proc_type(s: Session) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """(inputs, outputs) of a process-shaped session; raises otherwise."""
    if s.dom or s.cod:
        raise ValidationError("a process has empty session boundaries")
    ev = events(s)
    if len(ev) != len(s.effects):
        raise ValidationError("a process only sends and receives")
    k = 0
    while k < len(ev) and ev[k].polarity is RECV:
        k += 1
    if any(it.polarity is RECV for it in ev[k:]):
        raise ValidationError("not process-shaped: a receive follows a send")
    return tuple(it.type for it in ev[:k][::-1]), tuple(it.type for it in ev[k:])


def _proc_events(a, b) -> tuple[PolarItem, ...]:
    return tuple(PolarItem(t, RECV) for t in reversed(a)) + tuple(PolarItem(t, SEND) for t in b)


def composition_shuffle(a, b, c) -> PolarShuffle:
    """Proc(A;B), Proc(B;C) -> Proc(A;C): link every B send to its receive."""
    na, nb, nc = len(a), len(b), len(c)
    pairing = {}
    for i in range(na):
        pairing[(OUT, i)] = (0, i)
    for j in range(nb):
        pairing[(0, na + j)] = (1, nb - 1 - j)
    for k in range(nc):
        pairing[(1, nb + k)] = (OUT, na + k)
    return PolarShuffle((_proc_events(a, b), _proc_events(b, c)), _proc_events(a, c), pairing)


def tensor_shuffle(a, b, c, d) -> PolarShuffle:
    """Proc(A;B), Proc(C;D) -> Proc(A⊗C; B⊗D), all pass-through."""
    na, nb, nc, nd = len(a), len(b), len(c), len(d)
    pairing = {}
    for i in range(nc):
        pairing[(OUT, i)] = (1, i)
    for i in range(na):
        pairing[(OUT, nc + i)] = (0, i)
    for j in range(nb):
        pairing[(0, na + j)] = (OUT, nc + na + j)
    for j in range(nd):
        pairing[(1, nc + j)] = (OUT, nc + na + nb + j)
    return PolarShuffle((_proc_events(a, b), _proc_events(c, d)),
                        _proc_events(tuple(a) + tuple(c), tuple(b) + tuple(d)), pairing)


def wiring_shuffle(types, perm) -> PolarShuffle:
    """Nullary shuffle for Proc(types; permuted types) made of spawned channels.

    Output send j carries the value received for input perm[j].
    """
    types = tuple(types)
    n = len(types)
    out_types = tuple(types[i] for i in perm)
    pairing = {}
    for j, i in enumerate(perm):
        pairing[(OUT, n - 1 - i)] = (OUT, n + j)
    return PolarShuffle((), _proc_events(types, out_types), pairing)


def proc_compose(f: Session, g: Session) -> Session:
    a, b = proc_type(f)
    b2, c = proc_type(g)
    if b != b2:
        raise ValidationError(f"cannot compose processes: {list(b)} against {list(b2)}")
    return glue([f, g], composition_shuffle(a, b, c))


def proc_tensor(f: Session, g: Session) -> Session:
    a, b = proc_type(f)
    c, d = proc_type(g)
    return glue([f, g], tensor_shuffle(a, b, c, d))


def proc_id(runtime: Polygraph, types) -> Session:
    types = tuple(types)
    return glue([], wiring_shuffle(types, list(range(len(types)))), polygraph=runtime)


def proc_symmetry(runtime: Polygraph, left, right) -> Session:
    left, right = tuple(left), tuple(right)
    n = len(left)
    perm = list(range(n, n + len(right))) + list(range(n))
    return glue([], wiring_shuffle(left + right, perm), polygraph=runtime)


def out_proc(s: Session) -> Diagram:
    """The pure diagram A -> B of a process-shaped session."""
    a, b = proc_type(s)
    d = s.diagram
    base = pure_restriction(d.polygraph)
    recvs = [d.nodes[k].outs[1] for k in s.effects[:len(a)]][::-1]
    sends = [d.nodes[k].ins[1] for k in s.effects[len(a):]]
    eff = set(s.effects)
    nodes = [n for k, n in enumerate(d.nodes) if k not in eff]
    used = set(recvs) | set(sends)
    for n in nodes:
        used.update(n.ins)
        used.update(n.outs)
    order = sorted(used)
    pos = {w: i for i, w in enumerate(order)}
    return Diagram.make(base, [d.wire_types[w] for w in order],
                        [Node(n.gen, tuple(pos[w] for w in n.ins), tuple(pos[w] for w in n.outs))
                         for n in nodes],
                        [pos[w] for w in recvs], [pos[w] for w in sends])


def effect_free_part(s: Session) -> Diagram:
    """The diagram with R removed, for sessions without effects."""
    d = s.diagram
    r_in, r_out = d.inputs[0], d.outputs[0]
    if s.effects or r_in != r_out:
        raise ValidationError("session has effects")
    keep = [w for w in range(len(d.wire_types)) if w != r_in]
    pos = {w: i for i, w in enumerate(keep)}
    return Diagram.make(pure_restriction(d.polygraph), [d.wire_types[w] for w in keep],
                        [Node(n.gen, tuple(pos[w] for w in n.ins), tuple(pos[w] for w in n.outs))
                         for n in d.nodes],
                        [pos[w] for w in d.inputs[1:]], [pos[w] for w in d.outputs[1:]])


# -------------------------------------------------------- programs

def parse_session_program(text: str, base: Polygraph) -> Session:
    """Elaborate a session program: do-notation plus `?T -> v` and `!v`.

    Effectful generators of the base (or the sends and receives) are
    threaded on R in statement order; pure statements float freely.
    """
    sig = session_polygraph(base) if base.is_pure else base
    runtime = runtime_extend(sig)
    send_recv = {}
    for x in sig.objects:
        if sig.has_generator(SEND_PREFIX + x) and sig.has_generator(RECV_PREFIX + x):
            send_recv[x] = (SEND_PREFIX + x, RECV_PREFIX + x)
    typed = check_program(parse_program(text, effects=True), sig, send_recv)
    b = DiagramBuilder(runtime)
    r = b.add_input(RUNTIME)
    wire = {}
    for v in typed.params:
        wire[v] = b.add_input(typed.var_types[v])
    for st in typed.statements:
        args = [wire[v] for v in st.args]
        if sig.generator(st.generator).effectful:
            r, *outs = b.apply(st.generator, [r] + args)
        else:
            outs = b.apply(st.generator, args)
        for v, w in zip(st.binders, outs):
            wire[v] = w
    return Session.of(b.build([r] + [wire[v] for v in typed.returns]))


def program_name(text: str) -> str:
    return parse_program(text, effects=True).name
