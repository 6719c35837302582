"""Symmetric string diagrams as acyclic labelled hypergraphs.

Wires are vertices, generator occurrences are hyperedges, and the two
boundaries are ordered wire lists. Symmetries are not nodes: a swap is only
a reordering of boundary wires, so isomorphism of hypergraphs is exactly the
symmetric monoidal quotient.
"""

from __future__ import annotations

import hashlib
import heapq
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .errors import CycleError, TypeMismatchError, ValidationError
from .signature import Polygraph, loads_json


@dataclass(frozen=True)
class Node:
    gen: str
    ins: tuple[int, ...]
    outs: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Diagram:
    """Immutable diagram. Build through `make` (or the helpers) to validate."""

    polygraph: Polygraph
    wire_types: tuple[str, ...]
    nodes: tuple[Node, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]

    @classmethod
    def make(cls, polygraph: Polygraph, wire_types, nodes, inputs, outputs) -> "Diagram":
        """Validate raw data and renumber wires by order of production."""
        wire_types = list(wire_types)
        nodes = [Node(n.gen, tuple(n.ins), tuple(n.outs)) for n in nodes]
        inputs, outputs = tuple(inputs), tuple(outputs)
        _validate(polygraph, wire_types, nodes, inputs, outputs)
        order = _kahn(len(wire_types), nodes, inputs)
        renum: dict[int, int] = {}
        for w in inputs:
            renum[w] = len(renum)
        for i in order:
            for w in nodes[i].outs:
                renum[w] = len(renum)
        new_types = [None] * len(renum)
        for old, new in renum.items():
            new_types[new] = wire_types[old]
        new_nodes = tuple(
            Node(nodes[i].gen, tuple(renum[w] for w in nodes[i].ins),
                 tuple(renum[w] for w in nodes[i].outs))
            for i in order
        )
        return cls(polygraph, tuple(new_types), new_nodes,
                   tuple(renum[w] for w in inputs), tuple(renum[w] for w in outputs))

    @property
    def dom(self) -> tuple[str, ...]:
        return tuple(self.wire_types[w] for w in self.inputs)

    @property
    def cod(self) -> tuple[str, ...]:
        return tuple(self.wire_types[w] for w in self.outputs)

    def producers(self) -> dict[int, tuple]:
        """Wire -> ('in', position) or (node index, port)."""
        prod = {w: ("in", i) for i, w in enumerate(self.inputs)}
        for k, n in enumerate(self.nodes):
            for p, w in enumerate(n.outs):
                prod[w] = (k, p)
        return prod

    def consumers(self) -> dict[int, tuple]:
        """Wire -> ('out', position) or (node index, port)."""
        cons = {w: ("out", i) for i, w in enumerate(self.outputs)}
        for k, n in enumerate(self.nodes):
            for p, w in enumerate(n.ins):
                cons[w] = (k, p)
        return cons

    def __repr__(self):
        return (f"Diagram({len(self.nodes)} nodes, {len(self.wire_types)} wires, "
                f"{list(self.dom)} -> {list(self.cod)})")


def _validate(polygraph, wire_types, nodes, inputs, outputs) -> None:
    nw = len(wire_types)
    produced = [0] * nw
    consumed = [0] * nw
    for t in wire_types:
        if not polygraph.has_object(t):
            raise ValidationError(f"undeclared wire type {t!r}")

    def mark(counts, w, where):
        if not isinstance(w, int) or not 0 <= w < nw:
            raise ValidationError(f"{where}: unknown wire {w!r}")
        counts[w] += 1

    for w in inputs:
        mark(produced, w, "input boundary")
    for w in outputs:
        mark(consumed, w, "output boundary")
    for k, n in enumerate(nodes):
        gen = polygraph.generator(n.gen)
        if len(n.ins) != len(gen.inputs) or len(n.outs) != len(gen.outputs):
            raise TypeMismatchError(f"node {k} ({n.gen}): arity does not match the generator")
        for p, w in enumerate(n.ins):
            mark(consumed, w, f"node {k} ({n.gen})")
            if wire_types[w] != gen.inputs[p]:
                raise TypeMismatchError(
                    f"node {k} ({n.gen}) input {p}: expected {gen.inputs[p]}, got {wire_types[w]}")
        for p, w in enumerate(n.outs):
            mark(produced, w, f"node {k} ({n.gen})")
            if wire_types[w] != gen.outputs[p]:
                raise TypeMismatchError(
                    f"node {k} ({n.gen}) output {p}: expected {gen.outputs[p]}, got {wire_types[w]}")
    for w in range(nw):
        if produced[w] != 1 or consumed[w] != 1:
            raise ValidationError(
                f"wire {w} has {produced[w]} producers and {consumed[w]} consumers (expected 1 and 1)")


def _kahn(nw: int, nodes, inputs, priority=None) -> list[int]:
    """Topological order of node indices; raises CycleError with a witness."""
    producer = [-1] * nw
    for k, n in enumerate(nodes):
        for w in n.outs:
            producer[w] = k
    indeg = [0] * len(nodes)
    succ: list[list[int]] = [[] for _ in nodes]
    for k, n in enumerate(nodes):
        for w in n.ins:
            p = producer[w]
            if p >= 0:
                indeg[k] += 1
                succ[p].append(k)
    key = priority or (lambda k: k)
    ready = [(key(k), k) for k in range(len(nodes)) if indeg[k] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, k = heapq.heappop(ready)
        order.append(k)
        for s in succ[k]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(ready, (key(s), s))
    if len(order) < len(nodes):
        left = {k for k in range(len(nodes)) if indeg[k] > 0}
        # walk backwards through producers that are still blocked
        k = next(iter(left))
        seen: dict[int, int] = {}
        path = []
        while k not in seen:
            seen[k] = len(path)
            path.append(k)
            k = next(producer[w] for w in nodes[k].ins if producer[w] in left)
        cycle = path[seen[k]:][::-1]
        raise CycleError("diagram contains a cycle",
                         [f"{nodes[i].gen}#{i}" for i in cycle])
    return order


# ---------------------------------------------------------------- builders

class DiagramBuilder:
    """Incremental construction: add inputs, apply generators, then build."""

    def __init__(self, polygraph: Polygraph):
        self.polygraph = polygraph
        self.wire_types: list[str] = []
        self.nodes: list[Node] = []
        self.inputs: list[int] = []

    def new_wire(self, t: str) -> int:
        self.wire_types.append(t)
        return len(self.wire_types) - 1

    def add_input(self, t: str) -> int:
        if not self.polygraph.has_object(t):
            raise ValidationError(f"undeclared object {t!r}")
        w = self.new_wire(t)
        self.inputs.append(w)
        return w

    def apply(self, gen_name: str, wires) -> list[int]:
        gen = self.polygraph.generator(gen_name)
        wires = list(wires)
        if len(wires) != len(gen.inputs):
            raise TypeMismatchError(
                f"{gen_name} expects {len(gen.inputs)} inputs, got {len(wires)}")
        for i, (w, t) in enumerate(zip(wires, gen.inputs)):
            if self.wire_types[w] != t:
                raise TypeMismatchError(
                    f"{gen_name} input {i}: expected {t}, got {self.wire_types[w]}")
        outs = [self.new_wire(t) for t in gen.outputs]
        self.nodes.append(Node(gen_name, tuple(wires), tuple(outs)))
        return outs

    def inline(self, d: Diagram, wires) -> list[int]:
        """Plug the inputs of `d` into `wires` and return its output wires."""
        wires = list(wires)
        if [self.wire_types[w] for w in wires] != list(d.dom):
            raise TypeMismatchError(f"cannot inline {list(d.dom)} into {[self.wire_types[w] for w in wires]}")
        remap = dict(zip(d.inputs, wires))
        for w, t in enumerate(d.wire_types):
            if w not in remap:
                remap[w] = self.new_wire(t)
        for n in d.nodes:
            self.nodes.append(Node(n.gen, tuple(remap[w] for w in n.ins),
                                   tuple(remap[w] for w in n.outs)))
        return [remap[w] for w in d.outputs]

    def build(self, outputs) -> Diagram:
        return Diagram.make(self.polygraph, self.wire_types, self.nodes, self.inputs, outputs)


def from_generator(polygraph: Polygraph, name: str) -> Diagram:
    gen = polygraph.generator(name)
    b = DiagramBuilder(polygraph)
    ins = [b.add_input(t) for t in gen.inputs]
    return b.build(b.apply(name, ins))


def identity(polygraph: Polygraph, types) -> Diagram:
    polygraph.check_types(types)
    ws = list(range(len(types)))
    return Diagram.make(polygraph, list(types), [], ws, ws)


def symmetry(polygraph: Polygraph, left, right) -> Diagram:
    left, right = list(left), list(right)
    polygraph.check_types(left + right)
    n = len(left)
    ws = list(range(n + len(right)))
    return Diagram.make(polygraph, left + right, [], ws, ws[n:] + ws[:n])


def permutation(polygraph: Polygraph, types, perm) -> Diagram:
    """Output position i carries input wire perm[i]."""
    types = list(types)
    polygraph.check_types(types)
    if sorted(perm) != list(range(len(types))):
        raise ValidationError(f"{perm} is not a permutation of {len(types)} wires")
    return Diagram.make(polygraph, types, [], range(len(types)), list(perm))


def _same_polygraph(d1: Diagram, d2: Diagram) -> None:
    if d1.polygraph is not d2.polygraph and d1.polygraph != d2.polygraph:
        raise ValidationError("diagrams live over different polygraphs")


def compose(d1: Diagram, d2: Diagram) -> Diagram:
    """Sequential composition, d1 then d2."""
    _same_polygraph(d1, d2)
    if len(d1.outputs) != len(d2.inputs):
        raise TypeMismatchError(
            f"cannot compose: {len(d1.outputs)} outputs against {len(d2.inputs)} inputs")
    for i, (a, b) in enumerate(zip(d1.cod, d2.dom)):
        if a != b:
            raise TypeMismatchError(f"cannot compose: position {i} has {a} against {b}")
    off = len(d1.wire_types)
    remap = {w: w + off for w in range(len(d2.wire_types))}
    for w1, w2 in zip(d1.outputs, d2.inputs):
        remap[w2] = w1
    types = list(d1.wire_types) + list(d2.wire_types)
    nodes = list(d1.nodes) + [
        Node(n.gen, tuple(remap[w] for w in n.ins), tuple(remap[w] for w in n.outs))
        for n in d2.nodes
    ]
    used = set(range(off)) | set(remap.values())
    return _compact(d1.polygraph, types, nodes, d1.inputs, [remap[w] for w in d2.outputs], used)


def _compact(polygraph, types, nodes, inputs, outputs, used) -> Diagram:
    keep = sorted(used)
    pos = {w: i for i, w in enumerate(keep)}
    return Diagram.make(
        polygraph, [types[w] for w in keep],
        [Node(n.gen, tuple(pos[w] for w in n.ins), tuple(pos[w] for w in n.outs)) for n in nodes],
        [pos[w] for w in inputs], [pos[w] for w in outputs])


def tensor(d1: Diagram, d2: Diagram) -> Diagram:
    _same_polygraph(d1, d2)
    off = len(d1.wire_types)
    nodes = list(d1.nodes) + [
        Node(n.gen, tuple(w + off for w in n.ins), tuple(w + off for w in n.outs))
        for n in d2.nodes
    ]
    return Diagram.make(
        d1.polygraph, list(d1.wire_types) + list(d2.wire_types), nodes,
        list(d1.inputs) + [w + off for w in d2.inputs],
        list(d1.outputs) + [w + off for w in d2.outputs])


# ------------------------------------------------------- canonical form

@dataclass(frozen=True)
class CanonicalForm:
    key: tuple
    wire_order: tuple[int, ...]
    node_order: tuple[int, ...]


def _traverse(d: Diagram, prod, cons, start_wires, start_node, allowed_nodes=None):
    """Breadth-first numbering from ordered starting points.

    Discovering a node numbers its input wires and then its output wires in
    port order, so the numbering depends only on the hypergraph structure and
    the starting points.
    """
    wire_num: dict[int, int] = {}
    node_num: dict[int, int] = {}
    queue: deque[int] = deque()

    def see_wire(w):
        if w not in wire_num:
            wire_num[w] = len(wire_num)
            queue.append(w)

    def see_node(k):
        if k not in node_num and (allowed_nodes is None or k in allowed_nodes):
            node_num[k] = len(node_num)
            for w in d.nodes[k].ins:
                see_wire(w)
            for w in d.nodes[k].outs:
                see_wire(w)

    for w in start_wires:
        see_wire(w)
    if start_node is not None:
        see_node(start_node)
    while queue:
        w = queue.popleft()
        p = prod[w][0]
        if p != "in":
            see_node(p)
        c = cons[w][0]
        if c != "out":
            see_node(c)
    return wire_num, node_num


def _encode(d: Diagram, wire_num, node_num) -> tuple:
    wires = [None] * len(wire_num)
    for w, i in wire_num.items():
        wires[i] = d.wire_types[w]
    nodes = [None] * len(node_num)
    for k, i in node_num.items():
        n = d.nodes[k]
        nodes[i] = (n.gen, tuple(wire_num[w] for w in n.ins), tuple(wire_num[w] for w in n.outs))
    return (tuple(wires), tuple(nodes))


def canonical_form(d: Diagram) -> CanonicalForm:
    """Isomorphism-invariant encoding of a diagram.

    Everything connected to the boundary is numbered by a traversal anchored
    at the ordered boundary. Closed components are numbered from every
    possible root and the smallest encoding is kept; components are then
    sorted. Both steps are exact, so equal keys mean isomorphic diagrams.
    """
    prod, cons = d.producers(), d.consumers()
    wire_num, node_num = _traverse(d, prod, cons, list(d.inputs) + list(d.outputs), None)
    main = _encode(d, wire_num, node_num)
    key_in = tuple(wire_num[w] for w in d.inputs)
    key_out = tuple(wire_num[w] for w in d.outputs)

    rest = [k for k in range(len(d.nodes)) if k not in node_num]
    components = []
    seen = set()
    for k in rest:
        if k in seen:
            continue
        _, comp = _traverse(d, prod, cons, [], k)
        seen.update(comp)
        members = set(comp)
        best = None
        first = min(d.nodes[r].gen for r in members)
        for root in sorted(members):
            if d.nodes[root].gen != first:
                continue
            wn, nn = _traverse(d, prod, cons, [], root, members)
            enc = _encode(d, wn, nn)
            if best is None or enc < best[0]:
                best = (enc, wn, nn)
        components.append(best)
    components.sort(key=lambda c: c[0])

    wire_order = [None] * len(wire_num)
    for w, i in wire_num.items():
        wire_order[i] = w
    node_order = [None] * len(node_num)
    for k, i in node_num.items():
        node_order[i] = k
    for _, wn, nn in components:
        wire_order.extend(sorted(wn, key=wn.get))
        node_order.extend(sorted(nn, key=nn.get))
    key = (main, key_in, key_out, tuple(c[0] for c in components))
    return CanonicalForm(key, tuple(wire_order), tuple(node_order))


def is_equal(d1: Diagram, d2: Diagram) -> bool:
    """Equality up to hypergraph isomorphism fixing the boundaries."""
    _same_polygraph(d1, d2)
    if (len(d1.nodes), len(d1.wire_types), d1.dom, d1.cod) != \
            (len(d2.nodes), len(d2.wire_types), d2.dom, d2.cod):
        return False
    return canonical_form(d1).key == canonical_form(d2).key


def canonical_hash(d: Diagram) -> int:
    """64-bit digest of the canonical form, stable across processes."""
    data = repr(canonical_form(d).key).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def topological_order(d: Diagram) -> list[Node]:
    """Nodes after all their producers; ties go to the lowest canonical index."""
    rank = {k: i for i, k in enumerate(canonical_form(d).node_order)}
    order = _kahn(len(d.wire_types), d.nodes, d.inputs, priority=rank.__getitem__)
    return [d.nodes[k] for k in order]


# ------------------------------------------------------------- formats

def diagram_to_dict(d: Diagram) -> dict:
    return {
        "wires": [{"id": w, "type": t} for w, t in enumerate(d.wire_types)],
        "nodes": [{"gen": n.gen, "in": list(n.ins), "out": list(n.outs)} for n in d.nodes],
        "in": list(d.inputs),
        "out": list(d.outputs),
    }


def diagram_from_dict(data: dict, polygraph: Polygraph) -> Diagram:
    try:
        ids = {}
        types = []
        for entry in data["wires"]:
            if entry["id"] in ids:
                raise ValidationError(f"duplicate wire id {entry['id']!r}")
            ids[entry["id"]] = len(types)
            types.append(entry["type"])

        def wire(x):
            if x not in ids:
                raise ValidationError(f"unknown wire id {x!r}")
            return ids[x]

        nodes = [Node(n["gen"], tuple(wire(x) for x in n["in"]), tuple(wire(x) for x in n["out"]))
                 for n in data["nodes"]]
        return Diagram.make(polygraph, types, nodes, [wire(x) for x in data["in"]],
                            [wire(x) for x in data["out"]])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed diagram document: {exc}") from None


def dumps_diagram(d: Diagram) -> str:
    return json.dumps(diagram_to_dict(d), indent=2) + "\n"


def load_diagram(path, polygraph: Polygraph) -> Diagram:
    return diagram_from_dict(loads_json(Path(path).read_text(encoding="utf-8")), polygraph)


def save_diagram(d: Diagram, path) -> None:
    Path(path).write_text(dumps_diagram(d), encoding="utf-8")


def to_dot(d: Diagram, name: str = "diagram") -> str:
    """Graphviz export: generator nodes as boxes, wires as labelled edges."""
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    for i in range(len(d.inputs)):
        lines.append(f'  in{i} [shape=point, xlabel="in {i}"];')
    for i in range(len(d.outputs)):
        lines.append(f'  out{i} [shape=point, xlabel="out {i}"];')
    for k, n in enumerate(d.nodes):
        lines.append(f'  n{k} [shape=box, label="{n.gen}"];')
    prod, cons = d.producers(), d.consumers()

    def end(ref, side):
        a, b = ref
        if a in ("in", "out"):
            return f"{a}{b}"
        return f"n{a}"

    for w, t in enumerate(d.wire_types):
        lines.append(f'  {end(prod[w], "p")} -> {end(cons[w], "c")} [label="{t}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
