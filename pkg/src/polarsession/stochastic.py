"""Finite subdistribution channels and diagram evaluation.

A channel f(y|x) between products of finite sets is stored as one dense
float64 tensor whose axes are the input wires followed by the output wires.
Every input tuple carries total mass at most one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagram import Diagram, symmetry
from .errors import SizeGuardError, TypeMismatchError, ValidationError
from .signature import Polygraph, loads_json

TOL = 1e-9
FRONTIER_LIMIT = 2 ** 24


@dataclass(frozen=True, eq=False)
class Channel:
    dom_shape: tuple[int, ...]
    cod_shape: tuple[int, ...]
    tensor: np.ndarray

    def __post_init__(self):
        dom, cod = tuple(int(n) for n in self.dom_shape), tuple(int(n) for n in self.cod_shape)
        object.__setattr__(self, "dom_shape", dom)
        object.__setattr__(self, "cod_shape", cod)
        arr = np.asarray(self.tensor, dtype=np.float64)
        if arr.size != math.prod(dom) * math.prod(cod):
            raise TypeMismatchError(f"table of {arr.size} entries does not fit shape {dom} -> {cod}")
        arr = arr.reshape(dom + cod)
        arr.setflags(write=False)
        object.__setattr__(self, "tensor", arr)
        m = self.matrix
        if m.size and m.min() < -TOL:
            raise ValidationError("channel has negative entries")
        if m.size and m.sum(axis=1).max() > 1 + TOL:
            raise ValidationError(f"channel is not subnormalized: row mass {m.sum(axis=1).max():.12g}")

    @property
    def matrix(self) -> np.ndarray:
        return self.tensor.reshape(math.prod(self.dom_shape), math.prod(self.cod_shape))

    def __repr__(self):
        return f"Channel({list(self.dom_shape)} -> {list(self.cod_shape)})"


def from_matrix(dom_shape, cod_shape, table) -> Channel:
    return Channel(tuple(dom_shape), tuple(cod_shape), np.asarray(table, dtype=np.float64))


def from_function(dom_shape, cod_shape, fn) -> Channel:
    """0/1 channel of a function from input tuples to output tuples."""
    dom_shape, cod_shape = tuple(dom_shape), tuple(cod_shape)
    arr = np.zeros(dom_shape + cod_shape)
    for x in np.ndindex(*dom_shape):
        y = fn(*x)
        if not isinstance(y, tuple):
            y = (y,)
        arr[x + tuple(y)] = 1.0
    return Channel(dom_shape, cod_shape, arr)


def identity(shape) -> Channel:
    shape = tuple(shape)
    n = math.prod(shape)
    return Channel(shape, shape, np.eye(n))


def kleisli_compose(f: Channel, g: Channel) -> Channel:
    """(f ; g)(z|x) = sum_y f(y|x) g(z|y)."""
    if f.cod_shape != g.dom_shape:
        raise TypeMismatchError(f"cannot compose {f} with {g}")
    return Channel(f.dom_shape, g.cod_shape, f.matrix @ g.matrix)


def tensor(f: Channel, g: Channel) -> Channel:
    """(f ⊗ g)(y, y'|x, x') = f(y|x) g(y'|x')."""
    a = np.einsum("ij,kl->ikjl", f.matrix, g.matrix)
    return Channel(f.dom_shape + g.dom_shape, f.cod_shape + g.cod_shape, a)


def copy(n: int) -> Channel:
    return from_function((n,), (n, n), lambda x: (x, x))


def discard(n: int) -> Channel:
    return Channel((n,), (), np.ones(n))


def compare(n: int) -> Channel:
    arr = np.zeros((n, n, n))
    for x in range(n):
        arr[x, x, x] = 1.0
    return Channel((n, n), (n,), arr)


def uniform(n: int) -> Channel:
    return Channel((), (n,), np.full(n, 1.0 / n))


def dirac(n: int, x: int) -> Channel:
    if not 0 <= x < n:
        raise ValidationError(f"dirac point {x} out of range for size {n}")
    arr = np.zeros(n)
    arr[x] = 1.0
    return Channel((), (n,), arr)


def swap(a: int, b: int) -> Channel:
    return from_function((a, b), (b, a), lambda x, y: (y, x))


def zero(dom_shape, cod_shape) -> Channel:
    return Channel(tuple(dom_shape), tuple(cod_shape), np.zeros(math.prod(dom_shape) * math.prod(cod_shape)))


def scale(f: Channel, c: float) -> Channel:
    return Channel(f.dom_shape, f.cod_shape, f.tensor * c)


def permute_outputs(f: Channel, perm) -> Channel:
    """Output wire i of the result is output wire perm[i] of f."""
    nd = len(f.dom_shape)
    axes = list(range(nd)) + [nd + p for p in perm]
    return Channel(f.dom_shape, tuple(f.cod_shape[p] for p in perm), np.transpose(f.tensor, axes))


def _flat(f: Channel):
    return f.matrix, math.prod(f.dom_shape), math.prod(f.cod_shape)


def is_total(f: Channel, eps: float = TOL) -> bool:
    """f ; discard = discard."""
    m, _, _ = _flat(f)
    return bool(np.all(np.abs(m.sum(axis=1) - 1.0) <= eps))


def is_deterministic(f: Channel, eps: float = TOL) -> bool:
    """f ; copy = copy ; (f ⊗ f)."""
    m, _, ny = _flat(f)
    lhs = np.einsum("xy,yz->xyz", m, np.eye(ny))
    rhs = np.einsum("xy,xz->xyz", m, m)
    return bool(np.all(np.abs(lhs - rhs) <= eps))


def is_quasitotal(f: Channel, eps: float = TOL) -> bool:
    """f = copy ; ((f ; discard) ⊗ f)."""
    m, _, _ = _flat(f)
    rhs = m.sum(axis=1)[:, None] * m
    return bool(np.all(np.abs(m - rhs) <= eps))


def bayes_invert(g: Channel, f: Channel) -> Channel:
    """g†(x|y) = g(y|x) f(x) / sum_x' g(y|x') f(x'); zero-mass columns give zero."""
    if f.dom_shape != () or f.cod_shape != g.dom_shape:
        raise TypeMismatchError(f"prior {f} does not match channel {g}")
    joint = f.matrix.reshape(-1)[:, None] * g.matrix  # (x, y)
    denom = joint.sum(axis=0)
    safe = np.where(denom > 0, denom, 1.0)
    inv = np.where(denom[:, None] > 0, joint.T / safe[:, None], 0.0)  # (y, x)
    return Channel(g.cod_shape, g.dom_shape, inv)


def channel_equal(f: Channel, g: Channel, eps: float = TOL) -> bool:
    _same_shape(f, g)
    return max_deviation(f, g) <= eps


def max_deviation(f: Channel, g: Channel) -> float:
    _same_shape(f, g)
    return float(np.max(np.abs(f.tensor - g.tensor))) if f.tensor.size else 0.0


def channel_equal_up_to_scalar(f: Channel, g: Channel, eps: float = TOL) -> bool:
    """Some λ > 0 has |f - λg| <= eps; λ comes from g's largest entry."""
    _same_shape(f, g)
    a, b = f.tensor.reshape(-1), g.tensor.reshape(-1)
    if a.size == 0:
        return True
    a_zero, b_zero = np.max(np.abs(a)) <= eps, np.max(np.abs(b)) <= eps
    if a_zero or b_zero:
        return bool(a_zero and b_zero)
    k = int(np.argmax(np.abs(b)))
    lam = a[k] / b[k]
    if lam <= 0:
        return False
    return bool(np.max(np.abs(a - lam * b)) <= eps)


def _same_shape(f: Channel, g: Channel) -> None:
    if (f.dom_shape, f.cod_shape) != (g.dom_shape, g.cod_shape):
        raise TypeMismatchError(f"shape mismatch: {f} against {g}")


# ------------------------------------------------------- interpretation

@dataclass(frozen=True)
class Interpretation:
    polygraph: Polygraph
    type_sizes: dict
    gen_channels: dict

    def __post_init__(self):
        for t, n in self.type_sizes.items():
            if not isinstance(n, int) or n <= 0:
                raise ValidationError(f"type {t!r} needs a positive integer size")
        for name, ch in self.gen_channels.items():
            gen = self.polygraph.generator(name)
            want = (self.shape(gen.inputs), self.shape(gen.outputs))
            if (ch.dom_shape, ch.cod_shape) != want:
                raise TypeMismatchError(
                    f"generator {name!r}: channel {list(ch.dom_shape)} -> {list(ch.cod_shape)}, "
                    f"signature needs {list(want[0])} -> {list(want[1])}")

    def size(self, t: str) -> int:
        try:
            return self.type_sizes[t]
        except KeyError:
            raise ValidationError(f"no size given for type {t!r}") from None

    def shape(self, types) -> tuple[int, ...]:
        return tuple(self.size(t) for t in types)

    def channel(self, name: str) -> Channel:
        try:
            return self.gen_channels[name]
        except KeyError:
            raise ValidationError(f"generator {name!r} has no interpretation") from None

    def with_channels(self, polygraph: Polygraph | None = None, sizes=None, **channels) -> "Interpretation":
        merged = dict(self.gen_channels)
        merged.update(channels)
        all_sizes = dict(self.type_sizes)
        all_sizes.update(sizes or {})
        return Interpretation(polygraph or self.polygraph, all_sizes, merged)


def interpretation_from_dict(data: dict, polygraph: Polygraph) -> Interpretation:
    """Entries are either {"table": rows} (row-major, mixed radix) or
    {"map": outputs} for deterministic generators, where outputs[i] is the
    output tuple (or single value) for the i-th input tuple."""
    if not isinstance(data, dict) or "sizes" not in data:
        raise ValidationError("interpretation needs a 'sizes' object")
    sizes = dict(data["sizes"])
    channels = {}
    for name, entry in data.get("generators", {}).items():
        gen = polygraph.generator(name)
        dom = tuple(_size(sizes, t) for t in gen.inputs)
        cod = tuple(_size(sizes, t) for t in gen.outputs)
        if "table" in entry:
            table = np.asarray(entry["table"], dtype=np.float64)
            if table.shape != (math.prod(dom), math.prod(cod)):
                raise TypeMismatchError(
                    f"generator {name!r}: table has shape {table.shape}, expected "
                    f"{(math.prod(dom), math.prod(cod))}")
            channels[name] = Channel(dom, cod, table)
        elif "map" in entry:
            outs = entry["map"]
            if len(outs) != math.prod(dom):
                raise TypeMismatchError(f"generator {name!r}: map needs {math.prod(dom)} entries")
            arr = np.zeros((math.prod(dom),) + cod)
            for i, y in enumerate(outs):
                y = tuple(y) if isinstance(y, list) else (y,)
                if len(y) != len(cod):
                    raise TypeMismatchError(f"generator {name!r}: map entry {i} has wrong arity")
                arr[(i,) + y] = 1.0
            channels[name] = Channel(dom, cod, arr)
        else:
            raise ValidationError(f"generator {name!r} needs a 'table' or a 'map'")
    return Interpretation(polygraph, sizes, channels)


def _size(sizes, t):
    if t not in sizes:
        raise ValidationError(f"no size given for type {t!r}")
    return sizes[t]


def load_interpretation(path, polygraph: Polygraph) -> Interpretation:
    return interpretation_from_dict(loads_json(Path(path).read_text(encoding="utf-8")), polygraph)


# ------------------------------------------------------------ evaluate

def evaluate(d: Diagram, interp: Interpretation, limit: int = FRONTIER_LIMIT) -> Channel:
    """Contract the node channels in topological order.

    The frontier is one dense tensor indexed by the input boundary and the
    currently open wires. Nodes are stored in topological order already.
    """
    sizes = [interp.size(t) for t in d.wire_types]
    n_in = len(d.inputs)
    # labels 0..n_in-1 name the input boundary; label n_in + w names wire w
    labels = list(range(n_in)) + [n_in + w for w in d.inputs]
    shape = [sizes[w] for w in d.inputs] * 2
    _guard(shape, limit)
    state = np.eye(math.prod(shape[:n_in])).reshape(shape) if n_in else np.ones(())
    for node in d.nodes:
        ch = interp.channel(node.gen)
        node_labels = [n_in + w for w in node.ins] + [n_in + w for w in node.outs]
        consumed = set(n_in + w for w in node.ins)
        out_labels = [l for l in labels if l not in consumed] + [n_in + w for w in node.outs]
        out_shape = [state.shape[labels.index(l)] if l in labels else sizes[l - n_in] for l in out_labels]
        _guard(out_shape, limit)
        state = _einsum(state, labels, ch.tensor, node_labels, out_labels)
        labels = out_labels
    final = list(range(n_in)) + [n_in + w for w in d.outputs]
    state = _einsum(state, labels, final) if labels else state
    return Channel(tuple(sizes[w] for w in d.inputs), tuple(sizes[w] for w in d.outputs), state)


def _einsum(*args):
    """einsum in sublist form, relabelling to the small integers numpy accepts."""
    small: dict[int, int] = {}

    def relabel(ls):
        return [small.setdefault(l, len(small)) for l in ls]

    ops = []
    for i in range(0, len(args) - 1, 2):
        ops += [args[i], relabel(args[i + 1])]
    return np.einsum(*ops, relabel(args[-1]))


def _guard(shape, limit):
    if math.prod(shape) > limit:
        raise SizeGuardError(f"frontier of {math.prod(shape)} entries exceeds the limit of {limit}")


def swap_channel(interp: Interpretation, left, right) -> Channel:
    """Channel of the boundary symmetry, via the diagram evaluator."""
    return evaluate(symmetry(interp.polygraph, left, right), interp)
