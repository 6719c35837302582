import random
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from polarsession import diagram as dg
from polarsession.diagram import Diagram, Node
from polarsession.donotation import elaborate_text
from polarsession.errors import CycleError, TypeMismatchError, ValidationError
from polarsession.samples import TOY, random_diagram
from polarsession.signature import Generator, Polygraph

P = Polygraph(("A", "B", "C", "D", "X", "Y", "Z"), (
    Generator("f", ("A",), ("B",)),
    Generator("g", ("C",), ("D",)),
    Generator("h", ("B",), ("A",)),
    Generator("e", ("X",), ("X",)),
    Generator("integral", (), ("X",)),
    Generator("f2", ("A",), ("B",)),
))


def test_from_generator_crack(mascarpone):
    d = dg.from_generator(mascarpone, "crack")
    assert len(d.nodes) == 1 and len(d.wire_types) == 4
    assert d.dom == ("egg",) and d.cod == ("white", "shell", "yolk")


def test_from_generator_nullary_and_endo():
    d = dg.from_generator(P, "integral")
    assert d.dom == () and d.cod == ("X",)
    e = dg.from_generator(P, "e")
    assert len(e.nodes) == 1 and len(e.wire_types) == 2


@pytest.mark.parametrize("types", [[], ["X"], ["X", "Y", "Z"]])
def test_identity(types):
    d = dg.identity(P, types)
    assert d.nodes == () and d.dom == tuple(types) == d.cod
    assert len(d.wire_types) == len(types)


def test_symmetry_boundaries_and_involution():
    s = dg.symmetry(P, ["X"], ["Y"])
    assert s.cod == ("Y", "X")
    back = dg.compose(s, dg.symmetry(P, ["Y"], ["X"]))
    assert dg.is_equal(back, dg.identity(P, ["X", "Y"]))
    assert dg.is_equal(dg.symmetry(P, [], ["X", "Y"]), dg.identity(P, ["X", "Y"]))


def test_composition_units():
    f = dg.from_generator(P, "f")
    assert dg.is_equal(dg.compose(dg.identity(P, ["A"]), f), f)
    assert dg.is_equal(dg.compose(f, dg.identity(P, ["B"])), f)


def test_tensor_units():
    f = dg.from_generator(P, "f")
    assert dg.is_equal(dg.tensor(f, dg.identity(P, [])), f)
    assert dg.is_equal(dg.tensor(dg.identity(P, ["X"]), dg.identity(P, ["Y"])), dg.identity(P, ["X", "Y"]))


def test_interchange():
    f, g = dg.from_generator(P, "f"), dg.from_generator(P, "g")
    left = dg.compose(dg.tensor(f, dg.identity(P, ["C"])), dg.tensor(dg.identity(P, ["B"]), g))
    right = dg.compose(dg.tensor(dg.identity(P, ["A"]), g), dg.tensor(f, dg.identity(P, ["D"])))
    assert len(left.nodes) == 2
    assert dg.is_equal(left, right)


def test_compose_type_mismatch():
    with pytest.raises(TypeMismatchError):
        dg.compose(dg.from_generator(P, "f"), dg.from_generator(P, "g"))


def test_topological_order():
    assert dg.topological_order(dg.identity(P, ["X"])) == []
    d = dg.compose(dg.from_generator(P, "f"), dg.from_generator(P, "h"))
    assert [n.gen for n in dg.topological_order(d)] == ["f", "h"]


def test_recipe_order(mascarpone, recipe_text):
    d = elaborate_text(recipe_text, mascarpone)
    order = [n.gen for n in dg.topological_order(d)]
    pos = {}
    for i, g in enumerate(order):
        pos.setdefault(g, []).append(i)
    assert max(pos["crack"]) < min(pos["whisk"] + pos["beat"])
    assert pos["beat"][0] < pos["stir"][0] < pos["fold"][0]


def test_inequality():
    assert not dg.is_equal(dg.from_generator(P, "f"), dg.from_generator(P, "f2"))
    assert not dg.is_equal(dg.identity(P, ["X"]), dg.identity(P, ["X", "X"]))


def test_self_equal_and_hash(mascarpone, recipe_text):
    d = elaborate_text(recipe_text, mascarpone)
    assert dg.is_equal(d, d)
    assert dg.canonical_hash(dg.identity(P, ["X"])) != dg.canonical_hash(dg.identity(P, ["X", "X"]))


def test_hash_is_stable_across_processes():
    code = ("from polarsession.demos import data_polygraph as p; from polarsession import diagram as dg;"
            "print(dg.canonical_hash(dg.identity(p('xor.json'), ['X'])))")
    out = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                          env={"PYTHONHASHSEED": seed}).stdout.strip() for seed in ("1", "2")}
    assert len(out) == 1 and out.pop().isdigit()


def test_invalid_raw_diagrams():
    with pytest.raises(ValidationError, match="producers"):
        Diagram.make(P, ["A"], [], [0], [])
    with pytest.raises(TypeMismatchError):
        Diagram.make(P, ["A", "A"], [Node("f", (0,), (1,))], [0], [1])
    with pytest.raises(CycleError) as info:
        Diagram.make(P, ["A", "B"], [Node("f", (0,), (1,)), Node("h", (1,), (0,))], [], [])
    assert info.value.witness


def test_serialization_roundtrip(tmp_path, mascarpone, recipe_text):
    d = elaborate_text(recipe_text, mascarpone)
    path = tmp_path / "d.json"
    dg.save_diagram(d, path)
    back = dg.load_diagram(path, mascarpone)
    assert dg.is_equal(d, back)
    assert dg.diagram_to_dict(back) == dg.diagram_to_dict(d)


def test_dot_export(mascarpone, recipe_text):
    dot = dg.to_dot(elaborate_text(recipe_text, mascarpone), "recipe")
    assert dot.startswith("digraph") and dot.count("crack") >= 2


def _scramble(d: Diagram, rng: random.Random) -> Diagram:
    """Same hypergraph with wires renamed and nodes listed in another order."""
    perm = list(range(len(d.wire_types)))
    rng.shuffle(perm)
    types = [None] * len(perm)
    for old, new in enumerate(perm):
        types[new] = d.wire_types[old]
    nodes = [Node(n.gen, tuple(perm[w] for w in n.ins), tuple(perm[w] for w in n.outs)) for n in d.nodes]
    rng.shuffle(nodes)
    return Diagram.make(d.polygraph, types, nodes, [perm[w] for w in d.inputs], [perm[w] for w in d.outputs])


@settings(max_examples=60, deadline=None)
@given(hst.integers(0, 2 ** 32 - 1), hst.integers(0, 8))
def test_isomorphism_invariance(seed, n):
    rng = random.Random(seed)
    d = random_diagram(rng, n)
    e = _scramble(d, rng)
    assert dg.is_equal(d, e)
    assert dg.canonical_hash(d) == dg.canonical_hash(e)


@settings(max_examples=60, deadline=None)
@given(hst.integers(0, 2 ** 32 - 1))
def test_compose_associative(seed):
    rng = random.Random(seed)
    f = random_diagram(rng, rng.randint(0, 4))
    g = random_diagram(rng, rng.randint(0, 4), dom=list(f.cod))
    h = random_diagram(rng, rng.randint(0, 4), dom=list(g.cod))
    assert dg.is_equal(dg.compose(dg.compose(f, g), h), dg.compose(f, dg.compose(g, h)))


def test_distinguishes_closed_components():
    # two closed loops that differ only in how components are wired
    a = elaborate_text("p():\n  kX() -> x\n  f(x) -> y\n  dY(y)\n  kX() -> z\n  dX(z)\n  return()\n", TOY)
    b = elaborate_text("p():\n  kX() -> x\n  dX(x)\n  kX() -> z\n  f(z) -> y\n  dY(y)\n  return()\n", TOY)
    c = elaborate_text("p():\n  kX() -> x\n  f(x) -> y\n  dY(y)\n  kX() -> z\n  f(z) -> w\n  dY(w)\n  return()\n", TOY)
    assert dg.is_equal(a, b)
    assert not dg.is_equal(a, c)
