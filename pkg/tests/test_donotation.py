import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from conftest import fixture_text
from polarsession import diagram as dg
from polarsession.demos import data_polygraph
from polarsession.donotation import check, elaborate, elaborate_text, parse, pretty
from polarsession.errors import LinearityError, ParseError, TypeMismatchError, ValidationError
from polarsession.samples import TOY, random_program, swap_independent


def test_parse_recipe_raw():
    prog = parse(fixture_text("recipe_raw.do"))
    assert prog.name == "cremaDiMascarpone"
    assert len(prog.params) == 4 and len(prog.statements) == 6 and prog.returns == ("crema",)


def test_recipe_raw_fails_on_typo(mascarpone):
    with pytest.raises(LinearityError, match="thickPaste"):
        check(parse(fixture_text("recipe_raw.do")), mascarpone)


def test_recipe_elaborates(mascarpone, recipe_text):
    d = elaborate(check(parse(recipe_text), mascarpone))
    assert len(d.nodes) == 6
    assert d.dom == ("egg", "egg", "sugar", "mascarpone")
    assert d.cod == ("crema", "shell", "shell")


def test_recipe_swap_is_equal(mascarpone, recipe_text):
    lines = recipe_text.splitlines()
    i = next(k for k, l in enumerate(lines) if l.strip().startswith("whisk"))
    lines[i], lines[i + 1] = lines[i + 1], lines[i]
    assert dg.is_equal(elaborate_text(recipe_text, mascarpone), elaborate_text("\n".join(lines), mascarpone))


def test_exchange_raw():
    prog = parse(fixture_text("exchange_raw.do"))
    assert len(prog.params) == 2 and len(prog.statements) == 3 and prog.returns == ("x", "y")
    d = elaborate(check(prog, data_polygraph("xor.json")))
    assert len(d.nodes) == 3 and d.dom == ("X", "X") == d.cod


def test_empty_program():
    prog = parse("f(): return()")
    assert prog.params == () and prog.statements == () and prog.returns == ()
    d = elaborate(check(prog, TOY))
    assert d.nodes == () and d.dom == ()


def test_permuted_return_is_symmetry():
    d = elaborate_text("p(a: X, b: Y):\n  return(b, a)\n", TOY)
    assert dg.is_equal(d, dg.symmetry(TOY, ["X"], ["Y"]))


def test_reuse_is_linearity_error(mascarpone):
    text = "p(egg1: egg, egg2: egg):\n  crack(egg1) -> (w, s, y)\n  crack(egg1) -> (w2, s2, y2)\n  return(w, s, y)\n"
    with pytest.raises(LinearityError, match="'egg1' is used more than once"):
        check(parse(text), mascarpone)


def test_unused_variable(mascarpone):
    with pytest.raises(LinearityError, match="never used"):
        check(parse("p(e: egg):\n  crack(e) -> (w, s, y)\n  return(w, s)\n"), mascarpone)


def test_unknown_generator(mascarpone):
    with pytest.raises(ValidationError, match="unknown generator 'boil'"):
        check(parse("p(e: egg):\n  boil(e) -> x\n  return(x)\n"), mascarpone)


def test_arity_and_type_errors(mascarpone):
    with pytest.raises(TypeMismatchError, match="arguments"):
        check(parse("p(e: egg):\n  crack(e, e) -> x\n  return(x)\n"), mascarpone)
    with pytest.raises(TypeMismatchError, match="results"):
        check(parse("p(e: egg):\n  crack(e) -> x\n  return(x)\n"), mascarpone)
    with pytest.raises(TypeMismatchError, match="expected"):
        check(parse("p(s: sugar):\n  crack(s) -> (w, h, y)\n  return(w, h, y)\n"), mascarpone)


def test_untyped_parameter_inferred_or_rejected(mascarpone):
    typed = check(parse("p(e):\n  crack(e) -> (w, s, y)\n  return(w, s, y)\n"), mascarpone)
    assert typed.var_types[typed.params[0]] == "egg"
    with pytest.raises(ValidationError, match="cannot infer"):
        check(parse("p(e):\n  return(e)\n"), mascarpone)


def test_rebinding_consumed_name():
    d = elaborate_text("p(x: X):\n  f(x) -> y\n  g(y) -> x\n  return(x)\n", TOY)
    assert [n.gen for n in d.nodes] == ["f", "g"]


def test_send_receive_only_in_sessions():
    with pytest.raises(ParseError):
        parse("p():\n  ?X -> x\n  !x\n  return()\n")
    prog = parse("p():\n  ?X -> x\n  !x\n  return()\n", effects=True)
    assert [s.generator for s in prog.statements] == ["?", "!"]


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("p():\n  f(x) -> \n  return()\n")
    assert info.value.line == 3


def test_pretty_roundtrip(recipe_text):
    prog = parse(recipe_text)
    assert parse(pretty(prog)) == prog


@settings(max_examples=100, deadline=None)
@given(hst.integers(0, 2 ** 32 - 1))
def test_independent_swap_gives_equal_diagram(seed):
    rng = random.Random(seed)
    text = random_program(rng, rng.randint(2, 9))
    swapped = swap_independent(text, rng)
    if swapped is not None:
        assert dg.is_equal(elaborate_text(text, TOY), elaborate_text(swapped, TOY))


@settings(max_examples=60, deadline=None)
@given(hst.integers(0, 2 ** 32 - 1))
def test_random_programs_pretty_roundtrip(seed):
    text = random_program(random.Random(seed), 6)
    prog = parse(text)
    assert parse(pretty(prog)) == prog
