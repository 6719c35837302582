import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from conftest import fixture_text
from polarsession import polar
from polarsession.demos import data_text
from polarsession.errors import CycleError, ParseError, TypeMismatchError, ValidationError
from polarsession.polar import OUT, PolarItem, PolarShuffle, RECV, SEND, plist
from polarsession.samples import brute_force_shuffles, random_polar_shuffle
from polarsession.session import composition_shuffle
from polarsession.shuffle import Shuffling

X_SEND, X_RECV = PolarItem("X", SEND), PolarItem("X", RECV)


def test_plist_and_symbols():
    assert plist("X! Y?") == (X_SEND, PolarItem("Y", RECV))
    assert plist("X• Y∘") == plist("X! Y?")
    assert str(X_SEND) == "X•" and str(X_RECV) == "X∘"
    with pytest.raises(ParseError):
        plist("X")


def test_link_shape_validates():
    s = PolarShuffle(((X_SEND, X_RECV),), (), {(0, 0): (0, 1)})
    assert polar.validate(s).ok
    assert s == polar.link_shuffle([], "X", [])


def test_spawn_shape_validates():
    s = PolarShuffle((), (X_RECV, X_SEND), {(OUT, 0): (OUT, 1)})
    assert polar.validate(s).ok
    unary = polar.spawn_shuffle([], "X", [])
    assert unary.inputs == ((),) and unary.output == s.output and unary.pairing == s.pairing


def test_reversed_spawn_has_cycle():
    s = PolarShuffle((), (X_SEND, X_RECV), {(OUT, 1): (OUT, 0)})
    report = polar.validate(s)
    assert not report.ok and "cycle" in report.reason
    assert set(report.witness) == {(OUT, 0), (OUT, 1)}
    with pytest.raises(CycleError):
        polar.check(s)


def test_structural_violations():
    bad_type = PolarShuffle(((X_SEND,),), (PolarItem("Y", SEND),), {(0, 0): (OUT, 0)})
    assert "type mismatch" in polar.validate(bad_type).reason
    missing = PolarShuffle(((X_SEND,),), (X_SEND,), {})
    assert "domain mismatch" in polar.validate(missing).reason
    not_bijective = PolarShuffle(((X_SEND, X_SEND),), (X_SEND, X_SEND), {(0, 0): (OUT, 0), (0, 1): (OUT, 0)})
    assert not polar.validate(not_bijective).ok
    out_of_range = PolarShuffle(((X_SEND,),), (X_SEND,), {(0, 0): (OUT, 3)})
    assert not polar.validate(out_of_range).ok


def test_identity_examples():
    empty = polar.identity([])
    assert empty.arity == 1 and empty.size == 0 and polar.validate(empty).ok
    one = polar.identity("X!")
    assert one.pairing == {(0, 0): (OUT, 0)}
    assert polar.validate(polar.identity("X! X?")).ok


def test_compose_identity_laws(rng):
    for _ in range(50):
        t = random_polar_shuffle(rng, 8)
        for i in range(t.arity):
            assert polar.compose(polar.identity(t.inputs[i]), i, t) == t
        assert polar.compose(t, 0, polar.identity(t.output)) == t


def test_snake_laws():
    first = polar.compose(polar.spawn_shuffle("X!", "X", ""), 0, polar.link_shuffle("", "X", "X!"))
    assert first == polar.identity("X!")
    second = polar.compose(polar.spawn_shuffle("", "X", "X?"), 0, polar.link_shuffle("X?", "X", ""))
    assert second == polar.identity("X?")


def test_compose_into_middle_list():
    inner = PolarShuffle((plist("X!"), plist("X?")), (), {(0, 0): (1, 0)})  # link across two parties
    inner = polar.tensor(inner, PolarShuffle((plist("Y!"), ()), plist("Y!"), {(0, 0): (OUT, 0)}))
    outer = PolarShuffle((plist("Z!"), plist("Y!"), plist("Z?")), plist("Y!"),
                         {(0, 0): (2, 0), (1, 0): (OUT, 0)})
    c = polar.compose(inner, 1, outer)
    assert c.arity == 4
    assert c.inputs == (plist("Z!"), plist("X! Y!"), plist("X?"), plist("Z?"))
    assert polar.validate(c).ok
    assert c.pairing[(1, 1)] == (OUT, 0) and c.pairing[(1, 0)] == (2, 0)


def test_compose_border_mismatch():
    with pytest.raises(TypeMismatchError):
        polar.compose(polar.identity("X!"), 0, polar.identity("X?"))
    with pytest.raises(ValidationError):
        polar.compose(polar.identity("X!"), 3, polar.identity("X!"))


def test_tensor_examples():
    lnk = polar.link_shuffle("", "X", "")
    tt = polar.tensor(lnk, lnk)
    assert tt.inputs == (plist("X! X? X! X?"),) and tt.output == ()
    assert len(tt.pairing) == 2 and polar.validate(tt).ok
    assert polar.tensor(polar.identity("X!"), polar.identity("Y?")) == polar.identity("X! Y?")
    assert polar.tensor(lnk, polar.identity([])) == lnk


def test_infer_examples():
    assert polar.infer(["A! B?"], "A! B?") == polar.identity("A! B?")
    later = polar.infer(["X! Y?"], "Y? X!")
    assert later is not None and polar.validate(later).ok
    assert polar.infer(["Y? X!"], "X! Y?") is None
    with pytest.raises(ValidationError, match="distinctly typed"):
        polar.infer(["X! X!"], "X! X!")


def test_wait_and_rush_versus_mirrors():
    gamma, delta, psi = "A!", "B? C!", "D?"
    assert polar.validate(polar.wait(gamma, "X", delta, psi)).ok
    assert polar.validate(polar.rush(gamma, "Y", delta, psi)).ok
    for bad in (polar.send_sooner(gamma, "X", delta, psi), polar.receive_later(gamma, "Y", delta, psi)):
        report = polar.validate(bad)
        assert not report.ok and report.witness


def test_wait_rush_inverse_pairs():
    # moving a send later and a receive sooner are the allowed halves of a swap;
    # when Δ holds only same-polarity items the mirror is also valid and undoes it
    w = polar.wait("", "X", "Y!", "")
    back = polar.send_sooner("", "X", "Y!", "")
    assert polar.validate(back).ok
    assert polar.compose(w, 0, back) == polar.identity("X! Y!")
    r = polar.rush("", "X", "Y?", "")
    back = polar.receive_later("", "X", "Y?", "")
    assert polar.compose(r, 0, back) == polar.identity("Y? X?")


def test_swap_self_inverse():
    for x, y in (("X!", "Y!"), ("X?", "Y?")):
        s = polar.swap_same_polarity("A!", plist(x)[0], plist(y)[0], "B?")
        assert polar.validate(s).ok
        assert polar.compose(s, 0, polar.swap_same_polarity("A!", plist(y)[0], plist(x)[0], "B?")) == \
            polar.identity("A! " + x + " " + y + " B?")
    with pytest.raises(ValidationError):
        polar.swap_same_polarity("", X_SEND, X_RECV, "")


def test_lift_interleaving():
    s = polar.lift(Shuffling((1, 1), (0, 1)), ["A!", "B?"])
    assert polar.validate(s).ok and s.output == plist("A! B?")


def test_factor_identity_and_spawn():
    f = polar.factor(polar.identity("X! Y?"))
    assert not f.links and not f.spawn_list
    assert f.pure_shuffle.assignment == (0, 0)
    assert all(r == polar.identity(r.inputs[0]) for r in f.reorders)
    f = polar.factor(polar.spawn_shuffle("", "X", ""))
    assert len(f.spawn_list) == 1 and not f.links and f.pure_shuffle.size == 0


def test_factor_composition_with_spawn():
    comp = composition_shuffle(["A"], ["B"], ["C"])
    s = polar.compose(comp, 0, polar.spawn_shuffle("A?", "Z", "C!"))
    f = polar.factor(s)
    assert len(f.links) == 1 and len(f.spawn_list) == 1
    assert len(set(f.pure_shuffle.assignment)) == 2
    assert polar.recompose(f) == s


@settings(max_examples=150, deadline=None)
@given(hst.integers(0, 2 ** 32 - 1))
def test_factor_roundtrip_property(seed):
    s = random_polar_shuffle(random.Random(seed), 10)
    f = polar.factor(s)
    for r in f.reorders:
        assert polar.validate(r).ok
    assert polar.validate(f.link_stage).ok and polar.validate(f.spawn_stage).ok
    assert polar.recompose(f) == s


@settings(max_examples=100, deadline=None)
@given(hst.integers(0, 2 ** 32 - 1))
def test_compose_preserves_validity(seed):
    rng = random.Random(seed)
    t = random_polar_shuffle(rng, 6, 2)
    s = random_polar_shuffle(rng, 6 + 2 * len(t.output), 3, fixed_input=t.output, fixed_at=rng.randint(0, 2))
    i = next(k for k in range(s.arity) if s.inputs[k] == t.output)
    assert polar.validate(polar.compose(t, i, s)).ok


@settings(max_examples=100, deadline=None)
@given(hst.integers(0, 2 ** 32 - 1))
def test_coherence_small(seed):
    rng = random.Random(seed)
    from polarsession.samples import distinctly_typed
    inputs, output = distinctly_typed(rng)
    found = brute_force_shuffles(inputs, output)
    assert len(found) <= 1
    inferred = polar.infer(inputs, output)
    assert (inferred is None and not found) or found == [inferred]


# ------------------------------------------------------------- encodings

def test_minimal_link_encoding():
    enc = polar.parse_encoding("f(!a, ?b) = { g(!a), h(?b) }")
    assert enc.part_names == ["g", "h"]
    assert polar.validate(enc.shuffle).ok


def test_pad_encoding():
    enc = polar.parse_encoding(data_text("otp.msg"))
    assert enc.name == "oneTimePad"
    assert enc.part_names == ["bob", "alice", "eve", "stage"]
    assert enc.shuffle.output == plist("X? X! X!")


def test_pad_raw_is_rejected():
    with pytest.raises(ParseError, match="'msg'"):
        polar.parse_encoding(fixture_text("pad_raw.msg"))


def test_edge_used_three_times():
    with pytest.raises(ParseError, match="'a'.*3 times"):
        polar.parse_encoding("f() = { g(!a), h(?a), k(?a) }")


def test_cyclic_encoding_names_edges():
    with pytest.raises(CycleError) as info:
        polar.parse_encoding("f() = { g(?b, !a), h(?a, !b) }")
    assert set(info.value.witness) <= {"a", "b"}


def test_typed_encoding_and_conflict():
    enc = polar.parse_encoding("f(!a:U) = { g(!a) }")
    assert enc.shuffle.output == plist("U!")
    with pytest.raises(ParseError, match="conflicting"):
        polar.parse_encoding("f(!a:U) = { g(!a:V) }")


def test_print_parse_roundtrip(rng):
    for _ in range(50):
        s = random_polar_shuffle(rng, 10)
        text = polar.print_encoding(s)
        assert polar.parse_encoding(text).shuffle == s
