"""One test per acceptance criterion; each records a ✅/❌ line in the summary."""

import contextlib
import io
import random
import time
from math import factorial

import numpy as np

import _laws
from conftest import record
from polarsession import cli, demos, polar
from polarsession import diagram as dg
from polarsession import session as ss
from polarsession import shuffle as sh
from polarsession import stochastic as st
from polarsession.donotation import elaborate_text, insertion_count
from polarsession.samples import (TOY, brute_force_shuffles, distinctly_typed, random_diagram,
                                  random_polar_shuffle, random_program, random_session, swap_independent)

RT = ss.session_runtime(TOY)


def test_01_shuffle_counting():
    n, listed = sh.count((1, 2, 3)), len(sh.enumerate_shufflings((1, 2, 3)))
    ok = record(1, "shuffle counting", n == 60 and listed == 60, f"count={n}, enumerated={listed}")
    assert ok


def test_02_insertion_formula():
    bad = [(n, m) for n in range(13) for m in range(13 - n)
           if insertion_count(n, m) != factorial(m + n) // factorial(m)]
    ok = record(2, "insertion recurrence equals (m+n)!/m!", not bad, f"{len(bad)} mismatches for n+m <= 12")
    assert ok


def test_03_polar_coherence():
    rng = random.Random(3)
    bad = empty = 0
    for _ in range(500):
        inputs, output = distinctly_typed(rng, max_elements=8)
        found = brute_force_shuffles(inputs, output)
        inferred = polar.infer(inputs, output)
        empty += not found
        if len(found) > 1 or (inferred is None) != (not found) or (found and inferred != found[0]):
            bad += 1
    ok = record(3, "polar-shuffle coherence", bad == 0, f"500 instances, {bad} bad, {empty} without a valid shuffle")
    assert ok


def test_04_send_receive_asymmetry():
    gamma, delta, psi = "A!", "B? C!", "D?"
    good = [polar.validate(polar.wait(gamma, "X", delta, psi)), polar.validate(polar.rush(gamma, "Y", delta, psi))]
    bad = [polar.validate(polar.send_sooner(gamma, "X", delta, psi)),
           polar.validate(polar.receive_later(gamma, "Y", delta, psi))]
    ok = all(r.ok for r in good) and all(not r.ok and r.witness for r in bad)
    record(4, "wait/rush valid, send-sooner/receive-later rejected", ok,
           "witnesses: " + "; ".join(str(list(r.witness)) for r in bad))
    assert ok


def test_05_factorization_roundtrip():
    rng = random.Random(5)
    bad = 0
    for _ in range(500):
        s = random_polar_shuffle(rng, max_elements=10)
        if polar.recompose(polar.factor(s)) != s:
            bad += 1
    ok = record(5, "factor/recompose roundtrip", bad == 0, f"500 shuffles, {bad} bad")
    assert ok


def test_06_validation_scaling():
    sink = io.StringIO()
    start = time.perf_counter()
    with contextlib.redirect_stdout(sink):
        code = cli.main(["polar", "validate", "--identity-size", "100000"])
    elapsed = time.perf_counter() - start
    ok = record(6, "validate a 10^5-element identity in <= 1 s", code == 0 and elapsed <= 1.0,
                f"{elapsed:.3f} s, exit {code}")
    assert ok


def test_07_do_notation_coherence():
    recipe = elaborate_text(demos.data_text("mascarpone.do"), demos.data_polygraph("mascarpone.json"))
    exchange = demos.xor_exchange_diagram()
    rng = random.Random(7)
    checked = bad = 0
    while checked < 200:
        text = random_program(rng, rng.randint(2, 8))
        swapped = swap_independent(text, rng)
        if swapped is None:
            continue
        checked += 1
        if not dg.is_equal(elaborate_text(text, TOY), elaborate_text(swapped, TOY)):
            bad += 1
    ok = record(7, "do-notation swaps give equal diagrams", bad == 0 and len(recipe.nodes) == 6 and len(exchange.nodes) == 3,
                f"{checked} swapped programs, {bad} bad")
    assert ok


def test_08_xor_swap():
    d = demos.xor_exchange_diagram()
    devs = []
    for name, n in (("xor_z2.json", 2), ("xor_z4.json", 4), ("xor_z8.json", 8)):
        interp = demos.data_interpretation(name, d.polygraph)
        devs.append(st.max_deviation(st.evaluate(d, interp), st.swap(n, n)))
    ok = record(8, "xor exchange equals swap over Z2^n, n=1..3", max(devs) <= 1e-12, f"max deviation {max(devs):.3g}")
    assert ok


def test_09_one_time_pad():
    base = demos.data_polygraph("hopf.json")
    honest, broken = demos.otp_composite(base), demos.otp_composite(base, "alice_broken.sdo")
    devs, controls = [], []
    for size in (2, 4):
        interp = demos.data_interpretation(f"hopf_z{size}.json", base)
        expected = st.tensor(st.uniform(size), st.identity((size,)))
        devs.append(st.max_deviation(st.evaluate(ss.out_proc(honest), interp), expected))
        controls.append(st.max_deviation(st.evaluate(ss.out_proc(broken), interp), expected))
    ok = max(devs) <= 1e-12 and min(controls) > 1e-12
    record(9, "one-time pad is uniform x identity; broken key detected", ok,
           f"honest deviation {max(devs):.3g}, broken deviation {min(controls):.3g}")
    assert ok


def test_10_newcomb():
    eu = demos.newcomb_expected_utility
    one, two = eu("evidential", 0.0, 0.0), eu("evidential", 1.0, 1.0)
    gaps = [eu("causal", 1.0, p) - eu("causal", 0.0, p) for p in demos.PRIOR_SWEEP]
    ok = abs(one - 1000) <= 1e-9 and abs(two - 1) <= 1e-9 and all(abs(g - 1) <= 1e-9 for g in gaps)
    record(10, "Newcomb: evidential one-boxes, causal two-boxes", ok,
           f"evidential EU {one:g}/{two:g}, causal gaps {[round(g, 12) for g in gaps]}")
    assert ok


def test_11_race_conditions():
    results, named = demos.race_composites()
    distinct = demos._distinct(ch for _, ch in results)
    expected = demos._distinct(named.values())
    same = len(distinct) == len(expected) == 4 and all(
        any(st.channel_equal(d, e, 0.0) for e in expected) for d in distinct)
    ok = record(11, "interleavings give exactly {f, g, f;g, g;f}", same,
                f"{len(distinct)} distinct composites over {len(results)} interleavings")
    assert ok


def test_12_comb_roundtrip():
    rng = random.Random(12)
    bad = 0
    for _ in range(200):
        s = random_session(rng, max_events=6)
        if not ss.is_equal_sessions(ss.from_comb(ss.to_comb(s)), s):
            bad += 1
    ok = record(12, "comb roundtrip", bad == 0, f"200 sessions, {bad} bad")
    assert ok


def test_13_glue_respects_composition():
    rng = random.Random(13)
    bad = 0
    for _ in range(100):
        t = random_polar_shuffle(rng, 6, 2)
        s = random_polar_shuffle(rng, 6 + 2 * len(t.output), 3, fixed_input=t.output, fixed_at=rng.randint(0, 2))
        i = next(k for k in range(s.arity) if s.inputs[k] == t.output)
        inner = [random_session(rng, events=l) for l in t.inputs]
        outer = [random_session(rng, events=l) for l in s.inputs]
        left = ss.glue(outer[:i] + inner + outer[i + 1:], polar.compose(t, i, s), polygraph=RT)
        right = ss.glue(outer[:i] + [ss.glue(inner, t, polygraph=RT)] + outer[i + 1:], s, polygraph=RT)
        bad += not ss.is_equal_sessions(left, right)
    ok = record(13, "glue respects polar-shuffle composition", bad == 0, f"100 instances, {bad} bad")
    assert ok


def test_14_proc_laws():
    rng = random.Random(14)
    eq = ss.is_equal_sessions
    counts = dict.fromkeys(("associativity", "unitality", "interchange", "symmetry"), 0)

    def P(d):
        return ss.in_proc(d, RT)

    for _ in range(50):
        f = random_diagram(rng, rng.randint(0, 4))
        g = random_diagram(rng, rng.randint(0, 4), dom=list(f.cod))
        h = random_diagram(rng, rng.randint(0, 4), dom=list(g.cod))
        F, G, H = P(f), P(g), P(h)
        counts["associativity"] += not eq(ss.proc_compose(ss.proc_compose(F, G), H),
                                          ss.proc_compose(F, ss.proc_compose(G, H)))
        counts["unitality"] += not (eq(ss.proc_compose(ss.proc_id(RT, f.dom), F), F)
                                    and eq(ss.proc_compose(F, ss.proc_id(RT, f.cod)), F))
        a, b = random_diagram(rng, 2), random_diagram(rng, 2)
        c, d = random_diagram(rng, 2, dom=list(a.cod)), random_diagram(rng, 2, dom=list(b.cod))
        A, B, C, D = P(a), P(b), P(c), P(d)
        counts["interchange"] += not eq(ss.proc_compose(ss.proc_tensor(A, B), ss.proc_tensor(C, D)),
                                        ss.proc_tensor(ss.proc_compose(A, C), ss.proc_compose(B, D)))
        x, y = list(a.dom), list(b.dom)
        counts["symmetry"] += not eq(ss.proc_compose(ss.proc_symmetry(RT, x, y), ss.proc_symmetry(RT, y, x)),
                                     ss.proc_id(RT, x + y))
    ok = record(14, "Proc associativity, unitality, interchange, symmetry", not any(counts.values()),
                f"50 instances each, failures {counts}")
    assert ok


def test_15_backend_laws():
    frob = max(max(_laws.frobenius_deviations(n).values()) for n in _laws.SIZES)
    unif = max(max(_laws.uniformity_deviations(a, b).values()) for a, b in ((1, 2), (2, 3), (3, 2)))
    unit = _laws.dirac_unit_deviation(np.random.default_rng(15))
    closure = _laws.closure_failures(np.random.default_rng(16))
    bayes = _laws.synthetic_bayes_failures(seed=17, trials=100)
    ok = max(frob, unif, unit) <= 1e-12 and closure == 0 and bayes == 0
    record(15, "backend laws (Frobenius, Dirac units, closure, synthetic Bayes)", ok,
           f"structural deviation {max(frob, unif, unit):.3g}, closure failures {closure}, Bayes failures {bayes}/100")
    assert ok
