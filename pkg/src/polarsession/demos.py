"""Reproducible worked examples with machine-checkable results.

Every demo reads its polygraphs, interpretations and programs from the
package data directory and returns a Report: named pass/fail checks plus
tables (and matrices or series for the optional figures).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import diagram as dg
from . import polar
from . import session as ss
from . import stochastic as st
from .donotation import check as check_program
from .donotation import elaborate
from .donotation import parse as parse_program
from .shuffle import enumerate_shufflings
from .signature import Polygraph, parse_polygraph, runtime_extend


def data_text(name: str) -> str:
    return resources.files("polarsession").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def data_polygraph(name: str) -> Polygraph:
    return parse_polygraph(data_text(name))


def data_interpretation(name: str, polygraph: Polygraph) -> st.Interpretation:
    return st.interpretation_from_dict(json.loads(data_text(name)), polygraph)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    name: str
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[list]] = field(default_factory=dict)
    matrices: dict[str, np.ndarray] = field(default_factory=dict)
    series: dict[str, tuple[list, list]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_json(self) -> dict:
        return {
            "demo": self.name,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "tables": self.tables,
        }


def _glue_named(encoding: polar.Encoding, programs: dict[str, str], base: Polygraph) -> ss.Session:
    parts = [ss.parse_session_program(programs[name], base) for name in encoding.part_names]
    return ss.glue(parts, encoding.shuffle)


# ------------------------------------------------------------------ OTP

def otp_composite(base: Polygraph, alice_file: str = "alice.sdo") -> ss.Session:
    encoding = polar.parse_encoding(data_text("otp.msg"))
    programs = {
        "bob": data_text("bob.sdo"),
        "alice": data_text(alice_file),
        "eve": data_text("eve.sdo"),
        "stage": data_text("stage.sdo"),
    }
    return _glue_named(encoding, programs, base)


def demo_otp(eps: float = 1e-12) -> Report:
    """The glued one-time pad equals uniform noise on the public channel
    tensored with the identity from message to decryption."""
    report = Report("otp")
    base = data_polygraph("hopf.json")
    composite = otp_composite(base)
    ev = polar.format_list(ss.events(composite))
    report.check("events of the composite", ev == "X? X! X!", ev)
    rows = [["size", "variant", "max_deviation", "passed"]]
    for size in (2, 4):
        interp = data_interpretation(f"hopf_z{size}.json", base)
        expected = st.tensor(st.uniform(size), st.identity((size,)))
        for variant, alice in (("honest", "alice.sdo"), ("broken key", "alice_broken.sdo")):
            session = composite if variant == "honest" else otp_composite(base, alice)
            channel = st.evaluate(ss.out_proc(session), interp)
            dev = st.max_deviation(channel, expected)
            if variant == "honest":
                ok = report.check(f"secure over Z2^{size.bit_length() - 1}", dev <= eps, f"max deviation {dev:.3g}")
                report.matrices[f"composite |X|={size}"] = channel.matrix
            else:
                ok = report.check(f"broken key detected over Z2^{size.bit_length() - 1}", dev > eps,
                                  f"max deviation {dev:.3g}")
            rows.append([size, variant, f"{dev:.6g}", ok])
        report.matrices[f"uniform x identity |X|={size}"] = expected.matrix
    report.tables["otp"] = rows
    return report


# -------------------------------------------------------------- Newcomb

AGENT_SWEEP = (0.0, 0.25, 0.5, 0.75, 1.0)
PRIOR_SWEEP = (0.25, 0.5, 0.75)


def newcomb_expected_utility(reading: str, two_box: float, predict_two_box: float) -> float:
    """Expected utility conditional on the session not failing."""
    base = data_polygraph("newcomb.json")
    raw = json.loads(data_text("newcomb_interp.json"))
    values = np.asarray(raw["utility_values"], dtype=float)
    interp = st.interpretation_from_dict(raw, base)
    interp = interp.with_channels(
        agent=st.from_matrix((), (2,), [1 - two_box, two_box]),
        prior=st.from_matrix((), (2,), [1 - predict_two_box, predict_two_box]))
    encoding = polar.parse_encoding(data_text("newcomb.msg"))
    programs = {
        "agent": data_text("agent.sdo"),
        "predictor": data_text(f"predictor_{reading}.sdo"),
        "stage": data_text("newcomb_stage.sdo"),
    }
    composite = _glue_named(encoding, programs, base)
    weights = st.evaluate(ss.out_proc(composite), interp).matrix.reshape(-1)
    return float(weights @ values / weights.sum())


def demo_newcomb(eps: float = 1e-9) -> Report:
    """Evidential reading favours one box, causal reading favours two."""
    report = Report("newcomb")
    rows = [["reading", "p_predict_two_box", "a_two_box", "expected_utility"]]
    table: dict[tuple[str, float], list[float]] = {}
    for reading in ("evidential", "causal"):
        for p in PRIOR_SWEEP:
            eus = [newcomb_expected_utility(reading, a, p) for a in AGENT_SWEEP]
            table[(reading, p)] = eus
            for a, eu in zip(AGENT_SWEEP, eus):
                rows.append([reading, p, a, f"{eu:.9f}"])
            report.series[f"{reading}, p={p}"] = (list(AGENT_SWEEP), eus)
    for p in PRIOR_SWEEP:
        eus = table[("evidential", p)]
        report.check(f"evidential p={p}: EU(one-box) = 1000", abs(eus[0] - 1000) <= eps, f"{eus[0]:.12g}")
        report.check(f"evidential p={p}: EU(two-box) = 1", abs(eus[-1] - 1) <= eps, f"{eus[-1]:.12g}")
        best = AGENT_SWEEP[int(np.argmax(eus))]
        report.check(f"evidential p={p}: best at one-boxing", best == 0.0, f"argmax a={best}")
    for p in PRIOR_SWEEP:
        eus = table[("causal", p)]
        gap = eus[-1] - eus[0]
        report.check(f"causal p={p}: EU(two-box) - EU(one-box) = 1", abs(gap - 1) <= eps, f"gap {gap:.12g}")
        best = AGENT_SWEEP[int(np.argmax(eus))]
        report.check(f"causal p={p}: best at two-boxing", best == 1.0, f"argmax a={best}")
    report.tables["newcomb"] = rows
    return report


# ------------------------------------------------------------------ XOR

def _elaborate(text: str, sig: Polygraph) -> dg.Diagram:
    return elaborate(check_program(parse_program(text), sig))


def xor_exchange_diagram() -> dg.Diagram:
    return _elaborate(data_text("xor_exchange.do"), data_polygraph("xor.json"))


def demo_xor(eps: float = 1e-12) -> Report:
    """Three XORs exchange two variables: same channel as the swap."""
    report = Report("xor")
    sig = data_polygraph("xor.json")
    d = _elaborate(data_text("xor_exchange.do"), sig)
    swap = dg.symmetry(sig, ["X"], ["X"])
    report.check("three statements, three nodes", len(d.nodes) == 3)
    report.check("not equal to the swap as a diagram", not dg.is_equal(d, swap),
                 "the equality is semantic, not structural")
    rows = [["n", "size", "max_deviation", "passed"]]
    for n in (1, 2, 3):
        interp = data_interpretation(f"xor_z{2 ** n}.json", sig)
        dev = st.max_deviation(st.evaluate(d, interp), st.evaluate(swap, interp))
        ok = report.check(f"equals the swap over Z2^{n}", dev <= eps, f"max deviation {dev:.3g}")
        rows.append([n, 2 ** n, f"{dev:.3g}", ok])
        if n == 1:
            report.matrices["xor exchange over Z2"] = st.evaluate(d, interp).matrix
    report.tables["xor"] = rows
    return report


# ----------------------------------------------------------------- race

def race_composites(same: bool = False) -> tuple[list, dict]:
    """Channels of all interleavings of get;f;put with get;g;put."""
    sig = data_polygraph("race.json")
    runtime = runtime_extend(sig)
    interp = data_interpretation("race_z3.json", runtime)
    if same:
        interp = interp.with_channels(g=interp.channel("f"))
    pf = ss.parse_session_program(data_text("race_f.sdo"), sig)
    pg = ss.parse_session_program(data_text("race_g.sdo"), sig)
    results = []
    for sh in enumerate_shufflings((len(pf.effects), len(pg.effects))):
        composite = ss.interleave([pf, pg], sh)
        results.append((sh.assignment, st.evaluate(composite.diagram, interp)))
    f, g = interp.channel("f"), interp.channel("g")
    named = {"f": f, "g": g, "f;g": st.kleisli_compose(f, g), "g;f": st.kleisli_compose(g, f)}
    return results, named


def _distinct(channels) -> list:
    out = []
    for ch in channels:
        if not any(st.channel_equal(ch, o, 0.0) for o in out):
            out.append(ch)
    return out


def demo_race() -> Report:
    """Interleaving two read-modify-write processes gives four outcomes."""
    report = Report("race")
    results, named = race_composites()
    rows = [["interleaving", "effect"]]
    for assignment, ch in results:
        label = next((k for k, v in named.items() if st.channel_equal(ch, v, 0.0)), "other")
        order = _interleaving_label(assignment)
        rows.append([order, label])
    report.tables["race"] = rows
    distinct = _distinct(ch for _, ch in results)
    expected = _distinct(named.values())
    report.check("f;g differs from g;f", len(expected) == 4)
    matches = all(any(st.channel_equal(d, e, 0.0) for e in expected) for d in distinct) and \
        all(any(st.channel_equal(e, d, 0.0) for d in distinct) for e in expected)
    report.check("composites are exactly {f, g, f;g, g;f}", matches and len(distinct) == 4,
                 f"{len(distinct)} distinct composites over {len(results)} interleavings")
    same, _ = race_composites(same=True)
    n_same = len(_distinct(ch for _, ch in same))
    report.check("with f = g the composites collapse", n_same <= 2, f"{n_same} distinct")
    for k, v in named.items():
        report.matrices[k] = v.matrix
    return report


def _interleaving_label(assignment) -> str:
    """Spell an interleaving of two get;put processes, e.g. getF getG putF putG."""
    seen = [0, 0]
    words = []
    for b in assignment:
        words.append(("get", "put")[seen[b]] + "FG"[b])
        seen[b] += 1
    return " ".join(words)


# ------------------------------------------------------------ mascarpone

def demo_mascarpone() -> Report:
    """Elaborate the recipe, order it, and check interchange invariance."""
    report = Report("mascarpone")
    sig = data_polygraph("mascarpone.json")
    text = data_text("mascarpone.do")
    d = _elaborate(text, sig)
    report.check("six nodes", len(d.nodes) == 6, repr(d))
    order = [n.gen for n in dg.topological_order(d)]
    first = {g: order.index(g) for g in reversed(order)}
    last = {g: len(order) - 1 - order[::-1].index(g) for g in order}
    ok = last["crack"] < first["whisk"] and last["crack"] < first["beat"] \
        and first["beat"] < first["stir"] < first["fold"]
    report.check("topological order respects the recipe", ok, " ".join(order))
    lines = text.splitlines()
    i = next(k for k, l in enumerate(lines) if l.strip().startswith("whisk"))
    lines[i], lines[i + 1] = lines[i + 1], lines[i]
    swapped = _elaborate("\n".join(lines), sig)
    report.check("swapping whisk and beat gives an equal diagram", dg.is_equal(d, swapped))
    report.check("equal diagrams share a canonical hash", dg.canonical_hash(d) == dg.canonical_hash(swapped),
                 f"{dg.canonical_hash(d):016x}")
    report.tables["mascarpone"] = [["step", "generator"]] + [[k + 1, g] for k, g in enumerate(order)]
    return report


DEMOS = {
    "otp": demo_otp,
    "newcomb": demo_newcomb,
    "xor": demo_xor,
    "race": demo_race,
    "mascarpone": demo_mascarpone,
}
