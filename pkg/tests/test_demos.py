import json

import pytest

from polarsession import demos
from polarsession import stochastic as st


@pytest.mark.parametrize("name", sorted(demos.DEMOS))
def test_demo_passes(name):
    report = demos.DEMOS[name]()
    failed = [c for c in report.checks if not c.passed]
    assert report.passed and not failed, failed
    json.dumps(report.to_json(), default=str)


def test_otp_broken_key_deviates():
    base = demos.data_polygraph("hopf.json")
    interp = demos.data_interpretation("hopf_z2.json", base)
    broken = demos.otp_composite(base, "alice_broken.sdo")
    from polarsession import session as ss
    channel = st.evaluate(ss.out_proc(broken), interp)
    expected = st.tensor(st.uniform(2), st.identity((2,)))
    assert st.max_deviation(channel, expected) == pytest.approx(0.5)


@pytest.mark.parametrize("reading,a,want", [("evidential", 0.0, 1000.0), ("evidential", 1.0, 1.0)])
def test_newcomb_perfect_predictor(reading, a, want):
    assert demos.newcomb_expected_utility(reading, a, a) == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("p", demos.PRIOR_SWEEP)
def test_newcomb_causal_dominance(p):
    gap = demos.newcomb_expected_utility("causal", 1.0, p) - demos.newcomb_expected_utility("causal", 0.0, p)
    assert gap == pytest.approx(1.0, abs=1e-9)


def test_race_labels_and_collapse():
    results, named = demos.race_composites()
    assert len(results) == 6
    labels = {next((k for k, v in named.items() if st.channel_equal(ch, v, 0.0)), "other") for _, ch in results}
    assert labels == {"f", "g", "f;g", "g;f"}
    same, _ = demos.race_composites(same=True)
    assert len(demos._distinct(ch for _, ch in same)) == 2
