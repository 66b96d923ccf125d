import numpy as np
import pytest

from adaptive_ids import fuzzy
from adaptive_ids.errors import MissingInput, ModelFormatError
from adaptive_ids.fuzzy import (FuzzySystem, MembershipFn, bundled_system, defuzzify_centroid, fuzzify,
                                hybrid_degree, infer, verdict_from_degree)


def tiny_system():
    return FuzzySystem.from_json({
        "version": 1,
        "inputs": {"x": {"universe": [0, 1], "terms": {"lo": [0, 0, 1], "hi": [0, 1, 1]}}},
        "output": {"name": "alarm", "universe": [0, 1],
                   "terms": {"benign": [0, 0, 0.5], "malicious": [0.5, 1, 1]}},
        "rules": [{"if": [["x", "lo"]], "then": "benign"}, {"if": [["x", "hi"]], "then": "malicious"}],
    })


@pytest.mark.parametrize("x, expect", [(0.0, 0.0), (0.25, 0.5), (0.5, 1.0), (0.75, 0.5), (1.0, 0.0), (-3, 0.0)])
def test_triangle(x, expect):
    assert fuzzify(x, MembershipFn(0.0, 0.5, 1.0)) == expect


def test_shoulders():
    left, right = MembershipFn(-1, -1, 0), MembershipFn(0, 1, 1)
    assert fuzzify(-5, left) == 1.0 and fuzzify(-0.5, left) == 0.5 and fuzzify(0.2, left) == 0.0
    assert fuzzify(5, right) == 1.0 and fuzzify(0.5, right) == 0.5


def test_sample_agrees_with_pointwise():
    mf = MembershipFn(0.1, 0.4, 0.9)
    xs = np.linspace(-0.2, 1.2, 57)
    assert np.allclose(mf.sample(xs), [fuzzify(x, mf) for x in xs])


def test_bad_triangle():
    with pytest.raises(ValueError):
        MembershipFn(1.0, 0.5, 2.0)


def test_mamdani_min_max_and_centroid_by_hand():
    sys = tiny_system()
    x = 0.3  # lo = 0.7, hi = 0.3
    grid = np.linspace(0, 1, 101)
    benign = np.clip(1 - grid / 0.5, 0, 1)
    mal = np.clip((grid - 0.5) / 0.5, 0, 1)
    agg = np.maximum(np.minimum(benign, 0.7), np.minimum(mal, 0.3))
    assert np.allclose(infer(sys, {"x": x}), agg)
    assert defuzzify_centroid(infer(sys, {"x": x})) == pytest.approx(float((grid * agg).sum() / agg.sum()))


def test_centroid_of_nothing_is_neutral():
    assert defuzzify_centroid(np.zeros(101)) == 0.5


def test_missing_input():
    with pytest.raises(MissingInput):
        infer(tiny_system(), {})


def test_verdicts():
    assert verdict_from_degree(0.5) == ("benign", 0.0)
    assert verdict_from_degree(0.9) == ("malicious", pytest.approx(0.8))
    assert verdict_from_degree(0.0) == ("benign", 1.0)


def test_config_round_trip_and_errors():
    for name in ("hybrid", "standalone", "nslkdd"):
        s = bundled_system(name)
        assert FuzzySystem.from_json(s.to_json()) == s
    bad = tiny_system().to_json()
    bad["rules"].append({"if": [["y", "lo"]], "then": "benign"})
    with pytest.raises(ModelFormatError):
        FuzzySystem.from_json(bad)
    bad = tiny_system().to_json()
    bad["version"] = 2
    with pytest.raises(ModelFormatError):
        FuzzySystem.from_json(bad)


def test_hybrid_degree_monotone_in_margin():
    sys = bundled_system("hybrid")
    margins = np.linspace(-3, 3, 241)
    for rate in (0.0, 0.2, 0.5, 0.8, 1.0):
        d = np.array([hybrid_degree(m, sys, {"packet_rate": rate}) for m in margins])
        assert np.all(np.diff(d) >= -1e-12)


def test_hybrid_extremes():
    sys = bundled_system("hybrid")
    assert verdict_from_degree(hybrid_degree(2.0, sys, {"packet_rate": 0.9}))[0] == "malicious"
    assert verdict_from_degree(hybrid_degree(-2.0, sys, {"packet_rate": 0.1}))[0] == "benign"
    # an undecided margin with a middling rate stays on the benign side with no confidence
    assert verdict_from_degree(hybrid_degree(0.0, sys, {"packet_rate": 0.5})) == ("benign", 0.0)


def test_hybrid_more_decisive_than_raw_margin_when_clearly_negative():
    sys = bundled_system("hybrid")
    for m in (-0.7, -0.8, -0.9):
        _, conf = verdict_from_degree(hybrid_degree(m, sys, {"packet_rate": 0.2}))
        assert conf > abs(m)


def test_hybrid_classify_needs_margin_input():
    with pytest.raises(MissingInput):
        fuzzy.hybrid_classify(None, tiny_system(), [0.0], {})
