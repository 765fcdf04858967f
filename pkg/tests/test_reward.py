import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocrunit.core import CandidatePage, parse_test_case, run_tests
from ocrunit.reward import RewardConfig, combine, compute_reward, parse_front_matter

FULL = "---\nprimary_language: en\nrotation_correction: 0\nis_rotation_valid: true\n---\n"


def make_tests(words):
    return [
        parse_test_case({"id": f"t{i}", "doc_id": "d", "page": 1, "category": "c", "type": "present", "text": w})
        for i, w in enumerate(words)
    ]


SIX = make_tests(["one", "two", "three", "four", "five", "six"])
BODY_4 = "one two three four"


def test_four_of_six():
    s = compute_reward(CandidatePage.from_text("d", FULL + BODY_4, finished=True), SIX)
    assert abs(s.pass_rate - 4 / 6) < 1e-9 and f"{s.pass_rate:.2f}" == "0.67"
    assert (s.eos_reward, s.metadata_reward) == (1.0, 1.0)
    assert s.composite == pytest.approx((4 / 6 + 0.1 + 0.1) / 1.2)
    assert round(s.composite, 4) == 0.7222


def test_bounds():
    top = compute_reward(CandidatePage.from_text("d", FULL + "one two three four five six"), SIX)
    assert top.composite == 1.0
    bottom = compute_reward(CandidatePage.from_text("d", "nothing", finished=False), SIX)
    assert bottom.composite == 0.0


def test_empty_tests_rejected():
    with pytest.raises(ValueError):
        compute_reward(CandidatePage("d", "x"), [])


def test_config_validation():
    with pytest.raises(ValueError):
        RewardConfig(w_tests=0)
    with pytest.raises(ValueError):
        RewardConfig(w_eos=-1)


@pytest.mark.parametrize(
    "raw, valid",
    [
        (FULL, 3),
        (FULL.replace("rotation_correction: 0", "rotation_correction: 45"), 2),
        (None, 0),
        ("", 0),
        ("primary_language: en\nrotation_correction: 90\nis_rotation_valid: false\n\nBody", 3),
        ("---\nprimary_language: no\n---", 1),  # "no" stays a language tag, not a boolean
        ("---\nprimary_language: english-us\nis_rotation_valid: yes\n---", 0),
        ("---\nprimary_language: [unclosed\n---", 0),
        ("---\nprimary_language: en\n", 0),  # never closed
    ],
)
def test_front_matter_validity(raw, valid):
    fm = parse_front_matter(raw)
    assert round(fm.fraction_valid() * 3) == valid


def test_front_matter_keeps_unknown_keys_but_ignores_them():
    fm = parse_front_matter("---\nprimary_language: de\nfoo: bar\n---")
    assert fm.values["foo"] == "bar"
    assert fm.fraction_valid() == pytest.approx(1 / 3)


unit = st.floats(0, 1)


@given(unit, unit, unit, unit, st.sampled_from(["p", "e", "m"]))
def test_composite_monotone(p, e, m, bump, which):
    cfg = RewardConfig()
    base = combine(p, e, m, cfg)
    args = {"p": p, "e": e, "m": m}
    args[which] = max(args[which], bump)
    assert combine(args["p"], args["e"], args["m"], cfg) >= base
    assert 0.0 <= base <= 1.0


@given(st.lists(st.sampled_from(["one", "two", "three", "x", "y"]), min_size=1, max_size=10), st.booleans())
def test_pass_rate_matches_recount(words, finished):
    tests = make_tests(words)
    page = CandidatePage("d", "one two three", finished=finished)
    s = compute_reward(page, tests)
    outs = run_tests(page, tests)
    assert s.pass_rate == sum(1 for o in outs if o.passed) / len(outs)
    assert s.eos_reward == (1.0 if finished else 0.0)
