import json

import numpy as np
import pytest

from ocrunit.core import load_test_store
from ocrunit.harness.bench import bootstrap_overall, category_means, score_run
from benchdata import CATEGORIES, planted_store, write_candidates
from oracles import loop_bootstrap


def test_planted_pattern_matches_hand_computation(tmp_path):
    store, bodies, totals, _ = planted_store()
    write_candidates(tmp_path, bodies)
    rep = score_run(store, str(tmp_path), bootstrap_B=200, seed=0)
    for cat in CATEGORIES:
        p, t = totals[cat]
        assert rep.per_category[cat].pass_rate == p / t
        assert rep.per_category[cat].test_count == t
    assert rep.overall == 100.0 * np.mean([totals[c][0] / totals[c][1] for c in CATEGORIES])
    assert rep.skipped_docs == [] and rep.n_docs == 40


def test_ci_matches_independent_bootstrap(tmp_path):
    store, bodies, _, per_doc = planted_store()
    write_candidates(tmp_path, bodies)
    rep = score_run(store, str(tmp_path), bootstrap_B=2000, seed=1)
    oracle = loop_bootstrap(per_doc, 2000, seed=99)
    assert rep.ci_halfwidth > 0
    assert abs(rep.ci_halfwidth - oracle) <= 0.10 * oracle


def test_deterministic_under_seed(tmp_path):
    store, bodies, _, _ = planted_store()
    write_candidates(tmp_path, bodies)
    a = score_run(store, str(tmp_path), 300, seed=5)
    b = score_run(store, str(tmp_path), 300, seed=5)
    assert a.to_json() == b.to_json()


def one_line(doc, cat, i, text="hello"):
    return json.dumps({"id": f"{doc}{cat}{i}", "doc_id": doc, "page": 1, "category": cat, "type": "present", "text": text})


def test_all_pass_has_zero_halfwidth(tmp_path):
    store = load_test_store("\n".join(one_line(f"d{i}", "c", i) for i in range(10)))
    write_candidates(tmp_path, {f"d{i}": "hello" for i in range(10)})
    rep = score_run(store, str(tmp_path))
    assert (rep.overall, rep.ci_halfwidth) == (100.0, 0.0)


def test_category_mean_not_pooled(tmp_path):
    lines = [one_line("d1", "good", 0)] + [one_line("d2", "bad", i, "absent-word") for i in range(9)]
    store = load_test_store("\n".join(lines))
    write_candidates(tmp_path, {"d1": "hello", "d2": "hello"})
    assert score_run(store, str(tmp_path)).overall == 50.0


def test_missing_candidate_fails_its_tests(tmp_path):
    store, bodies, _, _ = planted_store()
    write_candidates(tmp_path, bodies, skip={"doc03"})
    rep = score_run(store, str(tmp_path), bootstrap_B=50)
    assert rep.skipped_docs == [("doc03", "missing candidate")]
    assert all(not o.passed for o in rep.outcomes["doc03"])
    assert "skipped doc03: missing candidate" in rep.format_table()


def test_empty_store_is_an_error(tmp_path):
    with pytest.raises(ValueError):
        score_run(load_test_store(b""), str(tmp_path))


def test_bootstrap_weights_cover_each_replicate():
    passed = np.array([[1.0], [0.0], [1.0]])
    total = np.ones((3, 1))
    reps = bootstrap_overall(passed, total, 500, 0)
    assert reps.shape == (500,) and ((reps >= 0) & (reps <= 1)).all()
    assert category_means(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0]])).tolist() == [1.0]
