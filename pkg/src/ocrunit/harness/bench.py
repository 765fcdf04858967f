"""Benchmark scoring over a directory of candidate Markdown files."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core import CandidatePage, TestOutcome, TestStore, run_tests

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CategoryScore:
    pass_rate: float  # fraction in [0, 1]
    test_count: int
    passed: int


@dataclass
class BenchReport:
    """Per-category pass rates; ``overall`` and ``ci_halfwidth`` are in percentage points."""

    per_category: Dict[str, CategoryScore]
    overall: float
    ci_halfwidth: float
    skipped_docs: List[Tuple[str, str]] = field(default_factory=list)
    n_docs: int = 0
    n_tests: int = 0
    outcomes: Dict[str, List[TestOutcome]] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {
            "overall": self.overall,
            "ci_halfwidth": self.ci_halfwidth,
            "per_category": {
                k: {"pass_rate": v.pass_rate, "test_count": v.test_count, "passed": v.passed}
                for k, v in self.per_category.items()
            },
            "skipped_docs": [{"doc_id": d, "reason": r} for d, r in self.skipped_docs],
            "n_docs": self.n_docs,
            "n_tests": self.n_tests,
        }

    def format_table(self) -> str:
        width = max([len("category")] + [len(k) for k in self.per_category])
        lines = [f"{'category':<{width}}  {'pass %':>7}  {'tests':>6}"]
        for name, sc in self.per_category.items():
            lines.append(f"{name:<{width}}  {100 * sc.pass_rate:7.1f}  {sc.test_count:6d}")
        lines.append(f"{'overall':<{width}}  {self.overall:7.1f}  ± {self.ci_halfwidth:.1f}")
        for doc, reason in self.skipped_docs:
            lines.append(f"skipped {doc}: {reason}")
        return "\n".join(lines)


def load_candidate(candidates_dir: str, doc_id: str) -> Optional[CandidatePage]:
    path = os.path.join(candidates_dir, f"{doc_id}.md")
    if not os.path.isfile(path):
        return None
    with open(path, encoding="utf-8") as fh:
        return CandidatePage.from_text(doc_id, fh.read())


def category_means(passed: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Mean over categories of per-category pass rates; rows are replicates.

    Categories with no tests in a replicate are left out of that replicate's mean.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = passed / total
    return np.nanmean(np.where(total > 0, rates, np.nan), axis=-1)


def bootstrap_overall(passed: np.ndarray, total: np.ndarray, B: int, seed: int) -> np.ndarray:
    """``B`` replicates of the category-mean statistic, resampling documents with replacement.

    ``passed`` and ``total`` are (docs, categories) count matrices.
    """
    D = passed.shape[0]
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, D, size=(B, D))
    rows = np.repeat(np.arange(B), D)
    weights = np.bincount(rows * D + idx.ravel(), minlength=B * D).reshape(B, D).astype(np.float64)
    return category_means(weights @ passed, weights @ total)


def score_outcomes(
    outcomes: Dict[str, List[TestOutcome]],
    store: TestStore,
    bootstrap_B: int = 1000,
    seed: int = 0,
) -> Tuple[Dict[str, CategoryScore], float, float]:
    cats = sorted({t.category for t in store.all_tests()})
    col = {c: i for i, c in enumerate(cats)}
    docs = list(store)
    passed = np.zeros((len(docs), len(cats)))
    total = np.zeros((len(docs), len(cats)))
    for d, doc_id in enumerate(docs):
        for test, out in zip(store[doc_id], outcomes[doc_id]):
            total[d, col[test.category]] += 1
            passed[d, col[test.category]] += out.passed
    p_sum = passed.sum(axis=0)
    t_sum = total.sum(axis=0)
    per_category = {
        c: CategoryScore(float(p_sum[i] / t_sum[i]), int(t_sum[i]), int(p_sum[i])) for c, i in col.items()
    }
    overall = 100.0 * float(np.mean(p_sum / t_sum))
    if bootstrap_B > 0 and len(docs) > 1:
        reps = 100.0 * bootstrap_overall(passed, total, bootstrap_B, seed)
        lo, hi = np.percentile(reps, [2.5, 97.5])
        half = float(hi - lo) / 2.0
    else:
        half = 0.0
    return per_category, overall, half


def score_run(
    store: TestStore, candidates_dir: str, bootstrap_B: int = 1000, seed: int = 0
) -> BenchReport:
    """Score every document in ``store`` against ``<candidates_dir>/<doc_id>.md``.

    A missing candidate fails all of its tests and is listed in ``skipped_docs``.
    """
    if store.num_tests == 0:
        raise ValueError("test store is empty")
    outcomes: Dict[str, List[TestOutcome]] = {}
    skipped = []
    for doc_id in store:
        page = load_candidate(candidates_dir, doc_id)
        if page is None:
            skipped.append((doc_id, "missing candidate"))
            outcomes[doc_id] = [TestOutcome(t.id, False, "missing candidate") for t in store[doc_id]]
            continue
        outcomes[doc_id] = run_tests(page, store[doc_id])
    if os.path.isdir(candidates_dir):
        extra = sorted(f[:-3] for f in os.listdir(candidates_dir) if f.endswith(".md") and f[:-3] not in store)
        if extra:
            log.warning("%d candidate file(s) have no tests and are ignored: %s", len(extra), extra[:5])
    per_category, overall, half = score_outcomes(outcomes, store, bootstrap_B, seed)
    return BenchReport(per_category, overall, half, skipped, len(store), store.num_tests, outcomes)
