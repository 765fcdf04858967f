"""The numba kernels and their numpy fallbacks must agree exactly."""
import os
import subprocess
import sys

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from ocrunit import kernels
from oracles import brute_ngram_run, levenshtein

codes = st.lists(st.integers(97, 100), max_size=20)
pats = st.lists(st.integers(97, 100), min_size=1, max_size=6)


def arr(xs):
    return np.asarray(xs, dtype=np.int32)


@given(codes, pats)
def test_start_costs_backends_agree(text, pat):
    a = kernels.start_costs_nb(arr(text), arr(pat))
    b = kernels.start_costs_np(arr(text), arr(pat))
    assert a.tolist() == b.tolist()


@given(codes, pats)
def test_start_costs_is_min_over_window_ends(text, pat):
    t = "".join(map(chr, text))
    p = "".join(map(chr, pat))
    got = kernels.start_costs(arr(text), arr(pat))
    for s in range(len(t) + 1):
        assert got[s] == min(levenshtein(t[s:e], p) for e in range(s, len(t) + 1))


@given(codes, pats)
def test_prefix_costs_backends_agree_and_match_oracle(seg, pat):
    a = kernels.prefix_costs_nb(arr(seg), arr(pat))
    b = kernels.prefix_costs_np(arr(seg), arr(pat))
    assert a.tolist() == b.tolist()
    s = "".join(map(chr, seg))
    p = "".join(map(chr, pat))
    assert a.tolist() == [levenshtein(s[:e], p) for e in range(len(s) + 1)]


@given(st.lists(st.integers(0, 3), max_size=60), st.integers(1, 4), st.integers(0, 5), st.integers(2, 5))
def test_periodic_run_backends_agree_with_oracle(tokens, n_min, extra, reps):
    t = np.asarray(tokens, dtype=np.int64)
    n_max = n_min + extra
    a = kernels.first_periodic_run_nb(t, n_min, n_max, reps)
    b = kernels.first_periodic_run_np(t, n_min, n_max, reps)
    assert tuple(map(int, a)) == tuple(map(int, b))
    want = brute_ngram_run(tokens, n_min, n_max, reps)
    assert (None if a[0] < 0 else tuple(map(int, a))) == want


def _run_with_flag(flag: str) -> str:
    code = (
        "from ocrunit import kernels; from ocrunit.textnorm import find_anchor; "
        "from ocrunit.checks import check_ngram_repeat, NgramRepeatPayload; "
        "print(kernels.USE_NUMBA, find_anchor('the quikc brown fox', 'quick brown', 2), "
        "check_ngram_repeat('the cat sat ' * 10, NgramRepeatPayload())[0])"
    )
    env = dict(os.environ, OCRUNIT_DISABLE_NUMBA=flag)
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout


def test_env_flag_selects_numpy_fallback_with_same_results():
    fast = _run_with_flag("0").split(" ", 1)
    slow = _run_with_flag("1").split(" ", 1)
    assert fast[0] == "True" and slow[0] == "False"
    assert fast[1] == slow[1]
