"""Hot inner loops: approximate substring search and periodic-run scanning.

Each kernel exists twice: a numba version (``*_nb``) written as plain loops and
a vectorised numpy version (``*_np``). The public names dispatch to one or the
other depending on :data:`ocrunit._jit.USE_NUMBA`. Inputs are integer code
arrays (Unicode code points or interned token ids), never Python strings.
"""
from __future__ import annotations

import numpy as np

from ._jit import USE_NUMBA, njit

__all__ = [
    "start_costs",
    "prefix_costs",
    "first_periodic_run",
    "encode",
    "start_costs_nb",
    "start_costs_np",
    "prefix_costs_nb",
    "prefix_costs_np",
    "first_periodic_run_nb",
    "first_periodic_run_np",
]


def encode(s: str) -> np.ndarray:
    """Code points of ``s`` as an int32 array."""
    return np.frombuffer(s.encode("utf-32-le"), dtype="<u4").astype(np.int32)


# --------------------------------------------------------------------------
# start_costs: for every start s, min edit distance of pat to text[s:e], e >= s
# --------------------------------------------------------------------------


@njit
def start_costs_nb(text, pat):
    n = text.shape[0]
    m = pat.shape[0]
    # Sellers DP on the reversed strings: a free start in the reversed text is
    # a free end in the original one.
    prev = np.zeros(n + 1, dtype=np.int32)
    cur = np.zeros(n + 1, dtype=np.int32)
    for i in range(1, m + 1):
        pc = pat[m - i]
        cur[0] = i
        for j in range(1, n + 1):
            sub = prev[j - 1] + (0 if text[n - j] == pc else 1)
            dele = prev[j] + 1
            ins = cur[j - 1] + 1
            best = sub
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    out = np.empty(n + 1, dtype=np.int32)
    for j in range(n + 1):
        out[n - j] = prev[j]
    return out


def start_costs_np(text: np.ndarray, pat: np.ndarray) -> np.ndarray:
    n = text.shape[0]
    m = pat.shape[0]
    rtext = text[::-1]
    ramp = np.arange(n + 1, dtype=np.int64)
    prev = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, m + 1):
        pc = pat[m - i]
        cand = np.empty(n + 1, dtype=np.int64)
        cand[0] = i
        cand[1:] = np.minimum(prev[:-1] + (rtext != pc), prev[1:] + 1)
        # horizontal (insertion) chain: D[j] = min_t<=j cand[t] + (j - t)
        prev = np.minimum.accumulate(cand - ramp) + ramp
    return prev[::-1].astype(np.int32)


# --------------------------------------------------------------------------
# prefix_costs: edit distance of pat to every prefix of seg
# --------------------------------------------------------------------------


@njit
def prefix_costs_nb(seg, pat):
    n = seg.shape[0]
    m = pat.shape[0]
    prev = np.empty(n + 1, dtype=np.int32)
    cur = np.empty(n + 1, dtype=np.int32)
    for j in range(n + 1):
        prev[j] = j
    for i in range(1, m + 1):
        pc = pat[i - 1]
        cur[0] = i
        for j in range(1, n + 1):
            sub = prev[j - 1] + (0 if seg[j - 1] == pc else 1)
            dele = prev[j] + 1
            ins = cur[j - 1] + 1
            best = sub
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return prev.copy()


def prefix_costs_np(seg: np.ndarray, pat: np.ndarray) -> np.ndarray:
    n = seg.shape[0]
    ramp = np.arange(n + 1, dtype=np.int64)
    prev = ramp.copy()
    for i, pc in enumerate(pat, start=1):
        cand = np.empty(n + 1, dtype=np.int64)
        cand[0] = i
        cand[1:] = np.minimum(prev[:-1] + (seg != pc), prev[1:] + 1)
        prev = np.minimum.accumulate(cand - ramp) + ramp
    return prev.astype(np.int32)


# --------------------------------------------------------------------------
# first_periodic_run: earliest n-gram repeated >= min_repeats times in a row
# --------------------------------------------------------------------------


@njit
def first_periodic_run_nb(tokens, n_min, n_max, min_repeats):
    L = tokens.shape[0]
    for n in range(n_min, n_max + 1):
        need = n * (min_repeats - 1)
        if need + n > L:
            break
        run = 0
        for i in range(L - n):
            if tokens[i] == tokens[i + n]:
                run += 1
                if run == need:
                    start = i - run + 1
                    j = i + 1
                    while j < L - n and tokens[j] == tokens[j + n]:
                        run += 1
                        j += 1
                    return n, start, (run + n) // n
            else:
                run = 0
    return -1, -1, 0


def first_periodic_run_np(tokens: np.ndarray, n_min: int, n_max: int, min_repeats: int):
    L = tokens.shape[0]
    for n in range(n_min, n_max + 1):
        need = n * (min_repeats - 1)
        if need + n > L:
            break
        eq = np.concatenate(([False], tokens[:-n] == tokens[n:], [False])).astype(np.int8)
        edges = np.diff(eq)
        starts = np.flatnonzero(edges == 1)
        ends = np.flatnonzero(edges == -1)
        lengths = ends - starts
        hits = np.flatnonzero(lengths >= need)
        if hits.size:
            k = hits[0]
            return n, int(starts[k]), int((lengths[k] + n) // n)
    return -1, -1, 0


if USE_NUMBA:
    start_costs = start_costs_nb
    prefix_costs = prefix_costs_nb
    first_periodic_run = first_periodic_run_nb
else:
    start_costs = start_costs_np
    prefix_costs = prefix_costs_np
    first_periodic_run = first_periodic_run_np
