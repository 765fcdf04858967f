"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--text-len 20000]

The kernel rows call both implementations in-process. The ``find_anchor`` rows run
in subprocesses with ``OCRUNIT_DISABLE_NUMBA`` set to 0 and 1, so they measure the
whole search path under each backend. Compile time is excluded by a warm-up call.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from ocrunit.kernels import (
    encode,
    first_periodic_run_nb,
    first_periodic_run_np,
    prefix_costs_nb,
    prefix_costs_np,
    start_costs_nb,
    start_costs_np,
)

ANCHOR_SNIPPET = r"""
import json, random, sys, timeit
from ocrunit.textnorm import find_anchor
rng = random.Random(0)
hay = "".join(rng.choice("abcdefgh ") for _ in range({text_len}))
pats = [hay[i:i + 24].replace("a", "b", 1) for i in rng.sample(range({text_len} - 24), 50)]
find_anchor(hay, pats[0], 2)
best = min(timeit.repeat(lambda: [find_anchor(hay, p, 2) for p in pats], number=1, repeat={repeat}))
print(json.dumps(best / len(pats)))
"""


def best_time(fn, repeat):
    fn()  # warm-up, triggers JIT compilation
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def anchor_time(disable_numba, text_len, repeat):
    env = dict(os.environ, OCRUNIT_DISABLE_NUMBA="1" if disable_numba else "0")
    code = ANCHOR_SNIPPET.format(text_len=text_len, repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--text-len", type=int, default=20000, help="haystack length in characters")
    parser.add_argument("--tokens", type=int, default=200000, help="token count for the periodic-run scan")
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    text = encode("".join(rng.choice(list("abcdefgh ")).item() for _ in range(args.text_len)))
    pat = text[1000:1024].copy()
    seg = text[:64].copy()
    # random tokens with a planted repeat near the end, so the scan covers most of the array
    tokens = rng.integers(0, 50, size=args.tokens).astype(np.int64)
    tokens[-40:] = np.tile(tokens[-40:-36], 10)

    rows = []
    for name, nb, np_ in [
        ("start_costs", lambda: start_costs_nb(text, pat), lambda: start_costs_np(text, pat)),
        ("prefix_costs", lambda: prefix_costs_nb(seg, pat), lambda: prefix_costs_np(seg, pat)),
        ("first_periodic_run", lambda: first_periodic_run_nb(tokens, 1, 8, 4),
         lambda: first_periodic_run_np(tokens, 1, 8, 4)),
    ]:
        rows.append((name, best_time(nb, args.repeat), best_time(np_, args.repeat)))
    rows.append(("find_anchor (per query)", anchor_time(False, args.text_len, args.repeat),
                 anchor_time(True, args.text_len, args.repeat)))

    if args.json:
        print(json.dumps([{"kernel": n, "numba_s": a, "numpy_s": b, "speedup": b / a} for n, a, b in rows], indent=2))
        return 0
    print(f"{'kernel':<26} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for name, a, b in rows:
        print(f"{name:<26} {a * 1e3:10.3f} {b * 1e3:10.3f} {b / a:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
