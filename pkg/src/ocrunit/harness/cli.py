"""Command line entry point: ``ocrunit <subcommand> ...``.

Exit codes: 0 success, 1 validation error (including bad flags), 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; we reserve 2 for I/O errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        print(text)


def _reward_config(args):
    from ..reward import RewardConfig

    return RewardConfig(w_tests=args.w_tests, w_eos=args.w_eos, w_meta=args.w_meta)


def cmd_score(args) -> int:
    from ..core import load_test_store_file
    from .bench import score_run

    store = load_test_store_file(args.tests)
    if not os.path.isdir(args.candidates):
        raise FileNotFoundError(f"candidates directory not found: {args.candidates}")
    report = score_run(store, args.candidates, bootstrap_B=args.bootstrap, seed=args.seed)
    _emit(args, report.to_json(), report.format_table())
    return EXIT_OK


def cmd_gen_tests(args) -> int:
    from ..core import dump_tests
    from ..testgen import GenConfig, GroundTruthPage, PageRejected, generate_tests, page_seed, render_ground_truth

    cfg = GenConfig.from_pairs(args.config or [])
    if not os.path.isdir(args.html_dir):
        raise FileNotFoundError(f"html directory not found: {args.html_dir}")
    files = sorted(f for f in os.listdir(args.html_dir) if f.endswith(".html"))
    all_tests, rejected = [], []
    if args.render_dir:
        os.makedirs(args.render_dir, exist_ok=True)
    for name in files:
        doc_id = name[: -len(".html")]
        with open(os.path.join(args.html_dir, name), encoding="utf-8") as fh:
            page = GroundTruthPage(doc_id, fh.read(), page_seed(args.seed, doc_id))
        try:
            tests = generate_tests(page, cfg)
        except PageRejected as exc:
            rejected.append({"doc_id": doc_id, "reason": str(exc)})
            continue
        all_tests.extend(tests)
        if args.render_dir:
            with open(os.path.join(args.render_dir, doc_id + ".md"), "w", encoding="utf-8") as fh:
                fh.write(render_ground_truth(page))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(dump_tests(all_tests))
    summary = {"pages": len(files), "tests": len(all_tests), "rejected": rejected, "out": args.out}
    text = f"wrote {len(all_tests)} tests for {len(files) - len(rejected)} page(s) to {args.out}"
    for r in rejected:
        text += f"\nrejected {r['doc_id']}: {r['reason']}"
    _emit(args, summary, text)
    return EXIT_OK


def cmd_reward(args) -> int:
    from ..core import CandidatePage, load_test_store_file
    from ..reward import compute_reward

    store = load_test_store_file(args.tests)
    if args.doc not in store:
        raise ValueError(f"unknown doc {args.doc!r}")
    with open(args.file, encoding="utf-8") as fh:
        page = CandidatePage.from_text(args.doc, fh.read(), finished=args.finished)
    score = compute_reward(page, store[args.doc], _reward_config(args))
    lines = [
        f"doc {score.doc_id}: composite {score.composite:.4f}",
        f"pass_rate {score.pass_rate:.2f}  eos {score.eos_reward:.0f}  metadata {score.metadata_reward:.2f}",
    ]
    for o in score.outcomes:
        lines.append(f"  {'PASS' if o.passed else 'FAIL'}  {o.test_id}" + (f"  ({o.detail})" if o.detail else ""))
    _emit(args, score.to_json(with_outcomes=True), "\n".join(lines))
    return EXIT_OK


def cmd_serve(args) -> int:
    from ..core import load_test_store_file
    from .service import serve_rewards

    store = load_test_store_file(args.tests)
    serve_rewards(store, _reward_config(args), host=args.host, port=args.port, max_body_bytes=args.max_body_bytes)
    return EXIT_OK


def cmd_soup(args) -> int:
    from ..tensormap import read_tensormap, soup, write_tensormap

    if len(args.inputs) < 2:
        raise ValueError("soup needs at least two input files")
    merged = soup([read_tensormap(p) for p in args.inputs])
    write_tensormap(merged, args.out)
    summary = {"out": args.out, "inputs": args.inputs, "tensors": {k: list(v.shape) for k, v in merged.items()}}
    _emit(args, summary, f"averaged {len(args.inputs)} checkpoints ({len(merged)} tensors) into {args.out}")
    return EXIT_OK


def cmd_simulate_temp(args) -> int:
    from ..tempctl import TempPolicy, expected_attempts, parse_p_loop, simulate_retry_rate

    policy = TempPolicy(max_attempts=args.max_attempts)
    p_loop = parse_p_loop(args.p_loop)
    mean, exhausted = simulate_retry_rate(policy, p_loop, args.trials, args.seed)
    exp_mean, exp_exh = expected_attempts(policy, p_loop)
    payload = {"mean_attempts": mean, "exhaustion_rate": exhausted,
               "expected_mean_attempts": exp_mean, "expected_exhaustion_rate": exp_exh,
               "temperatures": policy.temperatures(), "trials": args.trials}
    text = (f"mean attempts per page: {mean:.4f} (expected {exp_mean:.4f})\n"
            f"exhaustion rate: {exhausted:.4f} (expected {exp_exh:.4f})")
    _emit(args, payload, text)
    return EXIT_OK


def _add_reward_weights(p) -> None:
    p.add_argument("--w-tests", type=float, default=1.0, help="weight of the unit-test pass rate")
    p.add_argument("--w-eos", type=float, default=0.1, help="weight of the EOS (finished) reward")
    p.add_argument("--w-meta", type=float, default=0.1, help="weight of the front-matter reward")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ocrunit", description="Unit-test based OCR verification and rewards.")
    parser.add_argument("-v", "--verbose", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--json", action="store_true", help="machine-readable JSON output")
        p.set_defaults(func=func)
        return p

    p = add("score", cmd_score, "Score a directory of candidate Markdown files against a test store.")
    p.add_argument("--tests", required=True, help="JSONL test store")
    p.add_argument("--candidates", required=True, help="directory of <doc_id>.md files")
    p.add_argument("--bootstrap", type=int, default=1000, help="bootstrap resamples (default 1000)")
    p.add_argument("--seed", type=int, default=0)

    p = add("gen-tests", cmd_gen_tests, "Generate unit tests from ground-truth HTML pages.")
    p.add_argument("--html-dir", required=True, help="directory of <doc_id>.html pages")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", nargs="*", metavar="KEY=VALUE", help="generator settings, e.g. presence_samples=6")
    p.add_argument("--render-dir", help="also write the ground-truth Markdown render of each page here")

    p = add("reward", cmd_reward, "Score a single candidate file and print its PageScore.")
    p.add_argument("--tests", required=True)
    p.add_argument("--doc", required=True, help="doc_id in the test store")
    p.add_argument("--file", required=True, help="candidate Markdown file")
    p.add_argument("--finished", action="store_true", help="generation ended with EOS")
    _add_reward_weights(p)

    p = add("serve", cmd_serve, "Run the HTTP reward service.")
    p.add_argument("--tests", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--max-body-bytes", type=int, default=16 * 1024 * 1024)
    _add_reward_weights(p)

    p = add("soup", cmd_soup, "Average several TMAP checkpoints elementwise.")
    p.add_argument("inputs", nargs="+", help="input .tmap files")
    p.add_argument("-o", "--out", required=True)

    p = add("simulate-temp", cmd_simulate_temp, "Monte-Carlo estimate of the temperature retry loop.")
    p.add_argument("--p-loop", required=True, help="'linear' (1 - t) or 'const:<v>'")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-attempts", type=int, default=8)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:  # StoreError, PayloadError, TensorMapError, LatexError subclass it
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
