"""Unit-test based verification of OCR output: checkers, test generation, rewards and a benchmark harness."""
from .core import (
    CandidatePage,
    PageScore,
    PayloadError,
    StoreError,
    TestCase,
    TestKind,
    TestOutcome,
    TestStore,
    dump_tests,
    load_test_store,
    load_test_store_file,
    parse_test_case,
    run_tests,
)
from .reward import RewardConfig, compute_reward, parse_front_matter
from .textnorm import find_anchor, normalize, visible_text

__version__ = "0.1.0"
