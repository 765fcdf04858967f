"""Retry policy that raises sampling temperature after degenerate generations."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, FrozenSet, List, Optional, Tuple

import numpy as np

from .core import CandidatePage
from .reward import DEFAULT_META_KEYS, parse_front_matter

log = logging.getLogger(__name__)

MISSING_EOS = "missing_eos"
INVALID_FRONT_MATTER = "invalid_front_matter"
EMPTY_OUTPUT = "empty_output"
RETRY_CONDITIONS = frozenset({MISSING_EOS, INVALID_FRONT_MATTER, EMPTY_OUTPUT})

ACCEPTED = "accepted"
RETRY = "retry"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class TempPolicy:
    start: float = 0.1
    step: float = 0.1
    max_temp: float = 0.8
    max_attempts: int = 8
    retry_conditions: FrozenSet[str] = frozenset({MISSING_EOS})

    def __post_init__(self):
        object.__setattr__(self, "retry_conditions", frozenset(self.retry_conditions))
        if not 0 < self.start <= self.max_temp:
            raise ValueError("need 0 < start <= max_temp")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        unknown = self.retry_conditions - RETRY_CONDITIONS
        if unknown:
            raise ValueError(f"unknown retry conditions {sorted(unknown)}")

    def temperatures(self) -> List[float]:
        return [next_temperature(self, i) for i in range(self.max_attempts)]


@dataclass(frozen=True)
class AttemptRecord:
    attempt_index: int
    temperature: float
    outcome: str  # accepted | retry | exhausted
    reason: str = ""


@dataclass(frozen=True)
class RetryResult:
    page: Optional[CandidatePage]
    exhausted: bool
    attempts: Tuple[AttemptRecord, ...]


def next_temperature(policy: TempPolicy, failures_so_far: int) -> float:
    if failures_so_far < 0:
        raise ValueError("failures_so_far must be >= 0")
    # rounding keeps the ladder on exact decimals (0.1 + 0.1 * 2 != 0.3 in binary)
    return round(min(policy.start + policy.step * failures_so_far, policy.max_temp), 10)


def failure_reason(page: Optional[CandidatePage], conditions) -> Optional[str]:
    """First retry condition the page violates, or None if it is acceptable."""
    if page is None or not page.body.strip():
        if EMPTY_OUTPUT in conditions:
            return EMPTY_OUTPUT
    if page is not None and MISSING_EOS in conditions and not page.finished:
        return MISSING_EOS
    if page is not None and INVALID_FRONT_MATTER in conditions:
        if parse_front_matter(page.front_matter).fraction_valid(DEFAULT_META_KEYS) < 1.0:
            return INVALID_FRONT_MATTER
    return None


def run_with_retries(policy: TempPolicy, generator: Callable[[float], CandidatePage]) -> RetryResult:
    """Call ``generator`` with rising temperatures until a page passes every retry condition.

    After ``max_attempts`` failures the last page is returned with ``exhausted=True`` so the
    reward (not this loop) decides the penalty. A generator that raises counts as empty output.
    """
    records: List[AttemptRecord] = []
    page: Optional[CandidatePage] = None
    for attempt in range(policy.max_attempts):
        temp = next_temperature(policy, attempt)
        try:
            page = generator(temp)
        except Exception as exc:  # noqa: BLE001 - the inference seam is untrusted
            log.warning("generator failed at temperature %.2f: %r", temp, exc)
            page = None
            reason = EMPTY_OUTPUT
            retry = EMPTY_OUTPUT in policy.retry_conditions
        else:
            reason = failure_reason(page, policy.retry_conditions)
            retry = reason is not None
        if page is not None and not retry:
            records.append(AttemptRecord(attempt, temp, ACCEPTED))
            return RetryResult(page, False, tuple(records))
        if not retry or attempt == policy.max_attempts - 1:
            records.append(AttemptRecord(attempt, temp, EXHAUSTED, reason or ""))
            return RetryResult(page, True, tuple(records))
        records.append(AttemptRecord(attempt, temp, RETRY, reason))
    raise AssertionError("unreachable")


def expected_attempts(policy: TempPolicy, p_loop: Callable[[float], float]) -> Tuple[float, float]:
    """Closed form (mean attempts, exhaustion probability) for independent attempts."""
    temps = policy.temperatures()
    mean = 0.0
    survive = 1.0
    for t in temps:
        mean += survive
        survive *= p_loop(t)
    return mean, survive


def simulate_retry_rate(
    policy: TempPolicy, p_loop: Callable[[float], float], trials: int, seed: int = 0
) -> Tuple[float, float]:
    """Monte-Carlo (mean attempts per page, exhaustion rate) when attempt i loops w.p. p_loop(t_i)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    temps = policy.temperatures()
    probs = np.array([p_loop(t) for t in temps], dtype=np.float64)
    if np.any((probs < 0) | (probs > 1)):
        raise ValueError("p_loop must return probabilities in [0, 1]")
    rng = np.random.default_rng(seed)
    loops = rng.random((trials, len(temps))) < probs
    ok = ~loops
    first_ok = np.where(ok.any(axis=1), ok.argmax(axis=1) + 1, len(temps))
    exhausted = ~ok.any(axis=1)
    return float(first_ok.mean()), float(exhausted.mean())


def parse_p_loop(spec: str) -> Callable[[float], float]:
    """``linear`` (1 - t) or ``const:<v>``."""
    if spec == "linear":
        return lambda t: min(1.0, max(0.0, 1.0 - t))
    if spec.startswith("const:"):
        v = float(spec.split(":", 1)[1])
        if not 0.0 <= v <= 1.0:
            raise ValueError("const probability must be in [0, 1]")
        return lambda t: v
    raise ValueError(f"unknown p-loop curve {spec!r} (use 'linear' or 'const:<v>')")
