"""Text presence/absence, reading order and the two baseline-robustness checks."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Optional, Tuple

import numpy as np
import regex

from . import kernels
from .core import PayloadError
from .textnorm import find_anchor, normalize_str, visible_text

Verdict = Tuple[bool, str]


def _anchor(value, name: str) -> str:
    if not isinstance(value, str) or not normalize_str(value):
        raise PayloadError(f"{name!r} must be a string that is nonempty after normalization")
    return value


def _int_field(row, name, default, lo):
    value = row.get(name, default)
    if not isinstance(value, int) or isinstance(value, bool) or value < lo:
        raise PayloadError(f"{name!r} must be an integer >= {lo}")
    return value


def _short(s: str, limit: int = 60) -> str:
    return s if len(s) <= limit else s[: limit - 3] + "..."


# presence / absence ----------------------------------------------------------


@dataclass(frozen=True)
class PresencePayload:
    anchor: str

    def __post_init__(self):
        _anchor(self.anchor, "text")

    @classmethod
    def from_json(cls, row) -> "PresencePayload":
        return cls(_anchor(row.get("text"), "text"))

    def to_json(self):
        return {"text": self.anchor}

    def check(self, body: str, max_diffs: int = 0) -> Verdict:
        return check_presence(body, self, max_diffs)


@dataclass(frozen=True)
class AbsencePayload:
    anchor: str

    def __post_init__(self):
        _anchor(self.anchor, "text")

    @classmethod
    def from_json(cls, row) -> "AbsencePayload":
        return cls(_anchor(row.get("text"), "text"))

    def to_json(self):
        return {"text": self.anchor}

    def check(self, body: str, max_diffs: int = 0) -> Verdict:
        return check_absence(body, self, max_diffs)


def check_presence(body: str, payload: PresencePayload, max_diffs: int = 0) -> Verdict:
    span = find_anchor(visible_text(body), payload.anchor, max_diffs)
    if span is None:
        return False, f"text not found: {_short(payload.anchor)!r}"
    return True, ""


def check_absence(body: str, payload: AbsencePayload, max_diffs: int = 0) -> Verdict:
    span = find_anchor(visible_text(body), payload.anchor, max_diffs)
    if span is not None:
        return False, f"forbidden text present at {span[0]}: {_short(payload.anchor)!r}"
    return True, ""


# reading order ------------------------------------------------------------


@dataclass(frozen=True)
class OrderPayload:
    before: str
    after: str
    forbidden_between: Tuple[str, ...] = ()

    def __post_init__(self):
        _anchor(self.before, "before")
        _anchor(self.after, "after")
        for f in self.forbidden_between:
            _anchor(f, "forbidden")
        if normalize_str(self.before) == normalize_str(self.after):
            raise PayloadError("'before' and 'after' must differ")

    @classmethod
    def from_json(cls, row) -> "OrderPayload":
        forbidden = row.get("forbidden") or []
        if not isinstance(forbidden, list):
            raise PayloadError("'forbidden' must be a list of strings")
        return cls(row.get("before"), row.get("after"), tuple(forbidden))

    def to_json(self):
        row = {"before": self.before, "after": self.after}
        if self.forbidden_between:
            row["forbidden"] = list(self.forbidden_between)
        return row

    def check(self, body: str, max_diffs: int = 0) -> Verdict:
        return check_order(body, self, max_diffs)


def check_order(body: str, payload: OrderPayload, max_diffs: int = 0) -> Verdict:
    text = visible_text(body).text
    first = find_anchor(text, payload.before, max_diffs)
    if first is None:
        return False, f"'before' text not found: {_short(payload.before)!r}"
    second = find_anchor(text, payload.after, max_diffs)
    if second is None:
        return False, f"'after' text not found: {_short(payload.after)!r}"
    if first[1] > second[0]:
        return False, "'after' text appears before 'before' text ends"
    gap = text[first[1] : second[0]]
    for forbidden in payload.forbidden_between:
        if find_anchor(gap, forbidden, max_diffs) is not None:
            return False, f"forbidden text between anchors: {_short(forbidden)!r}"
    return True, ""


# repeated n-grams ---------------------------------------------------------

_WORD = re.compile(r"\S+")


@dataclass(frozen=True)
class NgramRepeatPayload:
    n_min: int = 3
    n_max: int = 30
    min_repeats: int = 4
    unit: str = "word"

    def __post_init__(self):
        if self.n_min < 1 or self.n_max < self.n_min or self.min_repeats < 2:
            raise PayloadError("need 1 <= n_min <= n_max and min_repeats >= 2")
        if self.unit != "word":
            raise PayloadError(f"unsupported n-gram unit {self.unit!r}")

    @classmethod
    def from_json(cls, row) -> "NgramRepeatPayload":
        return cls(
            n_min=_int_field(row, "n_min", 3, 1),
            n_max=_int_field(row, "n_max", 30, 1),
            min_repeats=_int_field(row, "min_repeats", 4, 2),
            unit=row.get("unit", "word"),
        )

    def to_json(self):
        return {"n_min": self.n_min, "n_max": self.n_max, "min_repeats": self.min_repeats}

    def check(self, body: str, max_diffs: int = 0) -> Verdict:
        return check_ngram_repeat(body, self)


def word_tokens(body: str):
    return _WORD.findall(visible_text(body).text)


def intern_tokens(tokens) -> np.ndarray:
    ids = {}
    return np.fromiter((ids.setdefault(t, len(ids)) for t in tokens), dtype=np.int64, count=len(tokens))


def find_repetition(tokens, payload: NgramRepeatPayload) -> Optional[Tuple[int, int, int]]:
    """(n, start, repeats) of the first consecutive n-gram loop, or None."""
    n, start, reps = kernels.first_periodic_run(
        intern_tokens(tokens), payload.n_min, payload.n_max, payload.min_repeats
    )
    if n < 0:
        return None
    return int(n), int(start), int(reps)


def check_ngram_repeat(body: str, payload: NgramRepeatPayload) -> Verdict:
    tokens = word_tokens(body)
    hit = find_repetition(tokens, payload)
    if hit is None:
        return True, ""
    n, start, reps = hit
    gram = " ".join(tokens[start : start + n])
    return False, f"{n}-gram {_short(gram)!r} repeated {reps} times consecutively"


# script purity ----------------------------------------------------------------

_ALWAYS_OK = ("Common", "Inherited")

# scripts probed, in order, when naming a character's script
KNOWN_SCRIPTS = (
    "Latin", "Cyrillic", "Greek", "Han", "Hiragana", "Katakana", "Hangul", "Arabic",
    "Hebrew", "Devanagari", "Bengali", "Gurmukhi", "Gujarati", "Oriya", "Tamil", "Telugu",
    "Kannada", "Malayalam", "Sinhala", "Thai", "Lao", "Tibetan", "Myanmar", "Georgian",
    "Armenian", "Ethiopic", "Khmer", "Mongolian", "Syriac", "Thaana", "Cherokee",
    "Canadian_Aboriginal", "Bopomofo", "Yi", "Common", "Inherited",
)


@lru_cache(maxsize=None)
def _script_class(names: FrozenSet[str]):
    return regex.compile("[" + "".join(rf"\p{{Script={n}}}" for n in sorted(names)) + "]")


def valid_script_name(name: str) -> bool:
    try:
        regex.compile(rf"\p{{Script={name}}}")
    except regex.error:
        return False
    return True


@lru_cache(maxsize=65536)
def char_script(ch: str) -> str:
    for name in KNOWN_SCRIPTS:
        if _script_class(frozenset([name])).match(ch):
            return name
    return "Unknown"


@dataclass(frozen=True)
class ScriptPurityPayload:
    target_scripts: FrozenSet[str]
    max_foreign_fraction: float = 0.02

    def __post_init__(self):
        object.__setattr__(self, "target_scripts", frozenset(self.target_scripts))
        if not self.target_scripts:
            raise PayloadError("'scripts' must be nonempty")
        for name in self.target_scripts:
            if not isinstance(name, str) or not valid_script_name(name):
                raise PayloadError(f"unknown Unicode script {name!r}")
        if not 0.0 <= self.max_foreign_fraction <= 1.0:
            raise PayloadError("'max_foreign_fraction' must be in [0, 1]")

    @classmethod
    def from_json(cls, row) -> "ScriptPurityPayload":
        scripts = row.get("scripts")
        if isinstance(scripts, str):
            scripts = [scripts]
        if not isinstance(scripts, list):
            raise PayloadError("'scripts' must be a list of script names")
        frac = row.get("max_foreign_fraction", 0.02)
        if isinstance(frac, bool) or not isinstance(frac, (int, float)):
            raise PayloadError("'max_foreign_fraction' must be a number")
        return cls(frozenset(scripts), float(frac))

    def to_json(self):
        return {"scripts": sorted(self.target_scripts), "max_foreign_fraction": self.max_foreign_fraction}

    def check(self, body: str, max_diffs: int = 0) -> Verdict:
        return check_script_purity(body, self)


def foreign_fraction(body: str, target_scripts) -> Tuple[float, int, int]:
    """(fraction, foreign count, alphabetic count) over the alphabetic characters of body."""
    allowed = _script_class(frozenset(target_scripts) | frozenset(_ALWAYS_OK))
    total = foreign = 0
    for ch in body:
        if not ch.isalpha():
            continue
        total += 1
        if not allowed.match(ch):
            foreign += 1
    return (foreign / total if total else 0.0), foreign, total


def script_histogram(body: str) -> Counter:
    return Counter(char_script(ch) for ch in body if ch.isalpha())


def check_script_purity(body: str, payload: ScriptPurityPayload) -> Verdict:
    frac, foreign, total = foreign_fraction(body, payload.target_scripts)
    if frac <= payload.max_foreign_fraction:
        return True, ""
    return False, (
        f"{foreign}/{total} alphabetic characters ({frac:.4f}) outside "
        f"{sorted(payload.target_scripts)}; limit {payload.max_foreign_fraction}"
    )
