"""Text normalisation and anchored fuzzy matching shared by the text checks."""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from . import kernels

_CHAR_MAP = {
    "\u2018": "'",
    "\u2019": "'",
    "\u201c": '"',
    "\u201d": '"',
    "\u2013": "-",
    "\u2014": "-",
}
_SOFT_HYPHEN = "\u00ad"


@dataclass(frozen=True)
class NormalizedText:
    text: str
    # offset_map[i] is the index in the raw input that produced text[i]
    offset_map: Tuple[int, ...]

    def __str__(self) -> str:
        return self.text


def _composed_clusters(raw: str):
    """Yield (raw_start, nfc_text) for runs that NFC may merge together."""
    start = 0
    buf = ""
    for i, ch in enumerate(raw):
        if ch == _SOFT_HYPHEN:
            # dropped before composition so that "a<SHY><acute>" composes like "a<acute>"
            continue
        if buf and unicodedata.combining(ch) == 0:
            # a starter can still compose with what precedes it (Hangul, some Indic vowels)
            tail = unicodedata.normalize("NFC", buf)[-1]
            if len(unicodedata.normalize("NFC", tail + ch)) == 2:
                yield start, unicodedata.normalize("NFC", buf)
                start, buf = i, ""
        if not buf:
            start = i
        buf += ch
    if buf:
        yield start, unicodedata.normalize("NFC", buf)


def normalize(raw: str) -> NormalizedText:
    """NFC, drop soft hyphens, ASCII-fy typographic quotes/dashes, collapse whitespace, trim."""
    out = []
    offsets = []
    pending_space = -1
    for start, cluster in _composed_clusters(raw):
        for ch in cluster:
            if ch == _SOFT_HYPHEN:
                continue
            if ch.isspace():
                if pending_space < 0:
                    pending_space = start
                continue
            if pending_space >= 0:
                if out:
                    out.append(" ")
                    offsets.append(pending_space)
                pending_space = -1
            out.append(_CHAR_MAP.get(ch, ch))
            offsets.append(start)
    return NormalizedText("".join(out), tuple(offsets))


def normalize_str(raw: str) -> str:
    return normalize(raw).text


# Markdown stripping -------------------------------------------------------

_MATH_SPAN = re.compile(r"\$\$.+?\$\$|\\\[.+?\\\]|\\\(.+?\\\)|(?<![\\$])\$[^$\n]+?\$", re.S)
_HEADING = re.compile(r"^[ \t]{0,3}#{1,6}(?:[ \t]+|$)(.*?)(?:[ \t]+#+[ \t]*)?$", re.M)
_BLOCKQUOTE = re.compile(r"^[ \t]{0,3}(?:>[ \t]?)+", re.M)
_LINK = re.compile(r"!?\[([^\]\n]*)\]\([^)\n]*\)")
_CODE = re.compile(r"(`+)(.+?)\1", re.S)
_STRONG = re.compile(r"(\*\*|__)(?=\S)(.+?)(?<=\S)\1")
_EM_STAR = re.compile(r"(?<![\w*])\*(?=[^\s*])(.+?)(?<=[^\s*])\*(?![\w*])")
_EM_UNDER = re.compile(r"(?<![\w_])_(?=[^\s_])(.+?)(?<=[^\s_])_(?![\w_])")


def _strip_plain(text: str) -> str:
    text = _HEADING.sub(r"\1", text)
    text = _BLOCKQUOTE.sub("", text)
    text = _LINK.sub(r"\1", text)
    text = _CODE.sub(lambda m: m.group(2).strip(), text)
    for _ in range(3):  # nested emphasis, e.g. ***x***
        new = _STRONG.sub(r"\2", text)
        new = _EM_STAR.sub(r"\1", new)
        new = _EM_UNDER.sub(r"\1", new)
        if new == text:
            break
        text = new
    return text


def strip_markdown(body: str) -> str:
    """Remove Markdown inline/block markup, leaving table pipes and math spans untouched."""
    pieces = []
    pos = 0
    for m in _MATH_SPAN.finditer(body):
        pieces.append(_strip_plain(body[pos : m.start()]))
        pieces.append(m.group(0))
        pos = m.end()
    pieces.append(_strip_plain(body[pos:]))
    return "".join(pieces)


def visible_text(body: str) -> NormalizedText:
    """What text checks search: stripped Markdown, then normalised."""
    return normalize(strip_markdown(body))


# Matching ------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _encoded(s: str) -> np.ndarray:
    return kernels.encode(s)


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance over code points."""
    if a == b:
        return 0
    if not a or not b:
        return len(a) + len(b)
    return int(kernels.prefix_costs(_encoded(b), _encoded(a))[-1])


def _pigeonhole_possible(hay: str, pat: str, k: int) -> bool:
    # with <= k edits, at least one of k + 1 disjoint pattern pieces survives verbatim
    m = len(pat)
    if m <= k:
        return True
    bounds = [m * i // (k + 1) for i in range(k + 2)]
    return any(pat[bounds[i] : bounds[i + 1]] in hay for i in range(k + 1))


def find_anchor(
    haystack: NormalizedText | str, anchor: str, max_diffs: int = 0
) -> Optional[Tuple[int, int]]:
    """Leftmost window of ``haystack`` within ``max_diffs`` edits of ``normalize(anchor)``.

    Windows are ranked by start offset, then by distance, then by end offset.
    Returns ``(start, end)`` in normalized coordinates, or None.
    """
    hay = haystack.text if isinstance(haystack, NormalizedText) else haystack
    pat = normalize(anchor).text
    if not pat:
        raise ValueError("anchor is empty after normalization")
    if max_diffs <= 0:
        i = hay.find(pat)
        return None if i < 0 else (i, i + len(pat))
    if not hay or not _pigeonhole_possible(hay, pat, max_diffs):
        return None
    htext = _encoded(hay)
    ptext = _encoded(pat)
    costs = kernels.start_costs(htext, ptext)
    ok = np.flatnonzero(costs[: len(hay)] <= max_diffs)
    if ok.size == 0:
        return None
    s = int(ok[0])
    seg = htext[s : s + len(pat) + max_diffs]
    ends = kernels.prefix_costs(seg, ptext)
    ends[0] = np.iinfo(np.int32).max  # windows are nonempty
    e = int(np.argmin(ends))  # argmin returns the first (shortest) minimiser
    return s, s + e


def count_occurrences(haystack: str, needle: str) -> int:
    """Exact occurrences of ``needle`` in ``haystack``, overlapping ones included."""
    count = 0
    i = haystack.find(needle)
    while i >= 0:
        count += 1
        i = haystack.find(needle, i + 1)
    return count
