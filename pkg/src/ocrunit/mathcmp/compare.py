"""Layout-based equivalence of a reference formula and candidate math blocks."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core import PayloadError
from .latex import LatexError, UnsupportedLatex, check_structure, fallback_tokens, parse_latex
from .layout import MathBoxTree, layout

DEFAULT_TOL = 0.08

_BLOCK = re.compile(
    r"\$\$(?P<dd>.+?)\$\$"
    r"|\\\[(?P<br>.+?)\\\]"
    r"|\\\((?P<pr>.+?)\\\)"
    r"|(?<![\\$])\$(?P<d>[^$]+?)(?<!\\)\$",
    re.S,
)


def extract_math_blocks(body: str) -> List[str]:
    """Sources of all ``$$..$$``, ``\\[..\\]``, ``\\(..\\)`` and ``$..$`` spans, in order."""
    return [next(g for g in m.groups() if g is not None).strip() for m in _BLOCK.finditer(body)]


def _labelled(tree: MathBoxTree):
    seen: Counter = Counter()
    labels = []
    for b in tree.boxes:
        labels.append((b.glyph, seen[b.glyph]))
        seen[b.glyph] += 1
    return labels


def _signs(values: np.ndarray, tol: float) -> np.ndarray:
    diff = values[:, None] - values[None, :]
    out = np.sign(diff)
    out[np.abs(diff) < tol] = 0
    return out


def layouts_equivalent(ref: MathBoxTree, cand: MathBoxTree, tol: float = DEFAULT_TOL) -> Tuple[bool, str]:
    """Same glyph multiset and the same pairwise left/right and above/below relations.

    Horizontal differences are compared in ems (normalised x times total width) so that
    tol stays meaningful for long expressions.
    """
    if Counter(ref.glyphs()) != Counter(cand.glyphs()):
        missing = Counter(ref.glyphs()) - Counter(cand.glyphs())
        extra = Counter(cand.glyphs()) - Counter(ref.glyphs())
        return False, f"glyphs differ (missing {sorted(missing.elements())}, extra {sorted(extra.elements())})"
    if not ref.boxes:
        return True, ""
    ref_labels = _labelled(ref)
    where = {lab: i for i, lab in enumerate(_labelled(cand))}
    order = [where[lab] for lab in ref_labels]
    rx = np.array([b.x * ref.width for b in ref.boxes])
    ry = np.array([b.y for b in ref.boxes])
    cx = np.array([cand.boxes[i].x * cand.width for i in order])
    cy = np.array([cand.boxes[i].y for i in order])
    for axis, a, b in (("horizontal", rx, cx), ("vertical", ry, cy)):
        bad = np.argwhere(_signs(a, tol) != _signs(b, tol))
        if bad.size:
            i, j = bad[0]
            return False, (
                f"{axis} relation of {ref_labels[i][0]!r} and {ref_labels[j][0]!r} differs"
            )
    return True, ""


def math_equivalent(reference: str, body: str, tol: float = DEFAULT_TOL) -> Tuple[bool, str]:
    """Pass iff some math block in ``body`` lays out like ``reference``."""
    blocks = extract_math_blocks(body)
    ref_tree: Optional[MathBoxTree] = None
    ref_tokens = None
    try:
        ref_tree = layout(parse_latex(reference))
    except UnsupportedLatex:
        ref_tokens = fallback_tokens(reference)
    except LatexError as exc:
        return False, f"reference parse error: {exc}"
    if not blocks:
        return False, "no math blocks found"
    last = "no matching math block"
    for src in blocks:
        if ref_tokens is not None:
            if fallback_tokens(src) == ref_tokens:
                return True, ""
            continue
        try:
            tree = layout(parse_latex(src))
        except LatexError:
            continue
        ok, why = layouts_equivalent(ref_tree, tree, tol)
        if ok:
            return True, ""
        last = why
    return False, f"none of {len(blocks)} math block(s) match: {last}"


@dataclass(frozen=True)
class MathPayload:
    math: str

    @classmethod
    def from_json(cls, row) -> "MathPayload":
        src = row.get("math")
        if not isinstance(src, str) or not src.strip():
            raise PayloadError("'math' must be a nonempty LaTeX string")
        try:
            check_structure(src)
        except LatexError as exc:
            raise PayloadError(f"reference LaTeX is malformed: {exc}") from None
        return cls(src)

    def to_json(self):
        return {"math": self.math}

    def check(self, body: str, max_diffs: int = 0):
        return math_equivalent(self.math, body)
