"""Deterministic box layout for parsed math.

Units are ems at scale 1. Every glyph gets a fixed advance (``GLYPH_WIDTH``,
default 1.0) times its scale; vertical placement follows a simplified TeX
box model (ascent/descent per box, fraction axis, script shifts).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from .latex import Delimited, Frac, Node, Row, Space, Sqrt, Sub, SubSup, Sup, Symbol

SUP_SHIFT = 0.45
SUB_SHIFT = -0.25
SCRIPT_SCALE = 0.7
INDEX_SCALE = 0.6
INDEX_SHIFT = 0.5
AXIS = 0.25
FRAC_GAP = 0.15
FRAC_PAD = 0.1
ASCENT = 0.7
DESCENT = 0.2
RADICAL = "\u221a"
FRAC_BAR = "\u2500"

GLYPH_WIDTH = {
    ",": 0.4, ".": 0.4, ";": 0.4, ":": 0.4, "!": 0.4, "'": 0.3, "′": 0.3,
    "(": 0.5, ")": 0.5, "[": 0.5, "]": 0.5, "{": 0.5, "}": 0.5, "|": 0.3,
    "i": 0.5, "j": 0.5, "l": 0.5,
}


@dataclass(frozen=True)
class GlyphBox:
    glyph: str
    x: float
    y: float
    scale: float


@dataclass(frozen=True)
class MathBoxTree:
    """Glyph boxes sorted by (x, y); x normalised into [0, 1], y in ems off the baseline."""

    boxes: Tuple[GlyphBox, ...]
    # total advance in ems before normalisation
    width: float

    def glyphs(self) -> List[str]:
        return [b.glyph for b in self.boxes]


@dataclass
class _Laid:
    boxes: List[GlyphBox]
    width: float
    ascent: float
    descent: float


def _glyph(ch: str, s: float) -> _Laid:
    return _Laid([GlyphBox(ch, 0.0, 0.0, s)], GLYPH_WIDTH.get(ch, 1.0) * s, ASCENT * s, DESCENT * s)


def _shift(boxes: List[GlyphBox], dx: float, dy: float) -> List[GlyphBox]:
    return [GlyphBox(b.glyph, b.x + dx, b.y + dy, b.scale) for b in boxes]


def _hcat(parts: List[_Laid]) -> _Laid:
    boxes: List[GlyphBox] = []
    x = 0.0
    asc = desc = 0.0
    for p in parts:
        boxes.extend(_shift(p.boxes, x, 0.0))
        x += p.width
        asc = max(asc, p.ascent)
        desc = max(desc, p.descent)
    return _Laid(boxes, x, asc, desc)


def _lay(node: Node, s: float) -> _Laid:
    if isinstance(node, Symbol):
        return _glyph(node.glyph, s)
    if isinstance(node, Space):
        return _Laid([], 0.0, 0.0, 0.0)
    if isinstance(node, Row):
        return _hcat([_lay(c, s) for c in node.children])
    if isinstance(node, (Sup, Sub, SubSup)):
        base = _lay(node.base, s)
        ss = s * SCRIPT_SCALE
        boxes = list(base.boxes)
        width = base.width
        asc, desc = base.ascent, base.descent
        if isinstance(node, (Sup, SubSup)):
            exp = _lay(node.exp, ss)
            dy = SUP_SHIFT * s
            boxes.extend(_shift(exp.boxes, base.width, dy))
            width = max(width, base.width + exp.width)
            asc = max(asc, dy + exp.ascent)
        if isinstance(node, (Sub, SubSup)):
            sub = _lay(node.sub, ss)
            dy = SUB_SHIFT * s
            boxes.extend(_shift(sub.boxes, base.width, dy))
            width = max(width, base.width + sub.width)
            desc = max(desc, sub.descent - dy)
        return _Laid(boxes, width, asc, desc)
    if isinstance(node, Frac):
        num = _lay(node.num, s)
        den = _lay(node.den, s)
        inner = max(num.width, den.width)
        width = inner + 2 * FRAC_PAD * s
        axis = AXIS * s
        gap = FRAC_GAP * s
        num_y = axis + gap + num.descent
        den_y = axis - gap - den.ascent
        boxes = [GlyphBox(FRAC_BAR, 0.0, axis, s)]
        boxes.extend(_shift(num.boxes, (width - num.width) / 2, num_y))
        boxes.extend(_shift(den.boxes, (width - den.width) / 2, den_y))
        return _Laid(boxes, width, num_y + num.ascent, -(den_y) + den.descent)
    if isinstance(node, Sqrt):
        parts_boxes: List[GlyphBox] = []
        x = 0.0
        asc = 0.0
        if node.index is not None:
            idx = _lay(node.index, s * INDEX_SCALE)
            parts_boxes.extend(_shift(idx.boxes, 0.0, INDEX_SHIFT * s))
            x = idx.width
            asc = INDEX_SHIFT * s + idx.ascent
        rad = _glyph(RADICAL, s)
        parts_boxes.extend(_shift(rad.boxes, x, 0.0))
        x += rad.width
        body = _lay(node.radicand, s)
        parts_boxes.extend(_shift(body.boxes, x, 0.0))
        return _Laid(parts_boxes, x + body.width, max(asc, rad.ascent, body.ascent), max(rad.descent, body.descent))
    if isinstance(node, Delimited):
        parts = []
        if node.left:
            parts.append(_glyph(node.left, s))
        parts.append(_lay(node.body, s))
        if node.right:
            parts.append(_glyph(node.right, s))
        return _hcat(parts)
    raise TypeError(f"not a math node: {node!r}")


def layout(ast: Node) -> MathBoxTree:
    laid = _lay(ast, 1.0)
    width = laid.width
    norm = width if width > 0 else 1.0
    boxes = sorted(
        (GlyphBox(b.glyph, b.x / norm, b.y, b.scale) for b in laid.boxes),
        key=lambda b: (b.x, b.y, b.glyph),
    )
    return MathBoxTree(tuple(boxes), width)
