"""Math formula checks via a small TeX-subset layout engine."""
from .compare import DEFAULT_TOL, MathPayload, extract_math_blocks, layouts_equivalent, math_equivalent
from .latex import (
    Delimited,
    Frac,
    LatexError,
    Row,
    Space,
    Sqrt,
    Sub,
    SubSup,
    Sup,
    Symbol,
    UnsupportedLatex,
    fallback_tokens,
    parse_latex,
)
from .layout import GlyphBox, MathBoxTree, layout

__all__ = [
    "DEFAULT_TOL", "MathPayload", "extract_math_blocks", "layouts_equivalent", "math_equivalent",
    "Delimited", "Frac", "LatexError", "Row", "Space", "Sqrt", "Sub", "SubSup", "Sup", "Symbol",
    "UnsupportedLatex", "fallback_tokens", "parse_latex", "GlyphBox", "MathBoxTree", "layout",
]
