"""Parser for the TeX math subset understood by the layout engine."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union


class LatexError(ValueError):
    """Malformed input: unbalanced braces, dangling scripts, unmatched delimiters."""


class UnsupportedLatex(LatexError):
    """Well-formed input that uses a construct outside the supported subset."""


# AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Symbol:
    glyph: str


@dataclass(frozen=True)
class Row:
    children: Tuple["Node", ...]


@dataclass(frozen=True)
class Frac:
    num: "Node"
    den: "Node"


@dataclass(frozen=True)
class Sqrt:
    radicand: "Node"
    index: Optional["Node"] = None


@dataclass(frozen=True)
class Sup:
    base: "Node"
    exp: "Node"


@dataclass(frozen=True)
class Sub:
    base: "Node"
    sub: "Node"


@dataclass(frozen=True)
class SubSup:
    base: "Node"
    sub: "Node"
    exp: "Node"


@dataclass(frozen=True)
class Delimited:
    left: str
    body: "Node"
    right: str


@dataclass(frozen=True)
class Space:
    pass


Node = Union[Symbol, Row, Frac, Sqrt, Sup, Sub, SubSup, Delimited, Space]

# macro tables -------------------------------------------------------------

GREEK = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ", "epsilon": "ϵ", "varepsilon": "ε",
    "zeta": "ζ", "eta": "η", "theta": "θ", "vartheta": "ϑ", "iota": "ι", "kappa": "κ",
    "lambda": "λ", "mu": "μ", "nu": "ν", "xi": "ξ", "omicron": "ο", "pi": "π", "varpi": "ϖ",
    "rho": "ρ", "varrho": "ϱ", "sigma": "σ", "varsigma": "ς", "tau": "τ", "upsilon": "υ",
    "phi": "ϕ", "varphi": "φ", "chi": "χ", "psi": "ψ", "omega": "ω",
    "Gamma": "Γ", "Delta": "Δ", "Theta": "Θ", "Lambda": "Λ", "Xi": "Ξ", "Pi": "Π",
    "Sigma": "Σ", "Upsilon": "Υ", "Phi": "Φ", "Psi": "Ψ", "Omega": "Ω",
}
OPERATORS = {
    "sum": "∑", "int": "∫", "iint": "∬", "oint": "∮", "prod": "∏", "infty": "∞",
    "pm": "±", "mp": "∓", "times": "×", "cdot": "⋅", "div": "÷", "ast": "∗",
    "leq": "≤", "le": "≤", "geq": "≥", "ge": "≥", "neq": "≠", "ne": "≠",
    "to": "→", "rightarrow": "→", "leftarrow": "←", "Rightarrow": "⇒", "Leftarrow": "⇐",
    "leftrightarrow": "↔", "Leftrightarrow": "⇔", "mapsto": "↦",
    "partial": "∂", "nabla": "∇", "approx": "≈", "equiv": "≡", "sim": "∼", "simeq": "≃",
    "propto": "∝", "in": "∈", "notin": "∉", "subset": "⊂", "subseteq": "⊆", "supset": "⊃",
    "cup": "∪", "cap": "∩", "forall": "∀", "exists": "∃", "emptyset": "∅", "ell": "ℓ",
    "prime": "′", "cdots": "⋯", "ldots": "…", "dots": "…", "circ": "∘", "mid": "∣",
    "langle": "⟨", "rangle": "⟩", "lbrace": "{", "rbrace": "}", "vert": "|", "|": "‖",
    "{": "{", "}": "}", "%": "%", "&": "&", "#": "#", "_": "_", "$": "$",
}
FUNCTIONS = {"sin", "cos", "tan", "log", "ln", "exp", "lim", "max", "min", "det", "sup", "inf"}
SPACES = {",", ";", ":", "!", " ", "quad", "qquad", "enspace", "thinspace"}
FRACS = {"frac", "dfrac", "tfrac"}
FONTS = {"mathbf", "mathrm", "mathit", "boldsymbol", "mathsf", "mathtt", "mathcal", "mathbb", "bm"}
STYLES = {"displaystyle", "textstyle", "scriptstyle", "limits", "nolimits"}
TEXTS = {"text", "textrm", "mbox", "textbf", "textit", "operatorname"}
BARE_DELIMS = set("()[]|")

_TOKEN = re.compile(r"\\([A-Za-z]+|.)|(\s+)|(.)", re.S)


@dataclass(frozen=True)
class Tok:
    kind: str  # "macro", "char", "space"
    value: str


def tokenize(src: str) -> List[Tok]:
    toks = []
    for m in _TOKEN.finditer(src):
        if m.group(1) is not None:
            toks.append(Tok("macro", m.group(1)))
        elif m.group(2) is not None:
            toks.append(Tok("space", m.group(2)))
        else:
            toks.append(Tok("char", m.group(3)))
    if src.endswith("\\"):
        raise LatexError("trailing backslash")
    return toks


def _simplify(children: List[Node]) -> Node:
    if len(children) == 1:
        return children[0]
    return Row(tuple(children))


class _Parser:
    def __init__(self, src: str):
        self.toks = [t for t in tokenize(src)]
        self.pos = 0

    # token helpers
    def peek(self, skip_space=True) -> Optional[Tok]:
        i = self.pos
        while skip_space and i < len(self.toks) and self.toks[i].kind == "space":
            i += 1
        return self.toks[i] if i < len(self.toks) else None

    def next(self) -> Optional[Tok]:
        while self.pos < len(self.toks) and self.toks[self.pos].kind == "space":
            self.pos += 1
        if self.pos >= len(self.toks):
            return None
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_char(self, ch: str, what: str):
        tok = self.next()
        if tok is None or tok != Tok("char", ch):
            raise LatexError(f"expected {ch!r} {what}")

    # grammar
    def parse(self) -> Node:
        node = self.row(stop=None)
        tok = self.peek()
        if tok is not None:
            if tok == Tok("char", "}"):
                raise LatexError("unbalanced braces: unexpected '}'")
            if tok == Tok("macro", "right"):
                raise LatexError("\\right without matching \\left")
            raise LatexError(f"unexpected token {tok.value!r}")
        return node

    def row(self, stop: Optional[str]) -> Node:
        children: List[Node] = []
        while True:
            tok = self.peek()
            if tok is None:
                if stop == "}":
                    raise LatexError("unbalanced braces: missing '}'")
                if stop == "right":
                    raise LatexError("unmatched \\left")
                if stop == "]":
                    raise LatexError("unterminated optional argument")
                break
            if tok == Tok("char", "}") or tok == Tok("macro", "right"):
                break
            if stop == "]" and tok == Tok("char", "]"):
                break
            children.extend(self.atom())
        return _simplify(children)

    def atom(self) -> List[Node]:
        tok = self.peek()
        if tok.kind == "char" and tok.value in "^_":
            self.next()
            raise LatexError(f"dangling {'superscript' if tok.value == '^' else 'subscript'}: no base")
        base = self.base()
        if base is None:
            return []
        sup = sub = None
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "char" and tok.value in "^_":
                self.next()
                which = "superscript" if tok.value == "^" else "subscript"
                arg = self.script_arg(which)
                if tok.value == "^":
                    if sup is not None:
                        raise LatexError("double superscript")
                    sup = arg
                else:
                    if sub is not None:
                        raise LatexError("double subscript")
                    sub = arg
            elif tok is not None and tok == Tok("char", "'"):
                self.next()
                sup = Symbol("′") if sup is None else Row((sup, Symbol("′")))
            else:
                break
        if sup is not None and sub is not None:
            return [SubSup(base, sub, sup)]
        if sup is not None:
            return [Sup(base, sup)]
        if sub is not None:
            return [Sub(base, sub)]
        return [base]

    def script_arg(self, which: str) -> Node:
        tok = self.peek()
        if tok is None or tok == Tok("char", "}") or (tok.kind == "char" and tok.value in "^_"):
            raise LatexError(f"dangling {which}")
        if tok == Tok("macro", "right"):
            raise LatexError(f"dangling {which}")
        node = self.base()
        if node is None:
            raise LatexError(f"dangling {which}")
        return node

    def group(self, what: str) -> Node:
        tok = self.next()
        if tok is None:
            raise LatexError(f"missing argument for {what}")
        if tok == Tok("char", "{"):
            node = self.row(stop="}")
            self.expect_char("}", f"to close {what}")
            return node
        if tok.kind == "char":
            if tok.value == "}":
                raise LatexError(f"missing argument for {what}")
            return Symbol(tok.value)
        self.pos -= 1
        node = self.base()
        if node is None:
            raise LatexError(f"missing argument for {what}")
        return node

    def delimiter(self, which: str) -> str:
        tok = self.next()
        if tok is None:
            raise LatexError(f"missing delimiter after \\{which}")
        if tok.kind == "char":
            return "" if tok.value == "." else tok.value
        if tok.value in OPERATORS:
            return OPERATORS[tok.value]
        raise UnsupportedLatex(f"unsupported delimiter \\{tok.value}")

    def base(self) -> Optional[Node]:
        tok = self.next()
        if tok is None:
            return None
        if tok.kind == "char":
            if tok.value == "{":
                node = self.row(stop="}")
                self.expect_char("}", "to close group")
                return node
            if tok.value == "}":
                raise LatexError("unbalanced braces: unexpected '}'")
            if tok.value == "&" or tok.value == "~":
                return Space() if tok.value == "~" else self._unsupported("&")
            return Symbol(tok.value)
        name = tok.value
        if name in FRACS:
            num = self.group(f"\\{name}")
            den = self.group(f"\\{name}")
            return Frac(num, den)
        if name == "sqrt":
            index = None
            nxt = self.peek()
            if nxt == Tok("char", "["):
                self.next()
                index = self.row(stop="]")
                self.expect_char("]", "to close \\sqrt index")
            return Sqrt(self.group("\\sqrt"), index)
        if name == "left":
            left = self.delimiter("left")
            body = self.row(stop="right")
            closing = self.next()
            if closing != Tok("macro", "right"):
                raise LatexError("unmatched \\left")
            right = self.delimiter("right")
            return Delimited(left, body, right)
        if name == "right":
            raise LatexError("\\right without matching \\left")
        if name in GREEK:
            return Symbol(GREEK[name])
        if name in OPERATORS:
            return Symbol(OPERATORS[name])
        if name in FUNCTIONS:
            return _simplify([Symbol(ch) for ch in name])
        if name in SPACES:
            return Space()
        if name in FONTS:
            return self.group(f"\\{name}")
        if name in STYLES:
            return Space()
        if name in TEXTS:
            return self.text_run(name)
        if name == "\\":
            return self._unsupported("\\\\ line break")
        return self._unsupported(f"\\{name}")

    def text_run(self, name: str) -> Node:
        tok = self.next()
        if tok != Tok("char", "{"):
            raise LatexError(f"\\{name} needs a braced argument")
        depth = 1
        chars: List[Node] = []
        while True:
            if self.pos >= len(self.toks):
                raise LatexError("unbalanced braces: missing '}'")
            t = self.toks[self.pos]
            self.pos += 1
            if t == Tok("char", "{"):
                depth += 1
                continue
            if t == Tok("char", "}"):
                depth -= 1
                if depth == 0:
                    break
                continue
            if t.kind == "space":
                continue
            text = t.value if t.kind == "char" else OPERATORS.get(t.value, t.value)
            chars.extend(Symbol(ch) for ch in text)
        return _simplify(chars) if chars else Row(())

    def _unsupported(self, what: str):
        raise UnsupportedLatex(f"unsupported construct {what}")


def parse_latex(src: str) -> Node:
    """Parse TeX math source into an AST; raises LatexError/UnsupportedLatex."""
    return _Parser(src).parse()


def check_structure(src: str) -> None:
    """Raise LatexError if ``src`` has unbalanced braces or \\left/\\right pairs.

    Unknown macros are tolerated here; this is the test-store load-time gate.
    """
    depth = 0
    lr = 0
    for tok in tokenize(src):
        if tok == Tok("char", "{"):
            depth += 1
        elif tok == Tok("char", "}"):
            depth -= 1
            if depth < 0:
                raise LatexError("unbalanced braces: unexpected '}'")
        elif tok == Tok("macro", "left"):
            lr += 1
        elif tok == Tok("macro", "right"):
            lr -= 1
            if lr < 0:
                raise LatexError("\\right without matching \\left")
    if depth:
        raise LatexError("unbalanced braces: missing '}'")
    if lr:
        raise LatexError("unmatched \\left")


def fallback_tokens(src: str) -> Tuple[str, ...]:
    """Whitespace- and brace-insensitive token sequence for out-of-subset sources."""
    out = []
    for tok in tokenize(src):
        if tok.kind == "space" or tok == Tok("char", "{") or tok == Tok("char", "}"):
            continue
        if tok.kind == "macro" and tok.value in SPACES:
            continue
        out.append(("\\" + tok.value) if tok.kind == "macro" else tok.value)
    return tuple(out)
