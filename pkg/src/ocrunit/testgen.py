"""Derive unit tests, and a reference Markdown rendering, from ground-truth HTML pages.

Header/footer text becomes absence tests, body sentences become presence and
reading-order tests, table cells become relation tests, marked-up formulas
become math tests, and every page gets one repetition and one script test.
Floating elements (figures, captions, asides) are moved after the main flow in
the reference rendering, since either side of a passage is a legal place for them.
"""
from __future__ import annotations

import html as htmllib
import logging
import random
import re
import zlib
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple

from ._html import Element, HtmlError, parse_html
from .checks import (
    AbsencePayload,
    NgramRepeatPayload,
    OrderPayload,
    PresencePayload,
    ScriptPurityPayload,
    check_ngram_repeat,
    foreign_fraction,
    script_histogram,
)
from .core import TestCase, TestKind
from .mathcmp.compare import MathPayload
from .mathcmp.latex import LatexError, UnsupportedLatex, fallback_tokens, parse_latex
from .tables import TableGrid, TableRelationPayload, grid_from_html
from .textnorm import count_occurrences, find_anchor, normalize_str, visible_text

log = logging.getLogger(__name__)

SKIP_TAGS = {"head", "script", "style", "title", "meta", "link", "noscript", "template"}
MARGIN_TAGS = {"header", "footer"}
FLOAT_TAGS = {"figure", "figcaption", "aside"}
FLOW_TAGS = {"body", "main", "article", "section"}
BLOCK_TAGS = {
    "p", "h1", "h2", "h3", "h4", "h5", "h6", "li", "blockquote", "pre", "dt", "dd",
    "address", "div", "ul", "ol", "dl", "nav", "center", "hr", "caption",
} | FLOW_TAGS
# characters that Markdown stripping may rewrite; anchors containing them are not emitted
MD_SPECIAL = set("*_`[]#>$\\|~<")
_MATH_IN_TEXT = re.compile(r"\$\$(.+?)\$\$|\\\[(.+?)\\\]|\\\((.+?)\\\)", re.S)
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9])")

CATEGORY = {
    TestKind.TEXT_ABSENCE: "headers_footers",
    TestKind.TEXT_PRESENCE: "text_present",
    TestKind.READING_ORDER: "reading_order",
    TestKind.TABLE_RELATION: "table",
    TestKind.MATH_RENDER: "math",
    TestKind.NGRAM_REPETITION: "baseline",
    TestKind.SCRIPT_PURITY: "baseline",
}


class PageRejected(ValueError):
    """The page cannot be used as ground truth."""


@dataclass(frozen=True)
class GroundTruthPage:
    doc_id: str
    html: str
    seed: int = 0


@dataclass(frozen=True)
class GenConfig:
    presence_samples: int = 4
    order_samples: int = 2
    table_cell_samples: int = 3
    min_anchor_words: int = 5
    max_anchor_words: int = 30

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive")
        if self.min_anchor_words > self.max_anchor_words:
            raise ValueError("min_anchor_words must be <= max_anchor_words")

    @classmethod
    def from_pairs(cls, pairs: Sequence[str]) -> "GenConfig":
        """Build from ``key=value`` strings."""
        known = {f.name for f in fields(cls)}
        values = {}
        for pair in pairs:
            key, sep, value = pair.partition("=")
            key = key.strip()
            if not sep or key not in known:
                raise ValueError(f"bad config entry {pair!r}; known keys: {sorted(known)}")
            values[key] = int(value)
        return cls(**values)


def page_seed(base_seed: int, doc_id: str) -> int:
    """Per-page seed, independent of processing order."""
    return (int(base_seed) * 1_000_003 + zlib.crc32(doc_id.encode("utf-8"))) & 0xFFFFFFFFFFFFFFFF


# HTML walking ---------------------------------------------------------------


def _math_source(el: Element) -> Optional[str]:
    for key in ("data-latex", "data-tex", "data-math", "alttext"):
        if el.attrs.get(key):
            return el.attrs[key]
    for ann in el.iter("annotation"):
        if "tex" in ann.attrs.get("encoding", ""):
            return ann.text()
    text = el.text().strip()
    m = _MATH_IN_TEXT.fullmatch(text)
    if m:
        return next(g for g in m.groups() if g is not None)
    return text or None


def _is_math(el: Element) -> bool:
    if el.tag == "math":
        return True
    if el.tag == "script" and "math/tex" in el.attrs.get("type", ""):
        return True
    return any(c in ("math", "katex", "katex-display", "math-display", "math-inline") for c in el.classes)


def _is_display(el: Element) -> bool:
    return (
        el.tag == "div"
        or el.attrs.get("display") == "block"
        or "mode=display" in el.attrs.get("type", "")
        or any("display" in c for c in el.classes)
    )


def _is_flow(el: Element) -> bool:
    return el.tag in FLOW_TAGS or any(c in ("column", "col") or c.startswith("column") for c in el.classes)


def serialize(el: Element) -> str:
    """HTML for an element subtree."""
    if el.tag == "#document":
        return "".join(serialize(c) if isinstance(c, Element) else htmllib.escape(c, quote=False) for c in el.children)
    attrs = "".join(f' {k}="{htmllib.escape(v)}"' for k, v in el.attrs.items())
    if el.tag in ("br", "hr", "img", "col", "wbr"):
        return f"<{el.tag}{attrs}>"
    inner = "".join(serialize(c) if isinstance(c, Element) else htmllib.escape(c, quote=False) for c in el.children)
    return f"<{el.tag}{attrs}>{inner}</{el.tag}>"


@dataclass
class _Block:
    markdown: str
    flow: int
    position: int
    runs: List[str]  # normalized plain-text runs between formulas


@dataclass
class _Float:
    position: int
    caption: str


@dataclass
class _Formula:
    source: str
    display: bool


@dataclass
class _TableSource:
    grid: TableGrid
    element: Element


class _Walker:
    def __init__(self):
        self.blocks: List[_Block] = []
        self.deferred: List[str] = []
        self.floats: List[_Float] = []
        self.formulas: List[_Formula] = []
        self.tables: List[_TableSource] = []
        self.margins: List[Element] = []
        self.position = 0
        self.flow_count = 0
        self._flow = 0
        self._pending: List[Tuple[str, str]] = []
        self._prefix = ""
        self._sink: List[str] = []

    # inline buffer
    def _text(self, s: str):
        pos = 0
        for m in _MATH_IN_TEXT.finditer(s):
            self._pending.append(("text", s[pos : m.start()]))
            src = next(g for g in m.groups() if g is not None)
            display = not m.group(0).startswith("\\(")
            self._formula(src, display, inline=True)
            pos = m.end()
        self._pending.append(("text", s[pos:]))

    def _formula(self, src: str, display: bool, inline: bool):
        src = src.strip()
        if not src:
            return
        self.formulas.append(_Formula(src, display))
        if display and not inline:
            self._flush()
            self._emit(f"\\[{src}\\]", [])
        else:
            self._pending.append(("math", src))

    def _emit(self, markdown: str, runs: List[str]):
        self._sink.append(markdown)
        if self._sink is self.deferred:
            return
        self.blocks.append(_Block(markdown, self._flow, self.position, runs))
        self.position += 1

    def _flush(self):
        pieces = []
        runs = []
        cur = []
        for kind, value in self._pending:
            if kind == "text":
                pieces.append(re.sub(r"[ \t\r\f\v]*\n[ \t\r\f\v]*", "\n", re.sub(r"[ \t\r\f\v]+", " ", value)))
                cur.append(value)
            else:
                pieces.append(f"\\({value}\\)")
                runs.append(normalize_str("".join(cur)))
                cur = []
        runs.append(normalize_str("".join(cur)))
        self._pending = []
        md = "".join(pieces).strip()
        if not md:
            return
        self._emit(self._prefix + md, [r for r in runs if r])

    # traversal
    def walk(self, node: Element, flow: int):
        self._flow = flow
        for child in node.children:
            if isinstance(child, str):
                self._text(child)
                continue
            tag = child.tag
            if tag in SKIP_TAGS and not _is_math(child):
                continue
            if tag in MARGIN_TAGS:
                self.margins.append(child)
                continue
            if _is_math(child):
                src = _math_source(child)
                if src:
                    self._formula(src, _is_display(child), inline=False)
                continue
            if tag == "br":
                self._pending.append(("text", "\n"))
                continue
            if tag == "table":
                self._flush()
                self._table(child)
                continue
            if tag in FLOAT_TAGS:
                self._flush()
                self._float(child, flow)
                continue
            if tag in BLOCK_TAGS or _is_flow(child):
                self._flush()
                saved = self._prefix
                if tag.startswith("h") and tag[1:].isdigit():
                    self._prefix = "#" * int(tag[1:]) + " "
                elif tag == "li":
                    self._prefix = "- "
                else:
                    self._prefix = ""
                if _is_flow(child):
                    self.flow_count += 1
                    self.walk(child, self.flow_count)
                else:
                    self.walk(child, flow)
                self._flush()
                self._prefix = saved
                self._flow = flow
                continue
            self.walk(child, flow)  # inline element

    def _table(self, el: Element):
        try:
            grid = grid_from_html(el)
        except ValueError as exc:
            log.warning("skipping malformed ground-truth table: %s", exc)
            return
        self.tables.append(_TableSource(grid, el))
        for inner in el.iter("table"):
            if inner is not el:
                try:
                    self.tables.append(_TableSource(grid_from_html(inner), inner))
                except ValueError:
                    pass
        self._emit(render_table(grid, el), [])

    def _float(self, el: Element, flow: int):
        if self._sink is self.deferred:  # a caption inside its figure
            self.walk(el, flow)
            self._flush()
            return
        cap = el.find("figcaption") if el.tag != "figcaption" else el
        caption = normalize_str((cap or el).text())
        self.floats.append(_Float(self.position, caption))
        self.position += 1
        saved_sink, saved_prefix = self._sink, self._prefix
        self._sink, self._prefix = self.deferred, ""
        self.walk(el, flow)
        self._flush()
        self._sink, self._prefix = saved_sink, saved_prefix
        self._flow = flow

    def run(self, body: Element):
        self._sink = []
        main = self._sink
        self.walk(body, self.flow_count)
        self._flush()
        return main + self.deferred


def _pipe_safe(grid: TableGrid) -> bool:
    if grid.header_rows > 1 or grid.header_cols > 1:
        return False
    return not any(ch in MD_SPECIAL for row in grid.cells for cell in row for ch in cell)


def render_table(grid: TableGrid, el: Element) -> str:
    """Pipe table when Markdown can express the grid faithfully, else the HTML itself."""
    nested = any(t is not el for t in el.iter("table"))
    if nested or not _pipe_safe(grid):
        return serialize(el)
    lines = ["| " + " | ".join(grid.cells[0]) + " |", "|" + "|".join([" --- "] * grid.cols) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in grid.cells[1:]]
    return "\n".join(lines)


def _body(page: GroundTruthPage) -> Element:
    try:
        root = parse_html(page.html)
    except HtmlError as exc:
        raise PageRejected(f"{page.doc_id}: {exc}") from None
    body = root.find("body")
    return body if body is not None else root


def _walk(page: GroundTruthPage) -> Tuple[_Walker, str]:
    walker = _Walker()
    md = "\n\n".join(walker.run(_body(page)))
    return walker, md


def render_ground_truth(page: GroundTruthPage) -> str:
    """The page as candidate-style Markdown: margins dropped, floats after the main flow."""
    return _walk(page)[1]


# generation -------------------------------------------------------------------


def _words(s: str) -> int:
    return len(s.split())


def _plain(s: str) -> bool:
    return not any(ch in MD_SPECIAL for ch in s)


def _truncate(s: str, max_words: int) -> str:
    words = s.split()
    return " ".join(words[:max_words])


def _sentences(run: str) -> List[str]:
    return [s.strip() for s in _SENTENCE_END.split(run) if s.strip()]


def _margin_phrases(el: Element) -> List[str]:
    leaves = [
        d for d in el.iter()
        if d is not el and d.tag in BLOCK_TAGS and not any(isinstance(c, Element) and c.tag in BLOCK_TAGS for c in d.children)
    ]
    sources = leaves or [el]
    return [normalize_str(s.text()) for s in sources]


def generate_tests(page: GroundTruthPage, cfg: GenConfig = GenConfig()) -> List[TestCase]:
    """Deterministic (under ``page.seed``) unit tests for one ground-truth page."""
    walker, md = _walk(page)
    full = visible_text(md).text
    if not full:
        raise PageRejected(f"{page.doc_id}: page has no body text")
    rng = random.Random(page.seed)
    tests: List[TestCase] = []
    counter: Dict[TestKind, int] = {}

    def add(kind: TestKind, payload):
        n = counter.get(kind, 0)
        counter[kind] = n + 1
        tests.append(
            TestCase(
                id=f"{page.doc_id}_{kind.value}_{n:02d}",
                doc_id=page.doc_id,
                page=1,
                category=CATEGORY[kind],
                kind=kind,
                payload=payload,
            )
        )

    # (1) absence: header and footer phrases
    seen = set()
    for margin in walker.margins:
        for phrase in _margin_phrases(margin):
            phrase = _truncate(phrase, cfg.max_anchor_words)
            if _words(phrase) < cfg.min_anchor_words or phrase in seen:
                continue
            seen.add(phrase)
            if find_anchor(full, phrase, 0) is not None:
                continue  # also part of the body; cannot be asserted absent
            add(TestKind.TEXT_ABSENCE, AbsencePayload(phrase))

    # (2) presence: unique body sentences
    candidates: List[Tuple[int, int, str]] = []  # (position, flow, sentence)
    for block in walker.blocks:
        for run in block.runs:
            for sent in _sentences(run):
                if not (cfg.min_anchor_words <= _words(sent) <= cfg.max_anchor_words):
                    continue
                if _plain(sent) and count_occurrences(full, sent) == 1:
                    candidates.append((block.position, block.flow, sent))
    picked = rng.sample(candidates, min(cfg.presence_samples, len(candidates)))
    for _, _, sent in sorted(picked, key=candidates.index):
        add(TestKind.TEXT_PRESENCE, PresencePayload(sent))

    # (3) reading order within a flow, captions between them are forbidden
    captions = []
    for fl in walker.floats:
        cap = _truncate(fl.caption, cfg.max_anchor_words)
        if cap and _plain(cap) and count_occurrences(full, cap) == 1:
            captions.append((fl.position, cap))
    pairs = []
    for i, (pa, fa, sa) in enumerate(candidates):
        for pb, fb, sb in candidates[i + 1 :]:
            if fa != fb or sa == sb or sa in sb or sb in sa:
                continue
            between = tuple(dict.fromkeys(c for pos, c in captions if pa < pos < pb and c not in (sa, sb)))
            pairs.append((sa, sb, between))
    with_float = [p for p in pairs if p[2]]
    chosen = []
    if with_float:
        chosen += rng.sample(with_float, min(len(with_float), (cfg.order_samples + 1) // 2))
    rest = [p for p in pairs if p not in chosen]
    chosen += rng.sample(rest, min(len(rest), cfg.order_samples - len(chosen)))
    for sa, sb, between in chosen:
        add(TestKind.READING_ORDER, OrderPayload(sa, sb, between))

    # (4) table cells with relations to their neighbours
    for src in walker.tables:
        for payload in _table_tests(src.grid, cfg, rng, _composite_cells(src.element)):
            add(TestKind.TABLE_RELATION, payload)

    # (5) formulas
    done = set()
    for f in walker.formulas:
        if f.source in done:
            continue
        done.add(f.source)
        try:
            parse_latex(f.source)
        except UnsupportedLatex:
            if len(fallback_tokens(f.source)) < 3:
                continue
        except LatexError:
            continue
        add(TestKind.MATH_RENDER, MathPayload(f.source))

    # (6) baseline robustness
    ngram = NgramRepeatPayload()
    if check_ngram_repeat(md, ngram)[0]:
        add(TestKind.NGRAM_REPETITION, ngram)
    else:
        log.info("%s: ground truth itself repeats n-grams; no repetition test", page.doc_id)
    scripts = _target_scripts(full)
    if scripts:
        add(TestKind.SCRIPT_PURITY, ScriptPurityPayload(frozenset(scripts)))
    return tests


def _target_scripts(text: str, limit: float = 0.02) -> List[str]:
    hist = script_histogram(text)
    ranked = [s for s, _ in sorted(hist.items(), key=lambda kv: (-kv[1], kv[0])) if s not in ("Unknown", "Common", "Inherited")]
    chosen: List[str] = []
    for script in ranked:
        chosen.append(script)
        if foreign_fraction(text, chosen)[0] <= limit:
            return chosen
    return []


def _composite_cells(table: Element) -> set:
    """Texts of cells that hold a nested table; they make poor anchors."""
    out = set()
    for tag in ("td", "th"):
        for cell in table.iter(tag):
            if cell.find("table") is not None:
                out.add(normalize_str(cell.text()))
    return out


def _table_tests(
    grid: TableGrid, cfg: GenConfig, rng: random.Random, exclude: frozenset = frozenset()
) -> List[TableRelationPayload]:
    counts: Dict[str, int] = {}
    for row in grid.cells:
        for cell in row:
            counts[cell] = counts.get(cell, 0) + 1
    slots = [
        (r, c)
        for r, row in enumerate(grid.cells)
        for c, cell in enumerate(row)
        if cell and counts[cell] == 1 and _plain(cell) and cell not in exclude
    ]
    has_heads = grid.header_rows > 0 or grid.header_cols > 0
    if has_heads:
        body = [(r, c) for r, c in slots if r >= grid.header_rows and c >= grid.header_cols]
        slots = body or slots
    out = []
    for r, c in rng.sample(slots, len(slots)):
        if len(out) >= cfg.table_cell_samples:
            break
        usable = {}
        for d in ("up", "down", "left", "right", "top_heading", "left_heading"):
            if d == "top_heading" and not (grid.header_rows and r >= grid.header_rows):
                continue
            if d == "left_heading" and not (grid.header_cols and c >= grid.header_cols):
                continue
            v = grid.neighbor(r, c, d)
            if v and _plain(v) and v not in exclude:
                usable[d] = v
        if not usable:
            continue
        heads = [d for d in ("top_heading", "left_heading") if d in usable]
        others = [d for d in usable if d not in heads]
        want = rng.choice((1, 2))
        picks = heads[:1] if heads else []
        pool = [d for d in heads[1:] + others]
        picks += rng.sample(pool, min(len(pool), want - len(picks)))
        out.append(TableRelationPayload(grid.cells[r][c], tuple((d, usable[d]) for d in picks)))
    return out
