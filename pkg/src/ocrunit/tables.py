"""Markdown/HTML table extraction and relative-position cell checks."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ._html import Element, parse_html
from .core import PayloadError
from .textnorm import edit_distance, normalize_str, strip_markdown

log = logging.getLogger(__name__)

DIRECTIONS = ("up", "down", "left", "right", "top_heading", "left_heading")


@dataclass(frozen=True)
class TableGrid:
    """Span-expanded cell texts; ``cells[r][c]`` is the normalised text of slot (r, c)."""

    cells: Tuple[Tuple[str, ...], ...]
    header_rows: int = 0
    header_cols: int = 0
    # (row, col, rowspan, colspan) of each owner cell; not part of equality
    owners: Tuple[Tuple[int, int, int, int], ...] = field(default=(), compare=False, repr=False)

    @property
    def rows(self) -> int:
        return len(self.cells)

    @property
    def cols(self) -> int:
        return len(self.cells[0]) if self.cells else 0

    def neighbor(self, r: int, c: int, direction: str) -> Optional[str]:
        """Text in ``direction`` from slot (r, c), or None if no such slot exists."""
        if direction == "up":
            return self.cells[r - 1][c] if r > 0 else None
        if direction == "down":
            return self.cells[r + 1][c] if r + 1 < self.rows else None
        if direction == "left":
            return self.cells[r][c - 1] if c > 0 else None
        if direction == "right":
            return self.cells[r][c + 1] if c + 1 < self.cols else None
        if direction == "top_heading":
            hr = min(r, self.header_rows) if self.header_rows else min(r, 1)
            return self.cells[hr - 1][c] if hr > 0 else None
        if direction == "left_heading":
            hc = min(c, self.header_cols) if self.header_cols else min(c, 1)
            return self.cells[r][hc - 1] if hc > 0 else None
        raise ValueError(f"unknown direction {direction!r}")


# HTML -----------------------------------------------------------------------


def _own_rows(table: Element) -> List[Tuple[Element, bool]]:
    """<tr> elements of this table (not nested ones) with an in-thead flag."""
    rows = []

    def walk(node: Element, in_head: bool):
        for c in node.children:
            if not isinstance(c, Element) or c.tag == "table":
                continue
            if c.tag == "tr":
                rows.append((c, in_head))
            else:
                walk(c, in_head or c.tag == "thead")

    walk(table, False)
    return rows


def _span(attrs: Dict[str, str], name: str) -> int:
    try:
        return max(1, int(attrs.get(name, "1").strip() or 1))
    except ValueError:
        return 1


def grid_from_html(table: Element) -> TableGrid:
    rows = _own_rows(table)
    if not rows:
        raise ValueError("table has no rows")
    placed: Dict[Tuple[int, int], int] = {}
    owners = []  # (r, c, rowspan, colspan, text, is_th)
    for r, (tr, _) in enumerate(rows):
        c = 0
        for cell in tr.children:
            if not isinstance(cell, Element) or cell.tag not in ("td", "th"):
                continue
            while (r, c) in placed:
                c += 1
            rs = min(_span(cell.attrs, "rowspan"), len(rows) - r)
            cs = _span(cell.attrs, "colspan")
            idx = len(owners)
            owners.append([r, c, rs, cs, normalize_str(cell.text()), cell.tag == "th"])
            for dr in range(rs):
                for dc in range(cs):
                    placed.setdefault((r + dr, c + dc), idx)
            c += cs
    nrows = len(rows)
    ncols = max((c for _, c in placed), default=-1) + 1
    if ncols == 0:
        raise ValueError("table has no cells")
    grid = []
    for r in range(nrows):
        row = []
        for c in range(ncols):
            idx = placed.get((r, c))
            if idx is None:
                # ragged row: pad with an empty owner cell
                idx = len(owners)
                owners.append([r, c, 1, 1, "", False])
                placed[(r, c)] = idx
            row.append(owners[idx][4])
        grid.append(tuple(row))

    header_rows = 0
    for r, (tr, in_head) in enumerate(rows):
        if in_head or all(owners[placed[(r, c)]][5] for c in range(ncols)):
            header_rows = r + 1
        else:
            break
    if header_rows == nrows:
        header_rows = 0 if not any(in_head for _, in_head in rows) else header_rows
    header_cols = 0
    body_rows = range(header_rows, nrows)
    if len(body_rows):
        for c in range(ncols):
            if all(owners[placed[(r, c)]][5] for r in body_rows):
                header_cols = c + 1
            else:
                break
        if header_cols == ncols:
            header_cols = 0
    return TableGrid(
        tuple(grid),
        header_rows,
        header_cols,
        tuple((o[0], o[1], o[2], o[3]) for o in owners),
    )


# Markdown ---------------------------------------------------------------------

_SEP_CELL = re.compile(r"^\s*:?-+:?\s*$")
_PIPE_SPLIT = re.compile(r"(?<!\\)\|")


def _split_row(line: str) -> List[str]:
    s = line.strip()
    if s.startswith("|"):
        s = s[1:]
    if s.endswith("|") and not s.endswith("\\|"):
        s = s[:-1]
    return [p.replace("\\|", "|") for p in _PIPE_SPLIT.split(s)]


def _is_separator(line: str) -> bool:
    if "-" not in line:
        return False
    cells = _split_row(line)
    return bool(cells) and all(_SEP_CELL.match(c) for c in cells)


def _md_cell(text: str) -> str:
    return normalize_str(strip_markdown(text))


def _markdown_tables(lines: Sequence[str], warnings: List[str]) -> List[TableGrid]:
    grids = []
    i = 0
    n = len(lines)
    while i < n - 1:
        if "|" in lines[i] and _is_separator(lines[i + 1]) and "|" in lines[i + 1] + lines[i]:
            header = _split_row(lines[i])
            width = len(_split_row(lines[i + 1]))
            if width != len(header):
                warnings.append(f"markdown table at line {i + 1}: header/separator column mismatch")
                i += 2
                continue
            body = []
            j = i + 2
            while j < n and "|" in lines[j] and lines[j].strip():
                cells = _split_row(lines[j])
                cells = (cells + [""] * width)[:width]
                body.append(cells)
                j += 1
            rows = [header] + body
            cells = tuple(tuple(_md_cell(c) for c in row) for row in rows)
            owners = tuple((r, c, 1, 1) for r in range(len(rows)) for c in range(width))
            grids.append(TableGrid(cells, 1, 0, owners))
            i = j
        else:
            i += 1
    return grids


# extraction -------------------------------------------------------------------

_TABLE_TAG = re.compile(r"<(/?)table\b[^>]*>", re.I)


def _html_blocks(body: str) -> List[Tuple[int, int]]:
    """Outermost <table>...</table> spans, tolerating nesting."""
    spans = []
    depth = 0
    start = 0
    for m in _TABLE_TAG.finditer(body):
        if not m.group(1):
            if depth == 0:
                start = m.start()
            depth += 1
        elif depth:
            depth -= 1
            if depth == 0:
                spans.append((start, m.end()))
    if depth:
        spans.append((start, len(body)))  # unterminated: parse what is there
    return spans


def extract_tables_with_warnings(body: str) -> Tuple[List[TableGrid], List[str]]:
    warnings: List[str] = []
    grids: List[TableGrid] = []
    spans = _html_blocks(body)
    for lo, hi in spans:
        root = parse_html(body[lo:hi])
        for el in root.iter("table"):
            try:
                grids.append(grid_from_html(el))
            except ValueError as exc:
                warnings.append(f"html table at offset {lo}: {exc}")
    text = body
    for lo, hi in reversed(spans):
        text = text[:lo] + "\n" * body.count("\n", lo, hi) + text[hi:]
    grids.extend(_markdown_tables(text.split("\n"), warnings))
    for w in warnings:
        log.warning("skipped malformed table: %s", w)
    return grids, warnings


def extract_tables(body: str) -> List[TableGrid]:
    """Every Markdown pipe table and HTML table in ``body`` as a TableGrid."""
    return extract_tables_with_warnings(body)[0]


# relation check ---------------------------------------------------------------


@dataclass(frozen=True)
class TableRelationPayload:
    cell: str
    relations: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        rel = self.relations.items() if isinstance(self.relations, dict) else self.relations
        rel = tuple(sorted((d, v) for d, v in rel))
        object.__setattr__(self, "relations", rel)
        if not isinstance(self.cell, str) or not normalize_str(self.cell):
            raise PayloadError("'cell' must be nonempty after normalization")
        if not rel:
            raise PayloadError("table test needs at least one relation")
        for d, v in rel:
            if d not in DIRECTIONS:
                raise PayloadError(f"unknown table direction {d!r}")
            if not isinstance(v, str):
                raise PayloadError(f"relation {d!r} must be a string")

    @classmethod
    def from_json(cls, row) -> "TableRelationPayload":
        unknown = set(row) - set(DIRECTIONS) - {"cell"}
        if unknown:
            raise PayloadError(f"unknown table test fields {sorted(unknown)}")
        return cls(row.get("cell"), tuple((d, row[d]) for d in DIRECTIONS if d in row))

    def to_json(self):
        row = {"cell": self.cell}
        row.update(dict(self.relations))
        return row

    def check(self, body: str, max_diffs: int = 0):
        return check_table_relation(body, self, max_diffs)


def _matches(slot: Optional[str], want: str, max_diffs: int) -> bool:
    if slot is None:
        return False
    if max_diffs <= 0:
        return slot == want
    if abs(len(slot) - len(want)) > max_diffs:
        return False
    return edit_distance(slot, want) <= max_diffs


def grid_satisfies(grid: TableGrid, payload: TableRelationPayload, max_diffs: int = 0) -> bool:
    target = normalize_str(payload.cell)
    rels = [(d, normalize_str(v)) for d, v in payload.relations]
    for r, row in enumerate(grid.cells):
        for c, text in enumerate(row):
            if not _matches(text, target, max_diffs):
                continue
            if all(_matches(grid.neighbor(r, c, d), v, max_diffs) for d, v in rels):
                return True
    return False


def check_table_relation(body: str, payload: TableRelationPayload, max_diffs: int = 0):
    grids = extract_tables(body)
    if not grids:
        return False, "no tables found"
    for grid in grids:
        if grid_satisfies(grid, payload, max_diffs):
            return True, ""
    wanted = ", ".join(f"{d}={v!r}" for d, v in payload.relations)
    return False, f"no cell {payload.cell!r} with {wanted} in {len(grids)} table(s)"
