import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocrunit._html import parse_html
from ocrunit.core import PayloadError
from ocrunit.tables import (
    DIRECTIONS,
    TableGrid,
    TableRelationPayload,
    check_table_relation,
    extract_tables,
    extract_tables_with_warnings,
    grid_from_html,
    grid_satisfies,
)
from oracles import brute_table_check, grid_to_html, grid_to_markdown

VOCAB = ["a", "b", "c", "1", "2"]


def random_grid(rng, max_dim=8):
    R, C = rng.randint(1, max_dim), rng.randint(1, max_dim)
    cells = tuple(tuple(rng.choice(VOCAB) for _ in range(C)) for _ in range(R))
    return TableGrid(cells, rng.randint(0, R - 1), rng.randint(0, C - 1))


def random_payload(rng):
    k = rng.randint(1, 3)
    dirs = rng.sample(DIRECTIONS, k)
    return TableRelationPayload(rng.choice(VOCAB), tuple((d, rng.choice(VOCAB)) for d in dirs))


# examples ---------------------------------------------------------------------------


def test_markdown_example():
    (g,) = extract_tables("|a|b|\n|-|-|\n|1|2|")
    assert g.cells == (("a", "b"), ("1", "2"))
    assert (g.rows, g.cols, g.header_rows) == (2, 2, 1)


def test_rowspan_example():
    html = "<table><tr><td rowspan=2>X</td><td>p</td></tr><tr><td>q</td></tr><tr><td>r</td><td>s</td></tr></table>"
    (g,) = extract_tables(html)
    assert g.cells == (("X", "p"), ("X", "q"), ("r", "s"))


def test_colspan_and_header_detection():
    html = (
        "<table><thead><tr><th rowspan=2>Item</th><th colspan=2>Size</th></tr>"
        "<tr><th>lo</th><th>hi</th></tr></thead>"
        "<tbody><tr><th>bolt</th><td>1</td><td>2</td></tr></tbody></table>"
    )
    (g,) = extract_tables(html)
    assert g.cells == (("Item", "Size", "Size"), ("Item", "lo", "hi"), ("bolt", "1", "2"))
    assert (g.header_rows, g.header_cols) == (2, 1)
    assert g.neighbor(2, 2, "top_heading") == "hi"
    assert g.neighbor(2, 2, "left_heading") == "bolt"


def test_no_tables():
    assert extract_tables("plain text without tables") == []
    assert check_table_relation("", TableRelationPayload("x", {"up": "y"})) == (False, "no tables found")


def test_relation_examples():
    body = "| Name | Qty |\n|---|---|\n| bolt | 40 |"
    assert check_table_relation(body, TableRelationPayload("bolt", {"right": "40", "top_heading": "Name"}))[0]
    assert not check_table_relation(body, TableRelationPayload("bolt", {"left": "40"}))[0]


def test_fuzzy_cell_match():
    body = "| Name | Qty |\n|---|---|\n| bolts | 40 |"
    p = TableRelationPayload("bolt", {"right": "40"})
    assert not check_table_relation(body, p)[0]
    assert check_table_relation(body, p, max_diffs=1)[0]


def test_nested_tables_are_separate_grids():
    html = "<table><tr><td>outer</td><td><table><tr><td>in1</td><td>in2</td></tr></table></td></tr></table>"
    grids = extract_tables(html)
    assert len(grids) == 2
    assert grids[0].cells == (("outer", "in1 in2"),)
    assert grids[1].cells == (("in1", "in2"),)


def test_malformed_tables_warn_not_crash():
    grids, warnings = extract_tables_with_warnings("<table></table>\n\n| a | b |\n| - | - | - |\n")
    assert grids == []
    assert len(warnings) == 2


def test_payload_validation_and_roundtrip():
    with pytest.raises(PayloadError):
        TableRelationPayload("x", {})
    with pytest.raises(PayloadError):
        TableRelationPayload("  ", {"up": "y"})
    with pytest.raises(PayloadError):
        TableRelationPayload.from_json({"cell": "x", "diagonal": "y"})
    p = TableRelationPayload.from_json({"cell": "x", "up": "y", "top_heading": "h"})
    assert TableRelationPayload.from_json(p.to_json()) == p


# oracle equivalence -------------------------------------------------------------------


def test_relation_check_matches_brute_force_on_random_grids():
    rng = random.Random(11)
    agree = 0
    for _ in range(500):
        g = random_grid(rng)
        for _ in range(4):
            p = random_payload(rng)
            want = brute_table_check(g.cells, g.header_rows, g.header_cols, p.cell, dict(p.relations))
            assert grid_satisfies(g, p) is want, (g, p)
            agree += 1
    assert agree == 2000


@given(st.integers(0, 10**6))
def test_markdown_and_html_renderings_agree(seed):
    rng = random.Random(seed)
    g = random_grid(rng, 6)
    g = TableGrid(g.cells, 1, 0) if g.rows > 1 else TableGrid(g.cells + (g.cells[0],), 1, 0)
    (from_md,) = extract_tables(grid_to_markdown(g.cells))
    (from_html,) = extract_tables(grid_to_html(g.cells, 1, 0))
    assert from_md == from_html == g
    p = random_payload(rng)
    assert grid_satisfies(from_md, p) == grid_satisfies(from_html, p)


@given(st.integers(0, 10**6))
def test_html_header_inference_roundtrip(seed):
    rng = random.Random(seed)
    g = random_grid(rng, 6)
    (parsed,) = extract_tables(grid_to_html(g.cells, g.header_rows, g.header_cols))
    assert parsed.cells == g.cells
    assert parsed.header_rows == g.header_rows
    if g.header_rows < g.rows and g.header_cols < g.cols:
        assert parsed.header_cols == g.header_cols


def random_partition(rng, R, C):
    """Tile an R x C grid with rectangles; returns {(r, c): (rs, cs, label)} keyed by top-left."""
    owner = [[None] * C for _ in range(R)]
    tiles = {}
    for r in range(R):
        for c in range(C):
            if owner[r][c] is not None:
                continue
            cs = 1
            while c + cs < C and owner[r][c + cs] is None and cs < 3 and rng.random() < 0.4:
                cs += 1
            rs = 1
            while r + rs < R and rng.random() < 0.35 and rs < 3:
                rs += 1
            label = f"t{len(tiles)}"
            for dr in range(rs):
                for dc in range(cs):
                    owner[r + dr][c + dc] = label
            tiles[(r, c)] = (rs, cs, label)
    return owner, tiles


@given(st.integers(0, 10**6))
def test_span_expansion_matches_manual_tiling(seed):
    rng = random.Random(seed)
    R, C = rng.randint(1, 6), rng.randint(1, 6)
    owner, tiles = random_partition(rng, R, C)
    rows = []
    for r in range(R):
        tds = "".join(
            f'<td rowspan="{rs}" colspan="{cs}">{label}</td>' for (r0, c0), (rs, cs, label) in sorted(tiles.items()) if r0 == r
        )
        rows.append(f"<tr>{tds}</tr>")
    (table,) = parse_html("<table>" + "".join(rows) + "</table>").iter("table")
    g = grid_from_html(table)
    if all(owner[r][c] is None for r in range(R) for c in range(C)):
        return
    expected_cols = max(c + 1 for r in range(R) for c in range(C) if owner[r][c] is not None)
    assert g.cells == tuple(tuple(owner[r][c] for c in range(expected_cols)) for r in range(R))
    assert sum(rs * cs for _, _, rs, cs in g.owners) == g.rows * g.cols
