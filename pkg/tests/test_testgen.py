import pytest

from ocrunit.core import CandidatePage, TestKind, dump_tests, load_test_store, run_tests
from ocrunit.tables import extract_tables, grid_from_html
from ocrunit._html import parse_html
from ocrunit.textnorm import count_occurrences, visible_text
from ocrunit.testgen import (
    GenConfig,
    GroundTruthPage,
    PageRejected,
    generate_tests,
    page_seed,
    render_ground_truth,
)

SENTS = [
    "The committee reviewed all the submitted data carefully.",
    "Results show a steady increase in membership numbers.",
    "We thank every volunteer who helped collect the responses.",
    "Further analysis will follow in the next quarterly report.",
]


def gt(html, doc="doc", seed=0):
    return GroundTruthPage(doc, html, seed)


def test_render_examples():
    assert render_ground_truth(gt("<p>hello</p>")) == "hello"
    assert render_ground_truth(gt("<header>Page 1</header><p>body</p>")) == "body"


def test_footer_becomes_absence_test():
    html = f"<body><p>{SENTS[0]} {SENTS[1]}</p><footer>Page 3 of 10 — Journal of X</footer></body>"
    tests = generate_tests(gt(html))
    absent = [t for t in tests if t.kind is TestKind.TEXT_ABSENCE]
    assert [t.payload.anchor for t in absent] == ["Page 3 of 10 - Journal of X"]
    assert absent[0].category == "headers_footers"


def test_th_table_tests_use_top_heading():
    table = (
        "<table><tr><th>Name</th><th>Qty</th><th>Price</th></tr>"
        "<tr><td>bolt</td><td>40</td><td>0.10</td></tr><tr><td>nut</td><td>25</td><td>0.05</td></tr></table>"
    )
    page = gt(f"<body><p>{' '.join(SENTS)}</p>{table}</body>")
    tests = generate_tests(page)
    tab = [t for t in tests if t.kind is TestKind.TABLE_RELATION]
    assert 1 <= len(tab) <= 3
    assert all("top_heading" in dict(t.payload.relations) for t in tab)
    assert all(o.passed for o in run_tests(CandidatePage("doc", render_ground_truth(page)), tests))


def test_rendered_table_grid_equals_html_grid():
    table = "<table><tr><th>A</th><th>B</th></tr><tr><td>1</td><td>2</td></tr></table>"
    md = render_ground_truth(gt(f"<body>{table}</body>"))
    assert "| A | B |" in md
    (html_grid,) = [grid_from_html(t) for t in parse_html(table).iter("table")]
    assert extract_tables(md) == [html_grid]


def test_no_tables_or_math_only_text_kinds():
    page = gt(f"<body><header>Running head of this journal volume</header><p>{' '.join(SENTS)}</p></body>")
    kinds = {t.kind for t in generate_tests(page)}
    assert kinds <= {TestKind.TEXT_ABSENCE, TestKind.TEXT_PRESENCE, TestKind.READING_ORDER,
                     TestKind.NGRAM_REPETITION, TestKind.SCRIPT_PURITY}
    assert {TestKind.NGRAM_REPETITION, TestKind.SCRIPT_PURITY} <= kinds


def test_caption_is_forbidden_between_passages():
    html = (
        f"<body><section><p>{SENTS[0]}</p><figure><figcaption>Figure 1. Growth of the membership base.</figcaption>"
        f"</figure><p>{SENTS[1]}</p></section></body>"
    )
    tests = generate_tests(gt(html), GenConfig(order_samples=1))
    (order,) = [t for t in tests if t.kind is TestKind.READING_ORDER]
    assert order.payload.forbidden_between == ("Figure 1. Growth of the membership base.",)


def test_rejections():
    with pytest.raises(PageRejected):
        generate_tests(gt("<body><header>only a header</header></body>"))
    with pytest.raises(PageRejected):
        generate_tests(gt(""))


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(presence_samples=0)
    with pytest.raises(ValueError):
        GenConfig(min_anchor_words=10, max_anchor_words=5)
    assert GenConfig.from_pairs(["presence_samples=7"]).presence_samples == 7
    with pytest.raises(ValueError):
        GenConfig.from_pairs(["bogus=1"])


def test_page_seed_is_order_independent():
    assert page_seed(5, "a") == page_seed(5, "a") != page_seed(5, "b")


# fixture corpus ---------------------------------------------------------------------


def test_fixture_corpus_covers_required_features(fixture_pages):
    assert len(fixture_pages) >= 50
    joined = [h for _, h in fixture_pages]
    assert sum("<footer>" in h for h in joined) >= 10
    assert sum('class="column"' in h for h in joined) >= 10
    assert sum("rowspan" in h for h in joined) >= 5
    assert sum(h.count("<table") >= 2 and "<td><table" in h for h in joined) >= 3
    assert sum("math" in h for h in joined) >= 20


def test_self_consistency_on_fixtures(fixture_pages):
    total = 0
    for doc, html in fixture_pages:
        page = gt(html, doc, page_seed(0, doc))
        tests = generate_tests(page)
        md = render_ground_truth(page)
        outs = run_tests(CandidatePage(doc, md), tests)
        failed = [(t.id, o.detail) for t, o in zip(tests, outs) if not o.passed]
        assert not failed, (doc, failed)
        total += len(tests)
    assert total > 10 * len(fixture_pages)


def test_generation_is_byte_deterministic(fixture_pages):
    for doc, html in fixture_pages[:20]:
        page = gt(html, doc, page_seed(42, doc))
        a = dump_tests(generate_tests(page))
        b = dump_tests(generate_tests(page))
        assert a == b
        assert load_test_store(a).num_tests == a.count("\n")


def test_anchor_uniqueness(fixture_pages):
    for doc, html in fixture_pages:
        page = gt(html, doc, page_seed(0, doc))
        full = visible_text(render_ground_truth(page)).text
        for t in generate_tests(page):
            if t.kind is TestKind.TEXT_PRESENCE:
                assert count_occurrences(full, visible_text(t.payload.anchor).text) == 1
            elif t.kind is TestKind.READING_ORDER:
                for a in (t.payload.before, t.payload.after):
                    assert count_occurrences(full, visible_text(a).text) == 1
