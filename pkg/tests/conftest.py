import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
PAGES = os.path.join(FIXTURES, "pages")


@pytest.fixture(scope="session")
def fixture_pages():
    """(doc_id, html) for every fixture page, sorted by doc_id."""
    out = []
    for name in sorted(os.listdir(PAGES)):
        if name.endswith(".html"):
            with open(os.path.join(PAGES, name), encoding="utf-8") as fh:
                out.append((name[:-5], fh.read()))
    return out


# acceptance criteria report -----------------------------------------------------------

ACCEPTANCE = {}


@pytest.fixture()
def criterion(request):
    """Record ``(ok, detail)`` for an acceptance criterion; printed in the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE[number] = (title, bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
