"""Domain types, the JSONL test-store loader and the test runner."""
from __future__ import annotations

import enum
import io
import json
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

log = logging.getLogger(__name__)


class TestKind(str, enum.Enum):
    __test__ = False  # not a pytest class

    TEXT_PRESENCE = "present"
    TEXT_ABSENCE = "absent"
    READING_ORDER = "order"
    TABLE_RELATION = "table"
    MATH_RENDER = "math"
    NGRAM_REPETITION = "ngram_repeat"
    SCRIPT_PURITY = "script"


COMMON_FIELDS = ("id", "doc_id", "page", "category", "type", "max_diffs")


class StoreError(ValueError):
    """Raised when a test store cannot be loaded."""


class PayloadError(ValueError):
    """A kind-specific payload violates its preconditions."""


@dataclass(frozen=True)
class TestCase:
    __test__ = False

    id: str
    doc_id: str
    page: int
    category: str
    kind: TestKind
    payload: Any
    max_diffs: int = 0

    def to_json(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "id": self.id,
            "doc_id": self.doc_id,
            "page": self.page,
            "category": self.category,
            "type": self.kind.value,
        }
        if self.max_diffs:
            row["max_diffs"] = self.max_diffs
        row.update(self.payload.to_json())
        return row

    def to_jsonl(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)


@dataclass(frozen=True)
class CandidatePage:
    doc_id: str
    body: str
    front_matter: Optional[str] = None
    finished: bool = True

    @classmethod
    def from_text(cls, doc_id: str, text: str, finished: bool = True) -> "CandidatePage":
        """Split a leading ``---`` delimited front-matter block off ``text``."""
        from .reward import split_front_matter

        front, body = split_front_matter(text)
        return cls(doc_id=doc_id, body=body, front_matter=front, finished=finished)


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    test_id: str
    passed: bool
    detail: str = ""

    def to_json(self) -> Dict[str, Any]:
        return {"test_id": self.test_id, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class PageScore:
    doc_id: str
    outcomes: List[TestOutcome]
    pass_rate: float
    eos_reward: float
    metadata_reward: float
    composite: float

    def to_json(self, with_outcomes: bool = True) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "doc_id": self.doc_id,
            "composite": self.composite,
            "pass_rate": self.pass_rate,
            "eos_reward": self.eos_reward,
            "metadata_reward": self.metadata_reward,
        }
        if with_outcomes:
            row["outcomes"] = [o.to_json() for o in self.outcomes]
        return row


@dataclass(frozen=True)
class TestStore:
    """Immutable mapping doc_id -> tests, in file order."""

    __test__ = False

    docs: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "docs", MappingProxyType({k: tuple(v) for k, v in self.docs.items()}))

    def __len__(self) -> int:
        return len(self.docs)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self.docs

    def __getitem__(self, doc_id: str) -> tuple:
        return self.docs[doc_id]

    def __iter__(self):
        return iter(self.docs)

    @property
    def num_tests(self) -> int:
        return sum(len(v) for v in self.docs.values())

    def all_tests(self) -> Iterable[TestCase]:
        for tests in self.docs.values():
            yield from tests


def _payload_types():
    from .checks import (
        AbsencePayload,
        NgramRepeatPayload,
        OrderPayload,
        PresencePayload,
        ScriptPurityPayload,
    )
    from .mathcmp import MathPayload
    from .tables import TableRelationPayload

    return {
        TestKind.TEXT_PRESENCE: PresencePayload,
        TestKind.TEXT_ABSENCE: AbsencePayload,
        TestKind.READING_ORDER: OrderPayload,
        TestKind.TABLE_RELATION: TableRelationPayload,
        TestKind.MATH_RENDER: MathPayload,
        TestKind.NGRAM_REPETITION: NgramRepeatPayload,
        TestKind.SCRIPT_PURITY: ScriptPurityPayload,
    }


def parse_test_case(row: Mapping[str, Any]) -> TestCase:
    """Build and validate a TestCase from one decoded JSONL object."""
    if not isinstance(row, Mapping):
        raise PayloadError("test line is not a JSON object")
    for key in ("id", "doc_id", "category", "type"):
        if not isinstance(row.get(key), str) or (key != "category" and not row[key]):
            raise PayloadError(f"field {key!r} must be a nonempty string")
    page = row.get("page")
    if not isinstance(page, int) or isinstance(page, bool) or page < 1:
        raise PayloadError("field 'page' must be an integer >= 1")
    max_diffs = row.get("max_diffs", 0)
    if not isinstance(max_diffs, int) or isinstance(max_diffs, bool) or max_diffs < 0:
        raise PayloadError("field 'max_diffs' must be an integer >= 0")
    try:
        kind = TestKind(row["type"])
    except ValueError:
        raise PayloadError(f"unknown test type {row['type']!r}") from None
    extra = {k: v for k, v in row.items() if k not in COMMON_FIELDS}
    payload = _payload_types()[kind].from_json(extra)
    return TestCase(
        id=row["id"],
        doc_id=row["doc_id"],
        page=page,
        category=row["category"],
        kind=kind,
        payload=payload,
        max_diffs=max_diffs,
    )


def load_test_store(source: Union[bytes, str, IO]) -> TestStore:
    """Parse a JSONL test store. ``source`` is raw bytes, text, or a file object.

    Errors carry the 1-based line number of the offending line.
    """
    if isinstance(source, bytes):
        stream: Iterable = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        stream = io.StringIO(source)
    else:
        stream = source
    docs: Dict[str, List[TestCase]] = {}
    seen = set()
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StoreError(f"line {lineno}: malformed JSON ({exc.msg})") from None
        try:
            test = parse_test_case(row)
        except PayloadError as exc:
            raise StoreError(f"line {lineno}: {exc}") from None
        if test.id in seen:
            raise StoreError(f"line {lineno}: duplicate test id {test.id!r}")
        seen.add(test.id)
        docs.setdefault(test.doc_id, []).append(test)
    return TestStore(docs)


def load_test_store_file(path) -> TestStore:
    with open(path, "rb") as fh:
        return load_test_store(fh.read())


def dump_tests(tests: Iterable[TestCase]) -> str:
    return "".join(t.to_jsonl() + "\n" for t in tests)


def run_tests(page: CandidatePage, tests: Sequence[TestCase]) -> List[TestOutcome]:
    """One outcome per test, in order. A crashing checker yields a failed outcome."""
    for t in tests:
        if t.doc_id != page.doc_id:
            raise ValueError(f"test {t.id!r} belongs to {t.doc_id!r}, not {page.doc_id!r}")
    outcomes = []
    for t in tests:
        try:
            passed, detail = t.payload.check(page.body, t.max_diffs)
        except Exception as exc:  # noqa: BLE001 - a reward stream must not abort
            log.warning("checker for %s raised %r", t.id, exc)
            passed, detail = False, f"checker error: {type(exc).__name__}: {exc}"
        outcomes.append(TestOutcome(t.id, bool(passed), detail))
    return outcomes
