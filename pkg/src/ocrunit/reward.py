"""Page-level RLVR rewards: unit-test pass rate, EOS reward and metadata reward."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import yaml

from .core import CandidatePage, PageScore, TestCase, run_tests
from .tensormap import TensorMap, read_tensormap, soup, write_tensormap  # noqa: F401 - re-exported

DEFAULT_META_KEYS = ("primary_language", "rotation_correction", "is_rotation_valid")
_LANG = re.compile(r"^[A-Za-z]{1,8}$")
_DELIM = re.compile(r"^---[ \t]*$")


class _Loader(yaml.SafeLoader):
    """SafeLoader with YAML 1.2 booleans, so ``no`` stays a language tag."""


_Loader.yaml_implicit_resolvers = {
    ch: [(tag, rx) for tag, rx in resolvers if tag != "tag:yaml.org,2002:bool"]
    for ch, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:bool", re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$"), list("tTfF")
)


@dataclass(frozen=True)
class RewardConfig:
    w_tests: float = 1.0
    w_eos: float = 0.1
    w_meta: float = 0.1
    required_meta_keys: Tuple[str, ...] = DEFAULT_META_KEYS

    def __post_init__(self):
        if self.w_tests <= 0 or self.w_eos < 0 or self.w_meta < 0:
            raise ValueError("weights must be >= 0 and w_tests > 0")
        object.__setattr__(self, "required_meta_keys", tuple(self.required_meta_keys))


@dataclass(frozen=True)
class FrontMatter:
    values: Dict[str, Any] = field(default_factory=dict)
    valid: Dict[str, bool] = field(default_factory=dict)

    def fraction_valid(self, keys: Sequence[str] = DEFAULT_META_KEYS) -> float:
        if not keys:
            return 1.0
        return sum(1 for k in keys if self.valid.get(k)) / len(keys)


def split_front_matter(text: str) -> Tuple[Optional[str], str]:
    """Split ``---`` delimited metadata off the top of a completion.

    The block must open on the very first line; anything else is body.
    """
    lines = text.split("\n")
    if not lines or not _DELIM.match(lines[0].lstrip("\ufeff")):
        return None, text
    for i in range(1, len(lines)):
        if _DELIM.match(lines[i]):
            return "\n".join(lines[1:i]), "\n".join(lines[i + 1 :]).lstrip("\n")
    return None, text


def _loose_pairs(block: str) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for line in block.split("\n"):
        if ":" not in line:
            continue
        key, _, value = line.partition(":")
        try:
            out[key.strip()] = yaml.load(value.strip(), Loader=_Loader) if value.strip() else None
        except yaml.YAMLError:
            out[key.strip()] = value.strip()
    return out


def _valid(key: str, value: Any) -> bool:
    if key == "primary_language":
        return isinstance(value, str) and bool(_LANG.match(value))
    if key == "rotation_correction":
        return isinstance(value, int) and not isinstance(value, bool) and value in (0, 90, 180, 270)
    if key == "is_rotation_valid":
        return isinstance(value, bool)
    return value is not None


def parse_front_matter(raw: Optional[str]) -> FrontMatter:
    """Parse a metadata block and flag which known keys are well formed.

    Accepts either a ``---`` delimited block at the top of ``raw`` or, without
    delimiters, the colon-separated lines before the first blank line. Never raises.
    """
    if not raw or not raw.strip():
        return FrontMatter()
    block, _ = split_front_matter(raw)
    if block is None:
        if _DELIM.match(raw.split("\n", 1)[0]):
            return FrontMatter()  # opened but never closed
        block = raw.split("\n\n", 1)[0]
        if not all(":" in ln for ln in block.strip().split("\n")):
            return FrontMatter()
    try:
        values = yaml.load(block, Loader=_Loader)
    except yaml.YAMLError:
        values = None
    if not isinstance(values, dict):
        values = _loose_pairs(block)
    values = {str(k): v for k, v in values.items()}
    valid = {k: _valid(k, v) for k, v in values.items()}
    return FrontMatter(values, valid)


def combine(pass_rate: float, eos: float, meta: float, cfg: RewardConfig) -> float:
    total = cfg.w_tests + cfg.w_eos + cfg.w_meta
    value = (cfg.w_tests * pass_rate + cfg.w_eos * eos + cfg.w_meta * meta) / total
    return min(1.0, max(0.0, value))


def compute_reward(page: CandidatePage, tests: Sequence[TestCase], cfg: RewardConfig = RewardConfig()) -> PageScore:
    if not tests:
        raise ValueError(f"no tests for {page.doc_id!r}: reward undefined")
    outcomes = run_tests(page, tests)
    pass_rate = sum(o.passed for o in outcomes) / len(outcomes)
    eos = 1.0 if page.finished else 0.0
    meta = parse_front_matter(page.front_matter).fraction_valid(cfg.required_meta_keys)
    return PageScore(
        doc_id=page.doc_id,
        outcomes=outcomes,
        pass_rate=pass_rate,
        eos_reward=eos,
        metadata_reward=meta,
        composite=combine(pass_rate, eos, meta, cfg),
    )
