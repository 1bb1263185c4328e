"""Rule-based education features: highest degree code and field-of-study codes.

Degree codes: 0 none/unknown, 1 bachelor's, 2 master's, 3 doctorate.
Field codes 0-9 follow the category table in ``data/edu_keywords.yaml``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Mapping

import yaml

NO_DEGREE, BACHELOR, MASTER, DOCTORATE = 0, 1, 2, 3
N_FIELDS = 10

_STRIP_CHARS = re.compile(r"[.'’]")
_SPACES = re.compile(r"\s+")
_FRAGMENT_SPLIT = re.compile(r"\s*(?:,|/|;|&|\band\b)\s*", re.IGNORECASE)

_EDU_KEYS = ("education", "educations", "education_history")
_SCHOOL_KEYS = ("school", "school_name", "institution", "university", "name")
_DEGREE_KEYS = ("degree_name", "degree", "degree_type")
_FIELD_KEYS = ("field_of_study", "field", "major", "fields_of_study")


@dataclass(frozen=True)
class EducationEntry:
    institution: str = ""
    degree_text: str = ""
    field_text: str = ""
    start_year: int | None = None
    end_year: int | None = None


@dataclass(frozen=True)
class KeywordTables:
    version: int
    degree_order: tuple[int, ...]
    degree_patterns: dict[int, re.Pattern]
    field_priority: tuple[int, ...]
    field_patterns: dict[int, re.Pattern]


def normalize(text: str) -> str:
    return _SPACES.sub(" ", _STRIP_CHARS.sub("", text.lower())).strip()


def _compile(keywords: Iterable[str]) -> re.Pattern:
    alts = sorted({normalize(k) for k in keywords}, key=len, reverse=True)
    body = "|".join(re.escape(a) for a in alts)
    return re.compile(rf"(?<![a-z0-9])(?:{body})(?![a-z0-9])")


def load_keyword_tables(text: str) -> KeywordTables:
    raw = yaml.safe_load(text)
    degree_order = tuple(int(c) for c in raw["degree_order"])
    field_priority = tuple(int(c) for c in raw["field_priority"])
    if sorted(field_priority) != list(range(N_FIELDS)):
        raise ValueError("field_priority must be a permutation of 0..9")
    return KeywordTables(
        version=int(raw["version"]),
        degree_order=degree_order,
        degree_patterns={int(c): _compile(kws) for c, kws in raw["degrees"].items()},
        field_priority=field_priority,
        field_patterns={int(c): _compile(block["keywords"]) for c, block in raw["fields"].items()},
    )


@lru_cache(maxsize=1)
def default_tables() -> KeywordTables:
    text = resources.files("founder_success").joinpath("data/edu_keywords.yaml").read_text("utf-8")
    return load_keyword_tables(text)


def map_degree(degree_text: str, tables: KeywordTables | None = None) -> int:
    tables = tables or default_tables()
    norm = normalize(degree_text or "")
    for code in tables.degree_order:
        if tables.degree_patterns[code].search(norm):
            return code
    return NO_DEGREE


def map_field(field_text: str, tables: KeywordTables | None = None) -> int | None:
    tables = tables or default_tables()
    norm = normalize(field_text or "")
    if not norm:
        return None
    for code in tables.field_priority:
        if tables.field_patterns[code].search(norm):
            return code
    return None


def split_fields(field_text: str) -> list[str]:
    return [f for f in _FRAGMENT_SPLIT.split(field_text or "") if f.strip()]


def _year(value: Any) -> int | None:
    if isinstance(value, Mapping):
        value = value.get("year")
    if isinstance(value, bool) or value is None:
        return None
    if isinstance(value, (int, float)):
        return int(value)
    m = re.search(r"\b(\d{4})\b", str(value))
    return int(m.group(1)) if m else None


def _first(d: Mapping, keys: Iterable[str]) -> Any:
    for k in keys:
        v = d.get(k)
        if v not in (None, ""):
            return v
    return None


def _text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value if v)
    return str(value).strip()


def extract_education(doc: str | Mapping) -> list[EducationEntry]:
    """Education entries of a profile, in document order.

    Accepts the serialized profile or an already-parsed mapping. The education
    list is looked up under a few common key spellings, at top level or under
    ``profile``.
    """
    data = json.loads(doc) if isinstance(doc, str) else doc
    if not isinstance(data, Mapping):
        return []
    items = _first(data, _EDU_KEYS)
    if items is None and isinstance(data.get("profile"), Mapping):
        items = _first(data["profile"], _EDU_KEYS)
    if not isinstance(items, list):
        return []
    entries = []
    for item in items:
        if not isinstance(item, Mapping):
            continue
        start = _year(_first(item, ("start_year", "starts_at", "start_date", "start")))
        end = _year(_first(item, ("end_year", "ends_at", "end_date", "end")))
        if start is not None and end is not None and start > end:
            end = None
        entries.append(
            EducationEntry(
                institution=_text(_first(item, _SCHOOL_KEYS)),
                degree_text=_text(_first(item, _DEGREE_KEYS)),
                field_text=_text(_first(item, _FIELD_KEYS)),
                start_year=start,
                end_year=end,
            )
        )
    return entries


def highest_education(entries: Iterable[EducationEntry], tables: KeywordTables | None = None) -> int:
    return max((map_degree(e.degree_text, tables) for e in entries), default=NO_DEGREE)


def fields_of_study(entries: Iterable[EducationEntry], tables: KeywordTables | None = None) -> frozenset[int]:
    codes = set()
    for e in entries:
        for fragment in split_fields(e.field_text):
            code = map_field(fragment, tables)
            if code is not None:
                codes.add(code)
    return frozenset(codes)


def education_features(doc: str | Mapping) -> tuple[int, frozenset[int]]:
    entries = extract_education(doc)
    return highest_education(entries), fields_of_study(entries)
