"""Founder tables: loading, merging, validity filtering and stratified sampling."""

from __future__ import annotations

import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

LINKEDIN_COLUMN = "linkedin_json"
ORG_COLUMN = "org_name"
ID_COLUMN = "founder_id"

# serialized profiles routinely exceed the csv module's 128 KiB default
csv.field_size_limit(min(sys.maxsize, 2**31 - 1))


class IngestError(Exception):
    pass


class MissingColumnError(IngestError):
    pass


class DuplicateFounderError(IngestError):
    pass


class InsufficientRecordsError(IngestError):
    pass


@dataclass(frozen=True)
class FounderRecord:
    founder_id: str
    linkedin_doc: str
    org_name: str
    success: bool

    def to_dict(self) -> dict:
        return {
            "founder_id": self.founder_id,
            "org_name": self.org_name,
            "success": self.success,
            "linkedin_json": self.linkedin_doc,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FounderRecord":
        return cls(
            founder_id=str(d["founder_id"]),
            linkedin_doc=d["linkedin_json"],
            org_name=d["org_name"],
            success=bool(d["success"]),
        )


@dataclass(frozen=True)
class SkippedRow:
    source: str
    row: int
    reason: str


@dataclass(frozen=True)
class Dataset:
    records: tuple[FounderRecord, ...] = ()
    sources: tuple[str, ...] = ()
    seed: int | None = None
    skipped: tuple[SkippedRow, ...] = field(default=(), compare=False)

    def __post_init__(self):
        seen = set()
        for r in self.records:
            if r.founder_id in seen:
                raise DuplicateFounderError(f"duplicate founder_id {r.founder_id!r}")
            seen.add(r.founder_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def provenance(self) -> dict:
        return {"sources": list(self.sources), "seed": self.seed}

    def by_class(self, success: bool) -> list[FounderRecord]:
        return [r for r in self.records if r.success is success]

    def dumps(self) -> str:
        """Canonical line-delimited JSON, one founder per line."""
        return "".join(
            json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for r in self.records
        )

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        meta = path.with_suffix(".meta.json")
        meta.write_text(json.dumps(self.provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Dataset":
        path = Path(path)
        records = []
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(FounderRecord.from_dict(json.loads(line)))
        meta = path.with_suffix(".meta.json")
        prov = json.loads(meta.read_text(encoding="utf-8")) if meta.exists() else {}
        return cls(tuple(records), tuple(prov.get("sources", ())), prov.get("seed"))


def load_founder_table(path: str | Path, success: bool) -> Dataset:
    """Read one founder CSV; every record gets the same ``success`` flag.

    Rows with missing cells or an empty org name are skipped and reported in
    ``Dataset.skipped``; a missing file or required column raises.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"founder table not found: {path}")
    records: list[FounderRecord] = []
    skipped: list[SkippedRow] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(f"{path}: empty file, no header row") from None
        header = [h.strip() for h in header]
        for col in (LINKEDIN_COLUMN, ORG_COLUMN):
            if col not in header:
                raise MissingColumnError(f"{path}: missing required column {col!r}")
        idx = {name: i for i, name in enumerate(header)}
        row_no = 0
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                row_no += 1
                skipped.append(SkippedRow(path.name, row_no, f"unreadable row: {exc}"))
                continue
            row_no += 1
            if not row:
                row_no -= 1
                continue
            reason = None
            if len(row) < len(header):
                reason = f"expected {len(header)} cells, found {len(row)}"
            elif not row[idx[ORG_COLUMN]].strip():
                reason = "empty org_name"
            if reason:
                skipped.append(SkippedRow(path.name, row_no, reason))
                continue
            fid = row[idx[ID_COLUMN]].strip() if ID_COLUMN in idx else ""
            records.append(
                FounderRecord(
                    founder_id=fid or f"{path.name}:{row_no}",
                    linkedin_doc=row[idx[LINKEDIN_COLUMN]],
                    org_name=row[idx[ORG_COLUMN]].strip(),
                    success=success,
                )
            )
    for s in skipped:
        logger.warning("skipped %s row %d: %s", s.source, s.row, s.reason)
    return Dataset(tuple(records), (path.name,), None, tuple(skipped))


def merge_and_flag(successful: Dataset, unsuccessful: Dataset) -> Dataset:
    ids = {r.founder_id for r in successful}
    clash = sorted(ids.intersection(r.founder_id for r in unsuccessful))
    if clash:
        raise DuplicateFounderError(f"founder_id present in both tables: {clash[:5]}")
    return Dataset(
        successful.records + unsuccessful.records,
        successful.sources + unsuccessful.sources,
        None,
        successful.skipped + unsuccessful.skipped,
    )


def invalid_reason(doc: str) -> str | None:
    """Why a profile document is unusable, or None when it is fine."""
    if not doc or not doc.strip():
        return "empty linkedin document"
    try:
        parsed = json.loads(doc)
    except (json.JSONDecodeError, RecursionError) as exc:
        return f"malformed JSON: {exc}"
    if not isinstance(parsed, dict):
        return f"profile is a JSON {type(parsed).__name__}, expected an object"
    return None


def filter_valid(d: Dataset) -> Dataset:
    kept = []
    for r in d.records:
        reason = invalid_reason(r.linkedin_doc)
        if reason is None:
            kept.append(r)
        else:
            logger.info("dropping %s: %s", r.founder_id, reason)
    return Dataset(tuple(kept), d.sources, d.seed, d.skipped)


def stratified_sample(d: Dataset, n_per_class: int, seed: int) -> Dataset:
    """Draw ``n_per_class`` founders from each class without replacement.

    Each class is shuffled with its own generator derived from ``seed`` and the
    prefix is kept; successful founders come first in the result.
    """
    if n_per_class < 0:
        raise ValueError("n_per_class must be non-negative")
    out: list[FounderRecord] = []
    for label in (True, False):
        pool = d.by_class(label)
        if len(pool) < n_per_class:
            raise InsufficientRecordsError(
                f"need {n_per_class} {'successful' if label else 'unsuccessful'} founders, have {len(pool)}"
            )
        rng = np.random.default_rng([seed, int(label)])
        order = rng.permutation(len(pool))
        out.extend(pool[i] for i in order[:n_per_class])
    return Dataset(tuple(out), d.sources, seed, d.skipped)


def build_sample(
    successful: str | Path,
    unsuccessful: str | Path,
    n_per_class: int,
    seed: int,
) -> Dataset:
    merged = merge_and_flag(load_founder_table(successful, True), load_founder_table(unsuccessful, False))
    return stratified_sample(filter_valid(merged), n_per_class, seed)
