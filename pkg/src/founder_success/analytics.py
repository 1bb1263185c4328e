"""Success-rate tables by level, persona and boolean flag."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import LEVEL_COL, LabeledMatrix
from .taxonomy import FLAG_NAMES, LEVEL_RANGE, PERSONA_LETTERS

UNDEFINED = "—"


@dataclass(frozen=True)
class RateRow:
    key: str
    total_count: int
    success_count: int

    @property
    def success_rate_pct(self) -> float | None:
        if self.total_count == 0:
            return None
        return 100.0 * self.success_count / self.total_count

    def rate_str(self, decimals: int) -> str:
        rate = self.success_rate_pct
        return UNDEFINED if rate is None else f"{rate:.{decimals}f}"


def _row(key: str, mask: np.ndarray, y: np.ndarray) -> RateRow:
    return RateRow(key, int(mask.sum()), int((mask & y).sum()))


def success_by_level(m: LabeledMatrix) -> list[RateRow]:
    levels = m.X[:, LEVEL_COL]
    return [_row(f"L{k}", levels == k, m.y) for k in LEVEL_RANGE]


def success_by_persona(m: LabeledMatrix) -> list[RateRow]:
    return [_row(p, m.column(f"persona_{p}") == 1, m.y) for p in PERSONA_LETTERS]


@dataclass(frozen=True)
class FlagRates:
    flag: str
    no: RateRow
    yes: RateRow

    @property
    def gap_pp(self) -> float | None:
        if self.no.success_rate_pct is None or self.yes.success_rate_pct is None:
            return None
        return abs(self.yes.success_rate_pct - self.no.success_rate_pct)


def success_by_flag(m: LabeledMatrix, min_gap_pp: float = 5.0, show_all: bool = False) -> list[FlagRates]:
    """(No, Yes) rate pairs per flag.

    Only pairs whose rates differ by strictly more than ``min_gap_pp``
    percentage points are kept, unless ``show_all``. A pair with an empty side
    has no gap and is dropped by the filter.
    """
    out = []
    for name in FLAG_NAMES:
        col = m.column(name) == 1
        pair = FlagRates(name, _row(f"{name} (No)", ~col, m.y), _row(f"{name} (Yes)", col, m.y))
        gap = pair.gap_pp
        if show_all or (gap is not None and gap > min_gap_pp):
            out.append(pair)
    return out


# ---------------------------------------------------------------- rendering

def render_text(title: str, header: str, rows: list[RateRow], decimals: int) -> str:
    width = max([len(header)] + [len(r.key) for r in rows])
    lines = [title, "", f"{header:<{width}}  {'Total count':>11}  {'Success rate (%)':>16}"]
    lines.append("-" * len(lines[-1]))
    for r in rows:
        lines.append(f"{r.key:<{width}}  {r.total_count:>11d}  {r.rate_str(decimals):>16}")
    return "\n".join(lines) + "\n"


def render_csv(header: str, rows: list[RateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([header.lower(), "total_count", "success_count", "success_rate_pct"])
    for r in rows:
        rate = r.success_rate_pct
        w.writerow([r.key, r.total_count, r.success_count, "" if rate is None else repr(rate)])
    return buf.getvalue()


def flag_rows(pairs: list[FlagRates]) -> list[RateRow]:
    return [row for p in pairs for row in (p.no, p.yes)]


def write_reports(m: LabeledMatrix, out_dir: str | Path, min_gap_pp: float = 5.0) -> list[Path]:
    """Write the level, persona and flag tables as ``.txt`` and ``.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    flags = flag_rows(success_by_flag(m, min_gap_pp))
    all_flags = flag_rows(success_by_flag(m, min_gap_pp, show_all=True))
    tables = [
        ("level_success", "Success rates by level", "Level", success_by_level(m), 1),
        ("persona_success", "Success rates by persona", "Persona", success_by_persona(m), 1),
        (
            "flag_success",
            f"Success rates by boolean flag (gap > {min_gap_pp:g} percentage points)",
            "Flag",
            flags,
            2,
        ),
        ("flag_success_all", "Success rates by boolean flag (all flags)", "Flag", all_flags, 2),
    ]
    written = []
    for stem, title, header, rows, decimals in tables:
        for suffix, text in ((".txt", render_text(title, header, rows, decimals)), (".csv", render_csv(header, rows))):
            path = out_dir / f"{stem}{suffix}"
            path.write_text(text, encoding="utf-8")
            written.append(path)
    return written
