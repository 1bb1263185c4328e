"""Fixed 55-column numeric encoding of one founder, and the labeled matrix.

Layout: highest_edu | field_0..field_9 (multi-hot) | level (ordinal 1-10) |
persona_A..persona_T (indicators) | the 23 flags in taxonomy order.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .edu_features import N_FIELDS
from .ingest import Dataset
from .segmentation import SegmentLabels
from .taxonomy import FLAG_NAMES, PERSONA_LETTERS

logger = logging.getLogger(__name__)

COLUMN_NAMES: tuple[str, ...] = (
    ("highest_edu",)
    + tuple(f"field_{i}" for i in range(N_FIELDS))
    + ("level",)
    + tuple(f"persona_{p}" for p in PERSONA_LETTERS)
    + FLAG_NAMES
)
N_FEATURES = len(COLUMN_NAMES)
assert N_FEATURES == 55

EDU_COL = 0
FIELD_COLS = slice(1, 1 + N_FIELDS)
LEVEL_COL = 1 + N_FIELDS
PERSONA_COLS = slice(LEVEL_COL + 1, LEVEL_COL + 1 + len(PERSONA_LETTERS))
FLAG_COLS = slice(PERSONA_COLS.stop, PERSONA_COLS.stop + len(FLAG_NAMES))


def build_feature_vector(edu: tuple[int, Iterable[int]], labels: SegmentLabels) -> np.ndarray:
    degree, fields = edu
    v = np.zeros(N_FEATURES, dtype=np.float64)
    v[EDU_COL] = degree
    for f in fields:
        v[FIELD_COLS.start + f] = 1.0
    v[LEVEL_COL] = labels.level
    for p in labels.personas:
        v[PERSONA_COLS.start + PERSONA_LETTERS.index(p)] = 1.0
    v[FLAG_COLS] = labels.flags.values
    return v


@dataclass(frozen=True)
class Exclusion:
    founder_id: str
    reason: str


class LabeledMatrix:
    """Rows of (founder_id, 55 features, success) with stable column names."""

    def __init__(self, founder_ids: Iterable[str], X, y):
        self.founder_ids = tuple(founder_ids)
        self.X = np.asarray(X, dtype=np.float64).reshape(len(self.founder_ids), N_FEATURES)
        self.y = np.asarray(y, dtype=bool).reshape(len(self.founder_ids))
        if len(set(self.founder_ids)) != len(self.founder_ids):
            raise ValueError("duplicate founder_id in matrix")
        self.column_names = COLUMN_NAMES

    def __len__(self) -> int:
        return len(self.founder_ids)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LabeledMatrix)
            and self.founder_ids == other.founder_ids
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )

    def subset(self, idx) -> "LabeledMatrix":
        idx = np.asarray(idx, dtype=np.intp)
        return LabeledMatrix([self.founder_ids[i] for i in idx], self.X[idx], self.y[idx])

    def column(self, name: str) -> np.ndarray:
        return self.X[:, COLUMN_NAMES.index(name)]

    def dumps(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("founder_id",) + COLUMN_NAMES + ("success",))
        for fid, row, label in zip(self.founder_ids, self.X, self.y):
            w.writerow([fid, *(_fmt(v) for v in row), int(label)])
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "LabeledMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        header = tuple(rows[0])
        if header != ("founder_id",) + COLUMN_NAMES + ("success",):
            raise ValueError("feature CSV header does not match the 55-column layout")
        body = rows[1:]
        X = np.array([[float(v) for v in r[1:-1]] for r in body], dtype=np.float64).reshape(-1, N_FEATURES)
        return cls([r[0] for r in body], X, [r[-1] == "1" for r in body])

    @classmethod
    def load(cls, path: str | Path) -> "LabeledMatrix":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def build_matrix(
    dataset: Dataset, features: Mapping[str, np.ndarray]
) -> tuple[LabeledMatrix, list[Exclusion]]:
    """Rows in dataset order; founders without a feature vector are excluded."""
    ids, rows, labels, excluded = [], [], [], []
    for r in dataset:
        v = features.get(r.founder_id)
        if v is None:
            excluded.append(Exclusion(r.founder_id, "no feature vector (labelling chain failed)"))
            continue
        ids.append(r.founder_id)
        rows.append(v)
        labels.append(r.success)
    for e in excluded:
        logger.warning("excluded %s from matrix: %s", e.founder_id, e.reason)
    X = np.vstack(rows) if rows else np.zeros((0, N_FEATURES))
    return LabeledMatrix(ids, X, labels), excluded
