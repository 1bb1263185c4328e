"""Train / test partition: 240 training rows, an imbalanced 28+2 test set and
a balanced 15+15 test set, carved from 150 founders per class."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import LabeledMatrix


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    per_class: int = 150
    test1_neg: int = 28
    test1_pos: int = 2
    test2_neg: int = 15
    test2_pos: int = 15

    @property
    def train_size(self) -> int:
        return 2 * self.per_class - self.test1_neg - self.test1_pos - self.test2_neg - self.test2_pos


def make_split(
    m: LabeledMatrix, seed: int, spec: SplitSpec = SplitSpec()
) -> tuple[LabeledMatrix, LabeledMatrix, LabeledMatrix]:
    """Shuffle each class with ``seed``, keep ``per_class`` rows of it, and
    deal test1, test2 and train from the front. Rows keep matrix order
    inside each part."""
    parts: list[list[int]] = [[], [], []]
    for label, n1, n2 in ((True, spec.test1_pos, spec.test2_pos), (False, spec.test1_neg, spec.test2_neg)):
        rows = np.flatnonzero(m.y == label)
        if len(rows) < spec.per_class:
            raise SplitError(
                f"need {spec.per_class} {'positive' if label else 'negative'} rows, have {len(rows)}"
            )
        rng = np.random.default_rng([seed, int(label)])
        chosen = rows[rng.permutation(len(rows))[: spec.per_class]]
        parts[1].extend(chosen[:n1])
        parts[2].extend(chosen[n1 : n1 + n2])
        parts[0].extend(chosen[n1 + n2 :])
    train, test1, test2 = (m.subset(sorted(p)) for p in parts)
    return train, test1, test2
