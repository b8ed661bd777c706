"""Binary classification metrics (positive class = gambling)."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def as_row(self) -> dict:
        return asdict(self) | {
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
        }


def evaluate(predictions, labels) -> MetricsReport:
    pred = np.asarray(predictions).astype(np.int64)
    y = np.asarray(labels).astype(np.int64)
    if pred.shape != y.shape:
        raise ValueError(f"{len(pred)} predictions vs {len(y)} labels")
    if not np.isin(y, (0, 1)).all() or not np.isin(pred, (0, 1)).all():
        raise ValueError("predictions and labels must be 0/1")
    return MetricsReport(
        int(np.sum((pred == 1) & (y == 1))), int(np.sum((pred == 1) & (y == 0))),
        int(np.sum((pred == 0) & (y == 0))), int(np.sum((pred == 0) & (y == 1))),
    )
