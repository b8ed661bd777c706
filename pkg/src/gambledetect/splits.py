from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")


def split_ids(ids: Sequence[str], labels: Sequence[int], spec: SplitSpec = SplitSpec()) -> Dict[str, str]:
    """Assign each labeled id to ``train`` or ``test``; unlabeled ids get ``unlabeled``."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(spec.seed)
    out = {e: "unlabeled" for e, y in zip(ids, labels) if y == -1}
    labeled = np.flatnonzero(labels != -1)
    groups = [labeled[labels[labeled] == c] for c in (0, 1)] if spec.stratified else [labeled]
    for group in groups:
        group = rng.permutation(group)
        n_train = int(round(spec.train_fraction * len(group)))
        for k, i in enumerate(group):
            out[ids[i]] = "train" if k < n_train else "test"
    return {e: out[e] for e in ids}


def write_split(assignment: Dict[str, str], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity_id", "set"])
        for e, s in assignment.items():
            w.writerow([e, s])


def read_split(path) -> Dict[str, str]:
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["entity_id"]: row["set"] for row in csv.DictReader(fh)}
