"""Boosting with a replay memory of misclassified training samples.

Outer loop:

1. train on the full training set;
2. add every misclassified training sample to the memory (no duplicates);
3. retrain from scratch, inserting one extra round after every ``replay_period``
   regular rounds. A replay round fits only the memory plus an equally sized
   uniform draw of non-memory training rows;
4. repeat 2-3 until the training log-loss stops improving by at least
   ``tolerance`` or ``max_outer_iterations`` is reached.

The model from the last outer iteration is returned. Replay rounds usually
raise the full-data training loss (they pull the ensemble toward the hard
samples), so that loss decides when to stop but not which model to keep.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .boosting import Booster, BoostedEnsemble, TrainingConfig
from .boosting.model import _training_arrays
from .dataset_io import LabeledDataset


@dataclass(frozen=True)
class MemoryConfig:
    replay_period: int = 5
    max_outer_iterations: int = 3
    tolerance: float = 1e-4     # a negative value tolerates loss increases; -inf never stops early
    seed: int = 0

    def __post_init__(self):
        if self.replay_period < 1:
            raise ValueError("replay_period must be >= 1")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")


@dataclass
class ReplayMemory:
    """Misclassified samples in first-seen order, unique by entity id."""
    ids: List[str] = field(default_factory=list)
    rows: List[np.ndarray] = field(default_factory=list)
    labels: List[int] = field(default_factory=list)
    _seen: set = field(default_factory=set, repr=False)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, entity_id) -> bool:
        return entity_id in self._seen

    def add(self, entity_id: str, row: np.ndarray, label: int) -> bool:
        if entity_id in self:
            return False
        self.ids.append(entity_id)
        self._seen.add(entity_id)
        self.rows.append(np.asarray(row, dtype=np.float64))
        self.labels.append(int(label))
        return True

    def extend(self, entries) -> int:
        return sum(self.add(*e) for e in entries)

    def write_csv(self, path, feature_names) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["entity_id", "label", *feature_names])
            for entity, row, label in zip(self.ids, self.rows, self.labels):
                w.writerow([entity, label, *(repr(float(v)) for v in row)])


@dataclass
class ReplayRound:
    after_round: int            # regular rounds completed before this replay
    memory_rows: np.ndarray
    drawn_rows: np.ndarray


@dataclass
class IterationRecord:
    iteration: int
    rounds: int                 # trees in the model trained this iteration
    loss: float
    memory_size: int            # after collecting this iteration's errors
    replays: List[ReplayRound] = field(default_factory=list)


def collect_misclassified(model: BoostedEnsemble, ds: LabeledDataset,
                          threshold: Optional[float] = None) -> List[Tuple[str, np.ndarray, int]]:
    """``(id, row, label)`` for labeled rows where ``proba >= threshold`` disagrees with the label."""
    ds = ds.labeled()
    t = model.threshold if threshold is None else threshold
    pred = (model.predict_proba(ds) >= t).astype(np.int64)
    wrong = np.flatnonzero(pred != ds.labels)
    return [(ds.ids[i], ds.features[i], int(ds.labels[i])) for i in wrong]


def _train_with_replay(ds: LabeledDataset, tc: TrainingConfig, mc: MemoryConfig,
                       memory_rows: np.ndarray, iteration: int):
    booster = Booster(ds.features, ds.labels, ds.feature_names, tc)
    replays: List[ReplayRound] = []
    n = len(ds)
    others = np.setdiff1d(np.arange(n), memory_rows)
    for t in range(tc.n_rounds):
        booster.boosting_round(t)
        if len(memory_rows) and (t + 1) % mc.replay_period == 0:
            rng = np.random.default_rng([mc.seed, iteration, t])
            k = min(len(memory_rows), len(others))
            drawn = np.sort(rng.choice(others, size=k, replace=False)) if k else others[:0]
            booster.subset_round(np.concatenate([memory_rows, drawn]))
            replays.append(ReplayRound(t + 1, memory_rows.copy(), drawn))
    return booster, replays


def train_with_memory(ds: LabeledDataset, tc: TrainingConfig = TrainingConfig(),
                      mc: MemoryConfig = MemoryConfig()):
    """Returns ``(model, memory, history)``; history has one record per outer iteration."""
    ds = _training_arrays(ds)
    position: Dict[str, int] = {e: i for i, e in enumerate(ds.ids)}
    memory = ReplayMemory()
    history: List[IterationRecord] = []
    model = None
    prev_loss = np.inf
    for it in range(1, mc.max_outer_iterations + 1):
        memory_rows = np.array(sorted(position[e] for e in memory.ids), dtype=np.int64)
        booster, replays = _train_with_replay(ds, tc, mc, memory_rows, it)
        loss = booster.loss()
        memory.extend(collect_misclassified(booster.model, ds, tc.threshold))
        history.append(IterationRecord(it, len(booster.model.trees), loss, len(memory), replays))
        model = booster.model
        if prev_loss - loss < mc.tolerance:
            break
        prev_loss = loss
    return model, memory, history


def write_history(history: List[IterationRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "rounds", "loss", "memory_size"])
        for rec in history:
            w.writerow([rec.iteration, rec.rounds, repr(rec.loss), rec.memory_size])
