"""Additive tree ensemble: training, prediction, persistence, importance."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..dataset_io import LabeledDataset, SchemaMismatchError, schema_digest
from .config import TrainingConfig
from .objective import compute_gradients, log_loss, logistic
from .sampling import goss_sample
from .tree import BinnedData, Tree, grow_tree

FORMAT_TAG = "gambledetect-gbdt"
FORMAT_VERSION = 1


@dataclass
class BoostedEnsemble:
    """``raw(x) = base_score + learning_rate * sum_k tree_k(x)``."""
    feature_names: List[str]
    learning_rate: float = 0.1
    base_score: float = 0.0
    trees: List[Tree] = field(default_factory=list)
    config: Optional[TrainingConfig] = None

    @property
    def schema_digest(self) -> str:
        return schema_digest(self.feature_names)

    @property
    def threshold(self) -> float:
        return self.config.threshold if self.config else 0.5

    def _check(self, X, digest: Optional[str]) -> np.ndarray:
        if digest is not None and digest != self.schema_digest:
            raise SchemaMismatchError(
                f"feature schema {digest[:12]} does not match model schema {self.schema_digest[:12]}")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.feature_names):
            raise SchemaMismatchError(
                f"rows have {X.shape[1]} features, model expects {len(self.feature_names)}")
        return X

    def _matrix(self, data) -> np.ndarray:
        if isinstance(data, LabeledDataset):
            return self._check(data.features, data.digest)
        return self._check(data, None)

    def predict_raw(self, data) -> np.ndarray:
        X = self._matrix(data)
        out = np.full(len(X), self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out

    def staged_raw(self, data) -> Iterator[np.ndarray]:
        """Raw scores after 0, 1, ..., K trees."""
        X = self._matrix(data)
        out = np.full(len(X), self.base_score)
        yield out.copy()
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
            yield out.copy()

    def predict_proba(self, data) -> np.ndarray:
        return logistic(self.predict_raw(data))

    def predict(self, data, threshold: Optional[float] = None) -> np.ndarray:
        t = self.threshold if threshold is None else threshold
        return (self.predict_proba(data) >= t).astype(np.int64)

    # -- persistence --------------------------------------------------------

    def dumps(self) -> str:
        lines = [
            f"{FORMAT_TAG} {FORMAT_VERSION}",
            f"learning_rate={self.learning_rate!r}",
            f"base_score={self.base_score!r}",
            f"schema_digest={self.schema_digest}",
            f"num_features={len(self.feature_names)}",
        ]
        lines += [f"feature={name}" for name in self.feature_names]
        if self.config is not None:
            lines += [f"config.{k}={v!r}" if isinstance(v, float) else f"config.{k}={v}"
                      for k, v in self.config.to_dict().items()]
        lines.append(f"num_trees={len(self.trees)}")
        for k, t in enumerate(self.trees):
            lines.append(f"tree {k} nodes={t.n_nodes}")
            for i in range(t.n_nodes):
                if t.feature[i] < 0:
                    lines.append(f"node {i} leaf weight={float(t.value[i])!r}")
                else:
                    lines.append(
                        f"node {i} split feature={int(t.feature[i])} threshold={float(t.threshold[i])!r}"
                        f" bin={int(t.bin_threshold[i])} default={'left' if t.default_left[i] else 'right'}"
                        f" left={int(t.left[i])} right={int(t.right[i])}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "BoostedEnsemble":
        lines = text.splitlines()
        if not lines or lines[0].split() != [FORMAT_TAG, str(FORMAT_VERSION)]:
            raise ValueError("not a model file (bad header)")
        header, names, cfg = {}, [], {}
        i = 1
        while i < len(lines) and not lines[i].startswith("tree "):
            key, _, value = lines[i].partition("=")
            if key == "feature":
                names.append(value)
            elif key.startswith("config."):
                cfg[key[len("config."):]] = value
            else:
                header[key] = value
            i += 1
        if schema_digest(names) != header.get("schema_digest"):
            raise ValueError("model file corrupt: feature list does not match schema digest")
        trees = []
        while i < len(lines):
            head = lines[i].split()
            n_nodes = int(head[2].split("=")[1])
            rec = [dict(tok.split("=", 1) for tok in ln.split()[3:]) | {"kind": ln.split()[2]}
                   for ln in lines[i + 1:i + 1 + n_nodes]]
            i += 1 + n_nodes
            split = [r["kind"] == "split" for r in rec]
            trees.append(Tree(
                np.array([int(r["feature"]) if s else -1 for r, s in zip(rec, split)], dtype=np.int64),
                np.array([float(r["threshold"]) if s else 0.0 for r, s in zip(rec, split)]),
                np.array([int(r["bin"]) if s else 0 for r, s in zip(rec, split)], dtype=np.int64),
                np.array([r.get("default", "left") == "left" for r in rec], dtype=bool),
                np.array([int(r["left"]) if s else -1 for r, s in zip(rec, split)], dtype=np.int64),
                np.array([int(r["right"]) if s else -1 for r, s in zip(rec, split)], dtype=np.int64),
                np.array([0.0 if s else float(r["weight"]) for r, s in zip(rec, split)]),
            ))
        if len(trees) != int(header["num_trees"]):
            raise ValueError("model file truncated")
        return cls(names, float(header["learning_rate"]), float(header["base_score"]), trees,
                   TrainingConfig.from_dict(cfg) if cfg else None)

    @classmethod
    def load(cls, path) -> "BoostedEnsemble":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


class Booster:
    """Round-by-round trainer; :func:`train` drives it, the memory trainer interleaves replay rounds."""

    def __init__(self, X: np.ndarray, y: np.ndarray, feature_names: Sequence[str], config: TrainingConfig):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.config = config
        self.data = BinnedData(self.X, config.max_bins, config.enable_efb, config.efb_conflict_threshold)
        self.model = BoostedEnsemble(list(feature_names), config.learning_rate, 0.0, [], config)
        self.raw = np.full(len(self.y), self.model.base_score)

    def _add(self, tree: Tree) -> None:
        self.model.trees.append(tree)
        self.raw += self.config.learning_rate * tree.predict_binned(self.data.bins, self.data.mapper.missing_bin)

    def boosting_round(self, t: int) -> Tree:
        """One regular round over the full training set (GOSS-sampled)."""
        cfg = self.config
        grads = compute_gradients(self.y, self.raw)
        rows = weights = None
        if cfg.uses_goss:
            rows, weights = goss_sample(grads, cfg.goss_top_rate, cfg.goss_other_rate, seed=[cfg.seed, t])
        tree = grow_tree(self.data, grads, cfg, rows, weights)
        self._add(tree)
        return tree

    def subset_round(self, rows: np.ndarray) -> Optional[Tree]:
        """One round fitted on ``rows`` only, unit weights, no sampling."""
        if len(rows) == 0:
            return None
        grads = compute_gradients(self.y, self.raw)
        tree = grow_tree(self.data, grads, self.config, np.sort(rows), None)
        self._add(tree)
        return tree

    def loss(self) -> float:
        return log_loss(self.y, self.raw)


def _training_arrays(ds: LabeledDataset):
    ds = ds.labeled()
    if len(ds) == 0:
        raise ValueError("cannot train on an empty dataset")
    if len(np.unique(ds.labels)) < 2:
        warnings.warn("training set contains a single class; the model will lean to that class")
    return ds


def train(ds: LabeledDataset, config: TrainingConfig = TrainingConfig()) -> BoostedEnsemble:
    """Plain boosting: ``config.n_rounds`` rounds, each gradients -> GOSS -> tree.

    Unlabeled (-1) rows are dropped first.
    """
    ds = _training_arrays(ds)
    booster = Booster(ds.features, ds.labels, ds.feature_names, config)
    for t in range(config.n_rounds):
        booster.boosting_round(t)
    return booster.model


def feature_importance(model: BoostedEnsemble) -> List[Tuple[str, int]]:
    """Split counts per feature, most used first (ties by feature index)."""
    counts = np.zeros(len(model.feature_names), dtype=np.int64)
    for tree in model.trees:
        np.add.at(counts, tree.split_features(), 1)
    order = sorted(range(len(counts)), key=lambda j: (-counts[j], j))
    return [(model.feature_names[j], int(counts[j])) for j in order]
