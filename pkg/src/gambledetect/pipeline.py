"""End-to-end run: contracts -> addresses -> correction -> metrics.

Every stage reads its inputs from files written by earlier stages, so any
stage can be re-run on its own. A ``.partial`` marker in the output directory
names the stage in progress and is removed only after a complete run.
"""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import correction as corr
from .boosting import BoostedEnsemble, TrainingConfig, feature_importance
from .contract_features import FeatureSchema, default_schema, featurize_contracts
from .dataset_io import (LabeledDataset, ensure_dir, load_addresses, load_contracts, load_transactions,
                         read_dataset, write_dataset)
from .memory import MemoryConfig, train_with_memory, write_history
from .metrics import MetricsReport, evaluate
from .splits import SplitSpec, split_ids, write_split
from .tx_graph import build_graphs, featurize_graphs, read_graphs, write_graphs

log = logging.getLogger(__name__)

FEATURE_TABLES = {"contract": "contracts.features.csv", "address": "addresses.features.csv"}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


def read_flat_config(path) -> Dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def split_prefixed(values: Dict[str, str], prefix: str) -> Dict[str, str]:
    return {k[len(prefix):]: v for k, v in values.items() if k.startswith(prefix)}


def memory_config_from(values: Dict[str, str]):
    """``(enabled, MemoryConfig)`` from un-prefixed keys."""
    values = dict(values)
    enabled = values.pop("enabled", "true").lower() in ("1", "true", "yes", "on")
    kinds = {f.name: f.type for f in fields(MemoryConfig)}
    unknown = set(values) - set(kinds)
    if unknown:
        raise KeyError(f"unknown memory option(s): {', '.join(sorted(unknown))}")
    typed = {k: (int(v) if kinds[k] == "int" else float(v)) for k, v in values.items()}
    return enabled, MemoryConfig(**typed)


@dataclass
class PipelineConfig:
    contracts: str = "contracts.csv"
    addresses: str = "addresses.csv"
    transactions: str = "transactions.csv"
    out: str = "run"
    schema: Optional[str] = None
    seed: int = 0
    train_fraction: float = 0.8
    correction: bool = True
    correction_threshold: float = corr.DEFAULT_THRESHOLD
    memory: bool = True
    contract_training: TrainingConfig = field(default_factory=TrainingConfig)
    address_training: TrainingConfig = field(default_factory=TrainingConfig)
    memory_config: MemoryConfig = field(default_factory=MemoryConfig)

    @classmethod
    def from_values(cls, values: Dict[str, str]) -> "PipelineConfig":
        """Build from flat keys: plain fields plus ``contract.*``, ``address.*``, ``memory.*``."""
        plain = {k: v for k, v in values.items() if "." not in k}
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for k, v in plain.items():
            if k not in kinds or "Config" in kinds[k]:
                raise KeyError(f"unknown pipeline option {k!r}")
            if kinds[k] == "bool":
                kw[k] = v.lower() in ("1", "true", "yes", "on")
            elif kinds[k] == "int":
                kw[k] = int(v)
            elif kinds[k] == "float":
                kw[k] = float(v)
            else:
                kw[k] = v
        seed = str(kw.get("seed", 0))
        contract = {"seed": seed, **split_prefixed(values, "contract.")}
        address = {"seed": seed, **split_prefixed(values, "address.")}
        mem = {"seed": seed, **split_prefixed(values, "memory.")}
        enabled, mc = memory_config_from(mem)
        kw.setdefault("memory", enabled)
        unknown = {k for k in values if "." in k and k.split(".", 1)[0] not in ("contract", "address", "memory")}
        if unknown:
            raise KeyError(f"unknown option(s): {', '.join(sorted(unknown))}")
        return cls(**kw, contract_training=TrainingConfig.from_dict(contract),
                   address_training=TrainingConfig.from_dict(address), memory_config=mc)


# -- stage helpers (also used by the CLI subcommands) -----------------------

def fit_model(ds: LabeledDataset, tc: TrainingConfig, mc: MemoryConfig, use_memory: bool, out_dir: Path, stem: str):
    """Train on ``ds`` and write ``<stem>_model.txt``, ``_memory.csv``, ``_history.csv``."""
    if use_memory:
        model, memory, history = train_with_memory(ds, tc, mc)
    else:
        single = MemoryConfig(mc.replay_period, 1, mc.tolerance, mc.seed)
        model, memory, history = train_with_memory(ds, tc, single)
    model.save(out_dir / f"{stem}_model.txt")
    memory.write_csv(out_dir / f"{stem}_memory.csv", ds.feature_names)
    write_history(history, out_dir / f"{stem}_history.csv")
    return model


def write_predictions(model: BoostedEnsemble, ds: LabeledDataset, split: Optional[Dict[str, str]], path) -> None:
    proba = model.predict_proba(ds) if len(ds) else np.zeros(0)
    pred = (proba >= model.threshold).astype(np.int64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity_id", "label", "set", "proba", "pred"])
        for i, e in enumerate(ds.ids):
            w.writerow([e, int(ds.labels[i]), (split or {}).get(e, ""), repr(float(proba[i])), int(pred[i])])


def read_predictions(path) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            {"entity_id": r["entity_id"], "label": int(r["label"]), "set": r.get("set", ""),
             "proba": float(r["proba"]), "pred": int(r["pred"])}
            for r in csv.DictReader(fh)
        ]


def metrics_for(rows: List[dict], subset: Optional[str] = "test", pred_key: str = "pred") -> MetricsReport:
    chosen = [r for r in rows if r["label"] != -1 and (subset is None or r["set"] == subset)]
    return evaluate([r[pred_key] for r in chosen], [r["label"] for r in chosen])


def write_importance(model: BoostedEnsemble, path, top: int = 10) -> List[tuple]:
    ranked = feature_importance(model)[:top]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature", "split_count"])
        for k, (name, count) in enumerate(ranked, 1):
            w.writerow([k, name, count])
    return ranked


def write_metrics(reports: Dict[str, MetricsReport], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        cols = ["tp", "fp", "tn", "fn", "accuracy", "precision", "recall", "f1"]
        w.writerow(["task", *cols])
        for task, rep in reports.items():
            row = rep.as_row()
            w.writerow([task, *(row[c] if isinstance(row[c], int) else repr(row[c]) for c in cols)])


# -- the full run ------------------------------------------------------------

class _Run:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = ensure_dir(cfg.out)
        self.marker = self.out / ".partial"
        self.metrics: Dict[str, MetricsReport] = {}

    def stage(self, name, fn, *args):
        self.marker.write_text(f"{name}\n", encoding="utf-8")
        log.info("stage %s", name)
        try:
            return fn(*args)
        except Exception as exc:
            self.marker.write_text(f"{name}\n{type(exc).__name__}: {exc}\n", encoding="utf-8")
            raise PipelineError(name, exc) from exc

    def featurize_contracts(self):
        schema = FeatureSchema.from_file(self.cfg.schema) if self.cfg.schema else default_schema()
        schema.to_file(self.out / "contract_schema.txt")
        ds = featurize_contracts(load_contracts(self.cfg.contracts), schema)
        write_dataset(ds, self.out / FEATURE_TABLES["contract"])

    def classify(self, kind: str, tc: TrainingConfig):
        ds = read_dataset(self.out / FEATURE_TABLES[kind])
        split = split_ids(ds.ids, ds.labels, SplitSpec(self.cfg.train_fraction, True, self.cfg.seed))
        write_split(split, self.out / f"{kind}_split.csv")
        train_ds = ds.subset([i for i, e in enumerate(ds.ids) if split[e] == "train"])
        model = fit_model(train_ds, tc, self.cfg.memory_config, self.cfg.memory, self.out, kind)
        write_predictions(model, ds, split, self.out / f"{kind}_predictions.csv")
        write_importance(model, self.out / f"{kind}_importance.csv")
        self.metrics[kind] = metrics_for(read_predictions(self.out / f"{kind}_predictions.csv"))

    def build_graphs(self):
        addresses = load_addresses(self.cfg.addresses)
        txs = load_transactions(self.cfg.transactions)
        write_graphs(build_graphs(addresses, txs), {a.account: a.label for a in addresses}, self.out / "graphs")

    def featurize_addresses(self):
        graphs, labels = read_graphs(self.out / "graphs")
        write_dataset(featurize_graphs(graphs, labels), self.out / FEATURE_TABLES["address"])

    def correct(self):
        contract_rows = read_predictions(self.out / "contract_predictions.csv")
        address_rows = read_predictions(self.out / "address_predictions.csv")
        txs = load_transactions(self.cfg.transactions)
        index = corr.build_association(txs, [r["entity_id"] for r in contract_rows],
                                       [r["entity_id"] for r in address_rows])
        report = corr.apply_correction({r["entity_id"]: r["pred"] for r in contract_rows},
                                       {r["entity_id"]: r["pred"] for r in address_rows},
                                       index, self.cfg.correction_threshold)
        corr.write_report(report, self.out / "correction.csv")
        posterior = corr.corrected_predictions(report)
        for r in contract_rows:
            r["corrected"] = posterior[r["entity_id"]]
        with open(self.out / "contract_predictions_corrected.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["entity_id", "label", "set", "proba", "pred"])
            for r in contract_rows:
                w.writerow([r["entity_id"], r["label"], r["set"], repr(r["proba"]), r["corrected"]])
        self.metrics["contract_corrected"] = metrics_for(contract_rows, pred_key="corrected")


def run_pipeline(cfg: PipelineConfig) -> Dict[str, MetricsReport]:
    """Run every stage; returns test-split metrics keyed by task."""
    run = _Run(cfg)
    run.stage("featurize-contracts", run.featurize_contracts)
    run.stage("classify-contracts", run.classify, "contract", cfg.contract_training)
    have_addresses = run.stage("load-addresses", lambda: len(load_addresses(cfg.addresses)) > 0)
    if have_addresses:
        run.stage("build-graphs", run.build_graphs)
        run.stage("featurize-addresses", run.featurize_addresses)
        run.stage("classify-addresses", run.classify, "address", cfg.address_training)
        if cfg.correction:
            run.stage("correct", run.correct)
    else:
        warnings.warn("address file has no records; address and correction stages skipped")
    ordered = {k: run.metrics[k] for k in ("address", "contract", "contract_corrected") if k in run.metrics}
    run.stage("report", write_metrics, ordered, run.out / "metrics.csv")
    run.marker.unlink()
    return ordered
