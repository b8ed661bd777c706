"""Command-line entry point: ``gambledetect <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import correction as corr
from .boosting import BoostedEnsemble, TrainingConfig, feature_importance
from .contract_features import FeatureSchema, default_schema, featurize_contracts
from .dataset_io import (SchemaMismatchError, ensure_dir, load_addresses, load_contracts, load_transactions,
                         read_dataset, read_labels, write_dataset)
from .evm_disasm import disassemble, format_stream, parse_hex
from .pipeline import (PipelineConfig, PipelineError, fit_model, memory_config_from, metrics_for,
                       read_flat_config, read_predictions, run_pipeline, split_prefixed, write_importance,
                       write_metrics, write_predictions)
from .splits import read_split
from .tx_graph import build_graphs, featurize_graphs, read_graphs, write_graphs


def _cmd_disasm(args):
    src = args.bytecode
    if os.path.exists(src):
        src = Path(src).read_text(encoding="utf-8")
    print(format_stream(disassemble(parse_hex(src))))


def _cmd_featurize_contracts(args):
    schema = FeatureSchema.from_file(args.schema) if args.schema else default_schema()
    ds = featurize_contracts(load_contracts(args.contracts), schema)
    write_dataset(ds, args.out)
    print(f"wrote {len(ds)} rows x {len(schema)} opcode features to {args.out}")


def _cmd_build_graphs(args):
    addresses = load_addresses(args.addresses)
    graphs = build_graphs(addresses, load_transactions(args.transactions))
    write_graphs(graphs, {a.account: a.label for a in addresses}, args.out)
    print(f"wrote {len(graphs)} graphs to {args.out}")


def _cmd_featurize_addresses(args):
    graphs, labels = read_graphs(args.graphs)
    ds = featurize_graphs(graphs, labels)
    write_dataset(ds, args.out)
    print(f"wrote {len(ds)} rows to {args.out}")


def _overrides(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ValueError(f"--set expects key=value, got {pair!r}")
        k, v = pair.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _cmd_train(args):
    values = read_flat_config(args.config) if args.config else {}
    values.update(_overrides(args.set))
    tc = TrainingConfig.from_dict({k: v for k, v in values.items() if not k.startswith("memory.")})
    use_memory, mc = memory_config_from(split_prefixed(values, "memory."))
    ds = read_dataset(args.features)
    if args.labels:
        labels = read_labels(args.labels)
        ds.labels[:] = [labels.get(e, -1) for e in ds.ids]
    if args.split:
        split = read_split(args.split)
        ds = ds.subset([i for i, e in enumerate(ds.ids) if split.get(e) == "train"])
    model_out = Path(args.model_out)
    out_dir = model_out.parent
    stem = "_train"
    model = fit_model(ds, tc, mc, use_memory, ensure_dir(out_dir), stem)
    os.replace(out_dir / f"{stem}_model.txt", model_out)
    os.replace(out_dir / f"{stem}_memory.csv", args.memory_out or model_out.with_suffix(".memory.csv"))
    os.replace(out_dir / f"{stem}_history.csv", args.history_out or model_out.with_suffix(".history.csv"))
    print(f"trained {len(model.trees)} trees -> {model_out}")


def _cmd_predict(args):
    model = BoostedEnsemble.load(args.model)
    ds = read_dataset(args.features)
    split = read_split(args.split) if args.split else None
    write_predictions(model, ds, split, args.out)
    print(f"wrote {len(ds)} predictions to {args.out}")


def _cmd_correct(args):
    contract_rows = read_predictions(args.contract_preds)
    address_rows = read_predictions(args.address_preds)
    index = corr.build_association(load_transactions(args.transactions),
                                   [r["entity_id"] for r in contract_rows], [r["entity_id"] for r in address_rows])
    report = corr.apply_correction({r["entity_id"]: r["pred"] for r in contract_rows},
                                   {r["entity_id"]: r["pred"] for r in address_rows}, index, args.threshold)
    corr.write_report(report, args.report)
    print(f"{sum(e.flipped for e in report)} of {sum(e.prior for e in report)} gambling predictions flipped")
    if args.sweep:
        for t in [x / 20 for x in range(21)]:
            post = corr.corrected_predictions(corr.apply_correction(
                {r["entity_id"]: r["pred"] for r in contract_rows},
                {r["entity_id"]: r["pred"] for r in address_rows}, index, t))
            rows = [r | {"post": post[r["entity_id"]]} for r in contract_rows]
            m = metrics_for(rows, subset=args.subset or None, pred_key="post")
            print(f"threshold={t:.2f} precision={m.precision:.4f} recall={m.recall:.4f} f1={m.f1:.4f}")


def _cmd_evaluate(args):
    rows = read_predictions(args.predictions)
    m = metrics_for(rows, subset=args.subset or None)
    if args.out:
        write_metrics({Path(args.predictions).stem: m}, args.out)
    print(f"tp={m.tp} fp={m.fp} tn={m.tn} fn={m.fn} accuracy={m.accuracy:.4f} "
          f"precision={m.precision:.4f} recall={m.recall:.4f} f1={m.f1:.4f}")


def _cmd_importance(args):
    model = BoostedEnsemble.load(args.model)
    if args.out:
        ranked = write_importance(model, args.out, args.top)
    else:
        ranked = feature_importance(model)[: args.top]
    for k, (name, count) in enumerate(ranked, 1):
        print(f"{k:2d} {name} {count}")


def _cmd_pipeline(args):
    values = read_flat_config(args.config) if args.config else {}
    for key in ("contracts", "addresses", "transactions", "out", "schema", "seed", "train_fraction",
                "correction_threshold"):
        v = getattr(args, key)
        if v is not None:
            values[key] = str(v)
    if args.no_correction:
        values["correction"] = "false"
    if args.no_memory:
        values["memory"] = "false"
    values.update(_overrides(args.set))
    metrics = run_pipeline(PipelineConfig.from_values(values))
    for task, m in metrics.items():
        print(f"{task:20s} accuracy={m.accuracy:.4f} precision={m.precision:.4f} "
              f"recall={m.recall:.4f} f1={m.f1:.4f}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gambledetect", description="Detect gambling contracts and addresses on Ethereum.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("disasm", help="print one instruction per line: offset mnemonic [operand]")
    s.add_argument("bytecode", help="hex string (0x optional) or a file containing one")
    s.set_defaults(func=_cmd_disasm)

    s = sub.add_parser("featurize-contracts", help="opcode counts per contract")
    s.add_argument("--contracts", required=True)
    s.add_argument("--schema", help="one mnemonic per line (default: built-in 84-opcode schema)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_featurize_contracts)

    s = sub.add_parser("build-graphs", help="per-address transaction edge lists")
    s.add_argument("--transactions", required=True)
    s.add_argument("--addresses", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_build_graphs)

    s = sub.add_parser("featurize-addresses", help="16 graph metrics per address")
    s.add_argument("--graphs", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_featurize_addresses)

    defaults = TrainingConfig()
    opts = ", ".join(f"{k}={v}" for k, v in defaults.to_dict().items())
    s = sub.add_parser(
        "train", help="train a boosted classifier with replay memory",
        description=f"Training options (key=value) and defaults: {opts}; "
                    "memory.enabled=true, memory.replay_period=5, memory.max_outer_iterations=3, "
                    "memory.tolerance=0.0001, memory.seed=0")
    s.add_argument("--features", required=True)
    s.add_argument("--labels", help="account,label file overriding the table's labels")
    s.add_argument("--split", help="split file; only 'train' rows are used")
    s.add_argument("--config", help="flat key=value file")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one option")
    s.add_argument("--model-out", required=True)
    s.add_argument("--memory-out")
    s.add_argument("--history-out")
    s.set_defaults(func=_cmd_train)

    s = sub.add_parser("predict", help="score a feature table")
    s.add_argument("--features", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--split")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_predict)

    s = sub.add_parser("correct", help="flip gambling contracts with too few gambling-predicted addresses")
    s.add_argument("--contract-preds", required=True)
    s.add_argument("--address-preds", required=True)
    s.add_argument("--transactions", required=True)
    s.add_argument("--threshold", type=float, default=corr.DEFAULT_THRESHOLD)
    s.add_argument("--report", required=True)
    s.add_argument("--sweep", action="store_true", help="also print precision/recall for thresholds 0..1")
    s.add_argument("--subset", default="test", help="split set used by --sweep ('' for all labeled)")
    s.set_defaults(func=_cmd_correct)

    s = sub.add_parser("evaluate", help="accuracy/precision/recall/F1 of a prediction file")
    s.add_argument("--predictions", required=True)
    s.add_argument("--subset", default="test", help="split set to score ('' for all labeled rows)")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_evaluate)

    s = sub.add_parser("importance", help="split-count feature importance")
    s.add_argument("--model", required=True)
    s.add_argument("--top", type=int, default=10)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_importance)

    s = sub.add_parser(
        "pipeline", help="run every stage end to end",
        description="Defaults: seed=0, train_fraction=0.8 (stratified), correction=true, "
                    "correction_threshold=0.8, memory=true. Per-classifier training options go under "
                    "contract.* and address.*, memory options under memory.*")
    s.add_argument("--config", help="flat key=value file")
    s.add_argument("--contracts")
    s.add_argument("--addresses")
    s.add_argument("--transactions")
    s.add_argument("--out")
    s.add_argument("--schema")
    s.add_argument("--seed", type=int)
    s.add_argument("--train-fraction", dest="train_fraction", type=float)
    s.add_argument("--correction-threshold", dest="correction_threshold", type=float)
    s.add_argument("--no-correction", action="store_true")
    s.add_argument("--no-memory", action="store_true")
    s.add_argument("--set", action="append", metavar="KEY=VALUE")
    s.set_defaults(func=_cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, SchemaMismatchError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    return 0

if __name__ == "__main__":
    sys.exit(main())
