"""Compare replay-memory training against plain boosting on imbalanced synthetic data.

Prints per-seed test F1 for both trainers and the mean difference.
"""
import argparse
import time

import numpy as np

from gambledetect.boosting import TrainingConfig
from gambledetect.dataset_io import LabeledDataset
from gambledetect.memory import MemoryConfig, train_with_memory
from gambledetect.metrics import evaluate
from gambledetect.splits import SplitSpec, split_ids


def run_seed(seed, tc, mc, n):
    from gambledetect.synthetic import make_imbalanced
    X, y = make_imbalanced(n=n, seed=seed)
    ids = [f"s{i}" for i in range(len(y))]
    split = split_ids(ids, y, SplitSpec(0.8, True, seed))
    ds = LabeledDataset(ids, X, y, [f"x{j}" for j in range(X.shape[1])])
    train = ds.subset([i for i, e in enumerate(ids) if split[e] == "train"])
    test = ds.subset([i for i, e in enumerate(ids) if split[e] == "test"])
    scores = {}
    for name, outer in (("plain", 1), ("memory", mc.max_outer_iterations)):
        cfg = MemoryConfig(mc.replay_period, outer, mc.tolerance, seed)
        model, memory, history = train_with_memory(train, TrainingConfig(**{**tc.to_dict(), "seed": seed}), cfg)
        scores[name] = evaluate(model.predict(test), test.labels).f1
        scores[name + "_iters"] = len(history)
    return scores


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--n", type=int, default=1500)
    p.add_argument("--rounds", type=int, default=100)
    args = p.parse_args(argv)
    tc = TrainingConfig(n_rounds=args.rounds)
    mc = MemoryConfig()
    t0 = time.perf_counter()
    rows = [run_seed(s, tc, mc, args.n) for s in range(args.seeds)]
    for s, r in enumerate(rows):
        print(f"seed={s} plain_f1={r['plain']:.4f} memory_f1={r['memory']:.4f} outer_iterations={r['memory_iters']}")
    plain = np.mean([r["plain"] for r in rows])
    mem = np.mean([r["memory"] for r in rows])
    print(f"mean plain_f1={plain:.4f} memory_f1={mem:.4f} diff={mem - plain:+.4f} ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
