"""Write a synthetic contracts/addresses/transactions corpus in the pipeline's CSV layout."""
import argparse

from gambledetect.synthetic import make_corpus, write_corpus


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="data/synthetic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="multiply every default class size")
    args = p.parse_args(argv)
    sizes = dict(n_gambling_contracts=60, n_other_contracts=240, n_unlabeled_contracts=60,
                 n_gamblers=600, n_other_addresses=2400, n_unlabeled_addresses=300)
    corpus = make_corpus(**{k: max(1, int(v * args.scale)) for k, v in sizes.items()}, seed=args.seed)
    paths = write_corpus(corpus, args.out)
    print(f"{len(corpus.contracts)} contracts, {len(corpus.addresses)} addresses, "
          f"{len(corpus.transactions)} transactions -> {args.out}")
    for name, path in paths.items():
        print(f"  {name}: {path}")


if __name__ == "__main__":
    main()
