"""Write the synthetic benchmark corpus and its embedding table.

    python scripts/make_synthetic.py [--out data] [--seed 0]

Produces ``corpus.tsv`` and ``table.txt``; ``configs/benchmark.cfg`` reads them
from ``data/``.
"""

import argparse
from pathlib import Path

from parfit.corpus import save_corpus
from parfit.embedding import save_embedding_table
from parfit.synthetic import SyntheticConfig, synthetic_corpus, synthetic_embedding_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, default=300, help="pairs per class")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pairs = synthetic_corpus(SyntheticConfig(n_paraphrase=args.n, n_nonparaphrase=args.n, seed=args.seed))
    save_corpus(pairs, out / "corpus.tsv")
    save_embedding_table(synthetic_embedding_table(16, 8, seed=args.seed), out / "table.txt")
    print(f"wrote {len(pairs)} pairs and a 16-dim table to {out}")


if __name__ == "__main__":
    main()
