"""Accuracy versus number of training experiments (k = 3, 5, ..., 15).

    python3 scripts/learning_curve.py --property max_load --arch gbt --out results/curve.csv
"""

import argparse
from pathlib import Path

from dpc.core import compute_threshold, split_by_experiment
from dpc.evaluation import learning_curve
from dpc.pairing import build_pair_dataset
from dpc.seeding import derive_seed
from dpc.synthgen import SynthConfig, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--property", default="uts")
    ap.add_argument("--kind", default="direct_regression")
    ap.add_argument("--arch", default="gbt", choices=["gbt", "mlp"])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--out", default=None, help="CSV with columns k,repeat,accuracy")
    args = ap.parse_args()

    ds, _ = generate(SynthConfig(seed=args.seed))
    train, test = split_by_experiment(ds, 0.75, derive_seed(args.seed, "split"))
    t = compute_threshold(train.values(args.property), 0.01)
    pairs = build_pair_dataset(test.samples(), args.property, t)
    curve = learning_curve(train, pairs, args.kind, args.arch, repeats=args.repeats, seed=derive_seed(args.seed, "curve"))
    print(curve.to_text(), end="")
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(curve.to_csv_text())


if __name__ == "__main__":
    main()
