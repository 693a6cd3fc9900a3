"""Accuracy of every backbone kind and architecture, per property, on synthetic data.

    python3 scripts/backbone_table.py --seed 0 --repeats 5 --out results/backbones.json

GBT runs once per cell (it has no random components); MLP cells report
mean +/- 95% halfwidth over ``--repeats`` initializations.
"""

import argparse
import json
from pathlib import Path

from dpc.backbones import KINDS, train_backbone
from dpc.core import compute_threshold, split_by_experiment
from dpc.evaluation import evaluate, repeated_eval
from dpc.pairing import build_pair_dataset
from dpc.seeding import derive_seed
from dpc.synthgen import SynthConfig, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--properties", default="uts,yield_strength,max_load")
    ap.add_argument("--max-pairs", type=int, default=4000, help="cap for pair-input MLP training")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    ds, _ = generate(SynthConfig(seed=args.seed))
    train, test = split_by_experiment(ds, 0.75, derive_seed(args.seed, "split"))
    rows = []
    for prop in args.properties.split(","):
        t = compute_threshold(train.values(prop), 0.01)
        pairs = build_pair_dataset(test.samples(), prop, t)
        for kind in KINDS:
            gbt = evaluate(train_backbone(kind, "gbt", train, prop, t), pairs).accuracy
            cap = None if kind == "direct_regression" else args.max_pairs
            mlp = repeated_eval(kind, "mlp", train, pairs, args.repeats, derive_seed(args.seed, "mlp"), max_pairs=cap)
            rows.append({"property": prop, "kind": kind, "gbt": gbt, "mlp_mean": mlp.mean,
                         "mlp_halfwidth": mlp.halfwidth, "n_pairs": len(pairs), "threshold": t.value})
            print(f"{prop:<15}{kind:<24}gbt {100 * gbt:6.2f}   mlp {mlp.summary()}", flush=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
