"""Class balance of the test pairs as the threshold fraction grows.

Shows how the "same" class takes over as t increases; cheap, no training.
"""

import argparse

from dpc.core import compute_threshold, split_by_experiment
from dpc.pairing import build_pair_dataset, class_balance
from dpc.synthgen import SynthConfig, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--property", default="uts")
    ap.add_argument("--fractions", default="0,0.01,0.05,0.1,0.25,0.5,1,2")
    args = ap.parse_args()

    ds, _ = generate(SynthConfig(seed=args.seed))
    train, test = split_by_experiment(ds, 0.75, args.seed)
    print(f"{'fraction':>9}{'t':>10}{'same':>8}{'A>B':>8}{'B>A':>8}{'majority':>10}")
    for f in (float(v) for v in args.fractions.split(",")):
        t = compute_threshold(train.values(args.property), f)
        bal = class_balance(build_pair_dataset(test.samples(), args.property, t))
        n = sum(bal.values())
        print(f"{f:>9g}{t.value:>10.3f}{bal[0]:>8}{bal[1]:>8}{bal[2]:>8}{max(bal.values()) / n:>10.3f}")


if __name__ == "__main__":
    main()
