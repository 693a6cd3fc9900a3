"""Command-line front end: ``dpc synth | train | eval | curve | compare | rank``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure
during training.  All randomness comes from ``--seed`` through
:func:`dpc.seeding.derive_seed`.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backbones import DIRECT_REGRESSION, KINDS, DpcModel, predict_pair, predict_value, rank_candidates, train_backbone
from .core import Dataset, Threshold, compute_threshold, load_dataset, split_by_experiment
from .errors import ConfigError, DpcError, InvalidConfig, TrainingError
from .evaluation import evaluate, learning_curve, repeated_eval
from .learners.boosting import GbtParams
from .learners.mlp import MlpParams
from .pairing import FIRST_HIGHER, SECOND_HIGHER, build_pair_dataset
from .seeding import derive_seed
from .synthgen import SynthConfig, generate, read_truth_manifest, write_truth_manifest

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
SCHEMA_SUFFIX = ".schema.json"


def _csv_list(text, cast=str):
    return [cast(v.strip()) for v in text.split(",") if v.strip()]


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _write_manifest(args, out_dir: Path, inputs: dict, outputs: list[str]) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {
        "tool": "dpc",
        "tool_version": __version__,
        "command": args.command,
        "config": config,
        "seed_derivation": "sha256(f'{seed}:{purpose}')[:8] little-endian",
        "inputs": {str(p): _sha256(p) for p in inputs.values() if p},
        "outputs": outputs,
        # excluded from reproducibility checks
        "volatile": {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()},
    }
    _write_json(out_dir / "manifest.json", doc)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _property_names(args) -> list[str]:
    if args.properties:
        return _csv_list(args.properties)
    sidecar = Path(str(args.data) + SCHEMA_SUFFIX)
    if not sidecar.exists():
        sidecar = Path(args.data).with_suffix(SCHEMA_SUFFIX)
    if sidecar.exists():
        return list(json.loads(sidecar.read_text(encoding="utf-8"))["properties"])
    raise InvalidConfig(f"no --properties given and no sidecar {sidecar} found")


def _load(args) -> Dataset:
    return load_dataset(args.data, _property_names(args))


def _kind(text: str) -> str:
    kind = text.replace("-", "_")
    if kind not in KINDS:
        raise argparse.ArgumentTypeError(f"choose from {[k.replace('_', '-') for k in KINDS]}")
    return kind


def _learner_params(args):
    if args.arch == "gbt":
        return GbtParams(
            n_estimators=args.n_estimators,
            learning_rate=0.1 if args.learning_rate is None else args.learning_rate,
            max_depth=args.max_depth,
            reg_lambda=args.reg_lambda,
            min_child_weight=args.min_child_weight,
        )
    if args.arch == "mlp":
        return MlpParams(
            hidden=tuple(_csv_list(args.hidden, int)),
            learning_rate=0.009 if args.learning_rate is None else args.learning_rate,
            epochs=args.epochs,
        )
    return None


def _train_kwargs(args) -> dict:
    kw = {
        "params": _learner_params(args),
        "max_pairs": args.max_pairs,
        "class_weight": None if args.class_weight == "none" else args.class_weight,
        "symmetrize": args.symmetrize,
    }
    if args.arch == "oracle":
        if not args.truth:
            raise InvalidConfig("--arch oracle needs --truth (the truth.json written by synth)")
        kw["truth"] = read_truth_manifest(args.truth)
    return kw


def _split(args, ds: Dataset) -> tuple[Dataset, Dataset]:
    if args.train_experiments or args.test_experiments:
        train_ids = _csv_list(args.train_experiments or "")
        test_ids = _csv_list(args.test_experiments or "")
        if not train_ids:
            train_ids = [e for e in ds.experiment_ids if e not in set(test_ids)]
        if not test_ids:
            test_ids = [e for e in ds.experiment_ids if e not in set(train_ids)]
        if set(train_ids) & set(test_ids):
            raise InvalidConfig("train and test experiments overlap")
        return ds.select(train_ids), ds.select(test_ids)
    return split_by_experiment(ds, args.train_fraction, derive_seed(args.seed, "split"))


def _threshold(args, train: Dataset) -> Threshold:
    if args.threshold_absolute is not None:
        return Threshold.absolute(args.threshold_absolute)
    return compute_threshold(train.values(args.property), args.threshold_fraction)


def _emit(args, text: str, doc) -> None:
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- subcommands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.config:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    else:
        cfg = {}
    cfg.setdefault("n_experiments", args.experiments)
    cfg.setdefault("samples_per_experiment", args.samples)
    cfg.setdefault("experiment_noise", args.experiment_noise)
    cfg.setdefault("sample_noise", args.sample_noise)
    cfg.setdefault("truth", args.truth_function)
    cfg.setdefault("seed", args.seed)
    if args.properties:
        cfg.setdefault("properties", _csv_list(args.properties))
    config = SynthConfig.from_dict(cfg)
    ds, truth = generate(config)
    out = _out_dir(args)
    ds.write_csv(out / "dataset.csv")
    _write_json(out / ("dataset.csv" + SCHEMA_SUFFIX), {"properties": list(ds.property_names),
                                                        "features": list(ds.feature_names)})
    write_truth_manifest(out / "truth.json", config, truth)
    _write_manifest(args, out, {"config": args.config}, ["dataset.csv", "dataset.csv" + SCHEMA_SUFFIX, "truth.json"])
    _emit(args, f"wrote {len(ds)} samples from {ds.n_experiments} experiments to {out / 'dataset.csv'}",
          {"samples": len(ds), "experiments": ds.n_experiments, "path": str(out / "dataset.csv")})
    return EXIT_OK


def cmd_train(args) -> int:
    ds = _load(args)
    train, test = _split(args, ds)
    t = _threshold(args, train)
    model = train_backbone(args.backbone, args.arch, train, args.property, t,
                           seed=derive_seed(args.seed, "train"), **_train_kwargs(args))
    model.manifest["test_experiments"] = test.experiment_ids
    out = _out_dir(args)
    model.save(out / "model.json")
    _write_json(out / "split.json", {"train": train.experiment_ids, "test": test.experiment_ids})
    _write_manifest(args, out, {"data": args.data, "truth": args.truth}, ["model.json", "split.json"])
    m = model.manifest
    _emit(args,
          f"trained {m['kind']} / {m['architecture']} on {m['n_train_samples']} samples "
          f"({m['n_training_rows']} training rows), t = {t.value:.6g}; wrote {out / 'model.json'}",
          {"model": str(out / "model.json"), "kind": m["kind"], "architecture": m["architecture"],
           "n_training_rows": m["n_training_rows"], "threshold": t.to_dict()})
    return EXIT_OK


def cmd_eval(args) -> int:
    ds = _load(args)
    out = _out_dir(args)
    inputs = {"data": args.data, "model": args.model, "truth": args.truth}
    if args.model:
        model = DpcModel.load(args.model)
        if args.test_experiments:
            test_ids = _csv_list(args.test_experiments)
        else:
            test_ids = model.manifest.get("test_experiments") or [
                e for e in ds.experiment_ids if e not in set(model.manifest.get("train_experiments", []))]
        test = ds.select(test_ids)
        pairs = build_pair_dataset(test.samples(), model.property_name, model.threshold)
        report = evaluate(model, pairs)
        doc, text = report.to_dict(), report.to_text()
    else:
        if not args.property:
            raise InvalidConfig("--property is required when no --model is given")
        train, test = _split(args, ds)
        t = _threshold(args, train)
        pairs = build_pair_dataset(test.samples(), args.property, t)
        base = derive_seed(args.seed, "train")
        if args.repeats >= 2:
            rep = repeated_eval(args.backbone, args.arch, train, pairs, args.repeats, base, **_train_kwargs(args))
            doc = rep.to_dict()
            doc["n_pairs"] = len(pairs)
            text = (f"pairs     {len(pairs)}\nrepeats   {args.repeats}\n"
                    f"accuracy  {rep.summary()} (95% CI halfwidth, percent)\n"
                    + "".join(f"  seed {s}: {100 * a:.2f}%\n" for s, a in zip(rep.seeds, rep.accuracies)))
        else:
            model = train_backbone(args.backbone, args.arch, train, args.property, t, seed=base, **_train_kwargs(args))
            report = evaluate(model, pairs)
            doc, text = report.to_dict(), report.to_text()
    _write_json(out / "report.json", doc)
    (out / "report.txt").write_text(text, encoding="utf-8")
    _write_manifest(args, out, inputs, ["report.json", "report.txt"])
    _emit(args, text, doc)
    return EXIT_OK


def cmd_curve(args) -> int:
    if not args.property:
        raise InvalidConfig("--property is required")
    ds = _load(args)
    train, test = _split(args, ds)
    t = _threshold(args, train)
    pairs = build_pair_dataset(test.samples(), args.property, t)
    curve = learning_curve(train, pairs, args.backbone, args.arch, _csv_list(args.ks, int), args.repeats,
                           derive_seed(args.seed, "curve"), **_train_kwargs(args))
    out = _out_dir(args)
    (out / "curve.csv").write_text(curve.to_csv_text(), encoding="utf-8")
    doc = curve.to_dict()
    doc["n_pairs"] = len(pairs)
    doc["threshold"] = t.to_dict()
    _write_json(out / "curve.json", doc)
    _write_manifest(args, out, {"data": args.data, "truth": args.truth}, ["curve.csv", "curve.json"])
    _emit(args, curve.to_text(), doc)
    return EXIT_OK


def _read_feature_rows(path, feature_names) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.DictReader(fh)]
    if not rows:
        raise InvalidConfig(f"{path} has no rows")
    missing = [f for f in feature_names if f not in rows[0]]
    if missing:
        raise InvalidConfig(f"{path} lacks feature columns {missing}")
    try:
        X = np.array([[float(r[f]) for f in feature_names] for r in rows])
    except ValueError as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    ids = [r.get("candidate_id") or str(i + 1) for i, r in enumerate(rows)]
    return ids, X


def cmd_compare(args) -> int:
    model = DpcModel.load(args.model)
    names = model.manifest.get("feature_names") or [f"x{i}" for i in range(model.n_features)]
    if args.pair_csv:
        _, X = _read_feature_rows(args.pair_csv, names)
        if len(X) != 2:
            raise InvalidConfig(f"{args.pair_csv} must hold exactly 2 rows (A then B), found {len(X)}")
        a, b = X
    elif args.a and args.b:
        a = np.array(_csv_list(args.a, float))
        b = np.array(_csv_list(args.b, float))
    else:
        raise InvalidConfig("give --a and --b, or --pair-csv")
    label = predict_pair(model, a, b)
    t = model.threshold.value
    verdict = {FIRST_HIGHER: "A higher", SECOND_HIGHER: "B higher"}.get(label, "same")
    text = verdict if label else f"same within threshold t={t:.6g}"
    doc = {"verdict": verdict, "label": int(label), "threshold": t, "property": model.property_name,
           "predicted": None}
    if model.kind == DIRECT_REGRESSION:
        va, vb = predict_value(model, a), predict_value(model, b)
        doc["predicted"] = {"A": va, "B": vb}
        text += f"\npredicted {model.property_name}: A = {va:.6g}, B = {vb:.6g}"
    _emit(args, text, doc)
    return EXIT_OK


def cmd_rank(args) -> int:
    model = DpcModel.load(args.model)
    names = model.manifest.get("feature_names") or [f"x{i}" for i in range(model.n_features)]
    ids, X = _read_feature_rows(args.candidates, names)
    ranked = rank_candidates(model, X)
    values = model.values(X) if model.kind == DIRECT_REGRESSION else None
    rows = []
    for pos, r in enumerate(ranked, start=1):
        row = {"rank": pos, "candidate": ids[r.index], "index": r.index, "wins": r.wins, "same": r.same,
               "losses": r.losses}
        if values is not None:
            row["predicted"] = float(values[r.index])
        rows.append(row)
    header = f"{'rank':>4}  {'candidate':<12}{'wins':>6}{'same':>6}{'losses':>8}"
    if values is not None:
        header += f"{'predicted':>14}"
    lines = [header]
    for row in rows:
        line = f"{row['rank']:>4}  {row['candidate']:<12}{row['wins']:>6}{row['same']:>6}{row['losses']:>8}"
        if values is not None:
            line += f"{row['predicted']:>14.6g}"
        lines.append(line)
    _emit(args, "\n".join(lines), {"property": model.property_name, "threshold": model.threshold.value,
                                   "ranking": rows})
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="master seed; every random stream derives from it")
    g.add_argument("--json", action="store_true", help="print machine-readable JSON instead of text")
    g.add_argument("--out-dir", default=".", help="directory for output files")
    g.add_argument("--properties", default=None,
                   help="comma-separated property column names (otherwise read from the dataset's "
                        f"'{SCHEMA_SUFFIX}' sidecar)")
    return p


def _data_flags(p: argparse.ArgumentParser, property_required: bool) -> None:
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--property", required=property_required, default=None,
                   help="property to compare, e.g. uts, max_load, yield_strength")


def _split_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("split and threshold")
    g.add_argument("--train-fraction", type=float, default=0.75, help="fraction of experiments used for training")
    g.add_argument("--train-experiments", default=None, help="explicit comma-separated training experiment ids")
    g.add_argument("--test-experiments", default=None, help="explicit comma-separated test experiment ids")
    g.add_argument("--threshold-fraction", type=float, default=0.01,
                   help="t as a fraction of the training property's sample std dev")
    g.add_argument("--threshold-absolute", type=float, default=None, help="absolute t; overrides --threshold-fraction")


def _model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("backbone and learner")
    g.add_argument("--backbone", type=_kind, default=DIRECT_REGRESSION,
                   help="direct-regression, difference-regression or direct-classification")
    g.add_argument("--arch", choices=["gbt", "mlp", "oracle"], default="gbt",
                   help="gradient-boosted trees, MLP, or the synthetic ground truth (direct-regression only)")
    g.add_argument("--truth", default=None, help="truth.json from synth (for --arch oracle)")
    g.add_argument("--learning-rate", type=float, default=None, help="default: 0.1 for gbt, 0.009 (Adam) for mlp")
    g.add_argument("--n-estimators", type=int, default=1000, help="gbt boosting rounds")
    g.add_argument("--max-depth", type=int, default=6, help="gbt tree depth")
    g.add_argument("--reg-lambda", type=float, default=1.0, help="gbt leaf L2 penalty")
    g.add_argument("--min-child-weight", type=float, default=1.0, help="gbt minimum child hessian sum")
    g.add_argument("--hidden", default="35,35", help="mlp hidden layer widths")
    g.add_argument("--epochs", type=int, default=2000, help="mlp full-batch Adam epochs")
    g.add_argument("--max-pairs", type=int, default=None, help="cap on training pairs for pair-input backbones")
    g.add_argument("--class-weight", choices=["none", "balanced"], default="none",
                   help="inverse-frequency class weighting for direct-classification")
    g.add_argument("--symmetrize", action="store_true",
                   help="average both pair orderings for pair-input backbones")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="dpc", description=__doc__.splitlines()[0], formatter_class=fmt,
                                     parents=[_global_flags()])
    parser.add_argument("--version", action="version", version=f"dpc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags()]

    p = sub.add_parser("synth", help="generate a synthetic dataset", parents=common, formatter_class=fmt)
    p.add_argument("--experiments", type=int, default=20, help="number of experiments")
    p.add_argument("--samples", type=int, default=10, help="samples per experiment")
    p.add_argument("--experiment-noise", type=float, default=5.0, help="std of the per-experiment offset")
    p.add_argument("--sample-noise", type=float, default=2.0, help="std of the per-sample noise")
    p.add_argument("--truth-function", default="quadratic_interaction", help="ground-truth function id")
    p.add_argument("--config", default=None, help="JSON file with SynthConfig fields (overrides flags)")
    p.add_argument("-o", dest="out_dir", default=argparse.SUPPRESS, help="alias for --out-dir")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a backbone and save it", parents=common, formatter_class=fmt)
    _data_flags(p, True)
    _split_flags(p)
    _model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate pairwise accuracy on held-out experiments", parents=common,
                       formatter_class=fmt)
    _data_flags(p, False)
    p.add_argument("--model", default=None, help="saved model; otherwise train from the flags below")
    p.add_argument("--repeats", type=int, default=1, help="seeds to train and evaluate (>= 2 gives a 95%% CI)")
    _split_flags(p)
    _model_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("curve", help="learning curve over number of training experiments", parents=common,
                       formatter_class=fmt)
    _data_flags(p, True)
    p.add_argument("--ks", default="3,5,7,9,11,13,15", help="training-experiment counts")
    p.add_argument("--repeats", type=int, default=5, help="random subsets per k")
    _split_flags(p)
    _model_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("compare", help="which of two parameter sets gives the higher property?", parents=common,
                       formatter_class=fmt)
    p.add_argument("--model", required=True, help="saved model")
    p.add_argument("--a", default=None, help="comma-separated parameter vector A")
    p.add_argument("--b", default=None, help="comma-separated parameter vector B")
    p.add_argument("--pair-csv", default=None, help="CSV with feature columns and exactly two rows (A, B)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("rank", help="rank candidate parameter sets by pairwise wins", parents=common,
                       formatter_class=fmt)
    p.add_argument("--model", required=True, help="saved model")
    p.add_argument("--candidates", required=True, help="CSV with feature columns, optional candidate_id")
    p.set_defaults(func=cmd_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"dpc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"dpc {args.command}: training failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"dpc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DpcError as exc:
        print(f"dpc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
