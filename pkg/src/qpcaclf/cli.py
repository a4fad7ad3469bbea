"""Command-line interface: train, classify, prob, eval, inspect.

Exit status: 0 for "yes" (or success for commands without a decision),
1 for "no", 2 for any error.
"""
import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import classifier as clf
from . import model_io
from .exceptions import DimensionError, QpcaError, UsageError
from .pca import DEFAULT_VARIANCE_THRESHOLD, fit_components

log = logging.getLogger("qpcaclf")

DEFAULT_SEED = 1234
SEED_ENV = "QPCACLF_SEED"

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2


def _emit(args, record, text_lines):
    if args.records:
        print(json.dumps(record, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _fmt(x):
    return repr(float(x))


def derive_seed(master_seed, path):
    """Per-file seed from the master seed and the file path."""
    digest = hashlib.sha256(f"{master_seed}\0{path}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def _load_one(path, args):
    return model_io.to_feature_vector(model_io.load_image(path, args.max_value), str(path))


def _check_n(model, fv):
    if len(fv) != model.n:
        raise DimensionError(
            f"{fv.source}: image has {len(fv)} pixels, model expects {model.n}"
        )


# --- subcommands ----------------------------------------------------------


def cmd_train(args):
    features = model_io.load_features(args.inputs, args.max_value)
    if not features:
        raise UsageError("no training images found")
    n_components = args.components
    if n_components is not None and len(features) == 1 and n_components > 1:
        log.warning("single training image has rank 1; using 1 component")
        n_components = 1
    tau = args.variance_threshold
    if n_components is None and tau is None:
        tau = DEFAULT_VARIANCE_THRESHOLD
    lengths = {len(f) for f in features}
    if len(lengths) > 1:
        raise DimensionError(f"training images differ in pixel count: {sorted(lengths)}")
    pcs = fit_components(
        [f.values for f in features],
        n_components=n_components,
        variance_threshold=tau if n_components is None else None,
        center=args.center,
    )
    metadata = {
        "sample_count": len(features),
        "centered": bool(args.center),
        "created": model_io.creation_timestamp(),
        "sources": [Path(f.source).name for f in features],
    }
    if n_components is None:
        metadata["variance_threshold"] = tau
    else:
        metadata["components_requested"] = n_components
    model = clf.ClassifierModel.from_components(pcs, metadata)
    model_io.save_model(model, args.model)
    sv = [float(v) for v in pcs.singular_values]
    record = {
        "command": "train",
        "model": str(args.model),
        "samples": len(features),
        "n": model.n,
        "s": model.s,
        "k": model.k,
        "singular_values": sv,
    }
    _emit(
        args,
        record,
        [
            f"model: {args.model}",
            f"samples: {len(features)}",
            f"n: {model.n}",
            f"s: {model.s}",
            f"k: {model.k}",
            "singular values: " + " ".join(_fmt(v) for v in sv),
        ],
    )
    return 0


def cmd_classify(args):
    model = model_io.load_model(args.model)
    fv = _load_one(args.image, args)
    _check_n(model, fv)
    result = clf.classify(model, fv.values, args.seed, args.trials)
    record = {"command": "classify", "image": str(args.image), **result.as_record()}
    _emit(
        args,
        record,
        [
            f"decision: {result.decision}",
            f"trials run: {result.trials_run} of {result.n_trials}",
            f"per-trial probability: {_fmt(result.per_trial_probability)}",
            f"analytic overall no probability: {_fmt(result.analytic_overall_no_probability)}",
            f"seed: {result.seed}",
        ],
    )
    return EXIT_YES if result.decision is clf.Decision.YES else EXIT_NO


def cmd_prob(args):
    model = model_io.load_model(args.model)
    fv = _load_one(args.image, args)
    _check_n(model, fv)
    report = clf.analytic_report(model, fv.values, args.trials)
    record = {"command": "prob", "image": str(args.image), **report}
    _emit(
        args,
        record,
        [
            f"likelihood M: {_fmt(report['likelihood'])}",
            f"per-trial probability: {_fmt(report['per_trial_probability'])}",
            f"overall yes probability: {_fmt(report['analytic_overall_yes_probability'])}",
            f"trials: {report['n_trials']}",
        ],
    )
    return 0


def _labelled_files(args):
    pos, neg = list(args.positive or []), list(args.negative or [])
    if args.dataset is not None:
        root = Path(args.dataset)
        pos.append(root / "positive")
        neg.append(root / "negative")
    items = []
    for label, dirs in (("positive", pos), ("negative", neg)):
        existing = [d for d in dirs if Path(d).exists()]
        items.extend((label, p) for p in model_io.iter_image_paths(existing))
    return items


def cmd_eval(args):
    model = model_io.load_model(args.model)
    items = _labelled_files(args)
    if not items:
        raise UsageError("evaluation batch is empty")

    def run(item):
        label, path = item
        fv = _load_one(path, args)
        _check_n(model, fv)
        seed = derive_seed(args.seed, Path(path).as_posix())
        return label, path, clf.classify(model, fv.values, seed, args.trials)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(run, items))  # map preserves input order

    counts = {"tp": 0, "fn": 0, "fp": 0, "tn": 0}
    mean_yes = {}
    for label, path, res in results:
        yes = res.decision is clf.Decision.YES
        key = ("tp" if yes else "fn") if label == "positive" else ("fp" if yes else "tn")
        counts[key] += 1
        mean_yes.setdefault(label, []).append(res.analytic_overall_yes_probability)
        if args.records:
            print(
                json.dumps(
                    {"command": "eval", "label": label, "image": Path(path).as_posix(),
                     **res.as_record()},
                    sort_keys=True,
                )
            )
    summary = {
        "command": "eval",
        "summary": True,
        "count": len(results),
        **counts,
        "mean_analytic_yes": {k: float(np.mean(v)) for k, v in sorted(mean_yes.items())},
    }
    lines = [f"{Path(p).as_posix()}\t{label}\t{r.decision}" for label, p, r in results]
    lines.append(
        "tp={tp} fn={fn} fp={fp} tn={tn}".format(**counts)
    )
    for label, m in summary["mean_analytic_yes"].items():
        lines.append(f"mean analytic yes probability ({label}): {_fmt(m)}")
    _emit(args, summary, lines)
    return 0


def cmd_inspect(args):
    if args.model is None and not args.images:
        raise UsageError("give --model and/or image paths to inspect")
    if args.model is not None:
        model = model_io.load_model(args.model)
        comps = model.components.components
        ortho = float(np.max(np.abs(comps @ comps.T - np.eye(model.s))))
        record = {
            "command": "inspect",
            "model": str(args.model),
            "n": model.n,
            "s": model.s,
            "k": model.k,
            "dim": model.dim,
            "singular_values": [float(v) for v in model.components.singular_values],
            "orthonormality_error": ortho,
            "metadata": model.metadata,
        }
        _emit(
            args,
            record,
            [
                f"model: {args.model}",
                f"n={model.n} s={model.s} k={model.k} dim={model.dim}",
                "singular values: "
                + " ".join(_fmt(v) for v in model.components.singular_values),
                f"orthonormality error: {ortho:.3g}",
                "metadata: " + json.dumps(model.metadata, sort_keys=True),
            ],
        )
    for path in args.images:
        img = model_io.load_image(path, args.max_value)
        record = {
            "command": "inspect",
            "image": str(path),
            "width": img.width,
            "height": img.height,
            "max_value": img.max_value,
        }
        _emit(args, record, [f"{path}: {img.width}x{img.height} max {img.max_value}"])
    return 0


# --- argument parsing -----------------------------------------------------


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _threshold(text):
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"threshold must be in (0, 1], got {text}")
    return value


def build_parser(default_seed=DEFAULT_SEED):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--records", action="store_true",
                        help="emit line-delimited JSON records instead of text")
    common.add_argument("--max-value", type=_positive_int,
                        default=model_io.DEFAULT_MAX_VALUE,
                        help="intensity scale for CSV images (default 255)")
    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--model", required=True, help="model file")
    run.add_argument("--seed", type=int, default=default_seed,
                     help=f"random seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    run.add_argument("--trials", type=_positive_int, default=None,
                     help="override the number of repeated measurements (default n^2)")

    parser = argparse.ArgumentParser(
        prog="qpcaclf", description="Quantum PCA image classifier simulator."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="learn components from images")
    p.add_argument("inputs", nargs="+", help="image files or directories")
    p.add_argument("--model", required=True, help="output model file")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--components", type=_positive_int, help="number of components s")
    group.add_argument("--variance-threshold", type=_threshold,
                       help=f"choose s by retained variance (default {DEFAULT_VARIANCE_THRESHOLD})")
    p.add_argument("--center", action="store_true", help="mean-centre before the SVD")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", parents=[common, run], help="run the measurement protocol")
    p.add_argument("image")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("prob", parents=[common, run], help="analytic probabilities only")
    p.add_argument("image")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("eval", parents=[common, run], help="evaluate a labelled batch")
    p.add_argument("dataset", nargs="?",
                   help="directory containing positive/ and negative/ subdirectories")
    p.add_argument("--positive", action="append", help="directory or file of positives")
    p.add_argument("--negative", action="append", help="directory or file of negatives")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", parents=[common], help="describe a model or images")
    p.add_argument("images", nargs="*")
    p.add_argument("--model", default=None)
    p.set_defaults(func=cmd_inspect)
    return parser


def _env_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"${SEED_ENV} must be an integer, got {raw!r}") from None


def main(argv=None):
    logging.basicConfig(format="qpcaclf: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        parser = build_parser(_env_seed())
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    except (QpcaError, OSError) as exc:
        print(f"qpcaclf: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
