"""Command line front end.

Subcommands: fixture, extract, train-eval, select, report, features.
Every option can also come from a flat key=value config file given with
--config; an explicit flag wins over the file. The PEDINTENT_DATA
environment variable supplies the default data root (annotations.tsv
and images/ under it). Exit codes: 0 success, 1 usage error, 2 data
error, 3 numerical failure.
"""

import argparse
import os
import sys
from multiprocessing import Pool

import numpy as np

from . import dataset as ds
from . import fixture as fx
from . import intent as it
from .errors import DataError, NumericalError, UsageError
from .evalkit import (cross_validate, evaluate_ensemble, kfold, majority_vote,
                      render_confusion, render_grid, reports_from_csv,
                      reports_to_csv)
from .features.featfile import (CANONICAL_LENGTH, FeatureVector,
                                dump_feature_text, load_cnn_features,
                                load_feature_text, read_feature_file,
                                write_feature_file)
from .features.hog import hog
from .features.image import resize, to_gray
from .features.lbp import lbp
from .learners import CLASSIFIER_KINDS, make_trainer

ENV_DATA_ROOT = "PEDINTENT_DATA"

TASKS = ("head", "motion")
FEATURES = ("hog", "lbp", "cnn")
SPLITS = ("A", "B")

# class index 0 is the positive class of each task
TASK_CLASSES = {
    "head": ds.HEAD_VALUES,
    "motion": ds.MOTION_VALUES,
    "intent": ds.CROSSING_VALUES,
}
TASK_PART = {"head": "head", "motion": "legs"}

RESIZE_DEFAULT = 220


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; 2 is reserved for data errors here
    def error(self, message):
        raise UsageError(message)


def _load_config_file(path, allowed):
    if not os.path.isfile(path):
        raise UsageError("config file %s not found" % (path,))
    cfg = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError("%s:%d: expected key=value" % (path, lineno))
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in allowed:
                raise UsageError("%s:%d: unknown key %r" % (path, lineno, key))
            cfg[key] = value.strip()
    return cfg


_BOOL_KEYS = ("strict", "balance_both", "five_state_driver")
_INT_KEYS = ("seed", "clips", "frames", "epochs", "workers", "resize", "knn_k")
_FLOAT_KEYS = ("train_frac",)


def _merge_config(args, parser_defaults):
    """CLI value if given, else config file value, else built-in default."""
    merged = dict(parser_defaults)
    cfg = {}
    if getattr(args, "config", None):
        cfg = _load_config_file(args.config, set(parser_defaults))
    for key, default in parser_defaults.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value
        elif key in cfg:
            raw = cfg[key]
            if key in _BOOL_KEYS:
                if raw not in ("true", "false"):
                    raise UsageError("config key %s: %r is not true/false"
                                     % (key, raw))
                merged[key] = raw == "true"
            elif key in _INT_KEYS:
                try:
                    merged[key] = int(raw)
                except ValueError:
                    raise UsageError("config key %s: %r is not an integer"
                                     % (key, raw))
            elif key in _FLOAT_KEYS:
                try:
                    merged[key] = float(raw)
                except ValueError:
                    raise UsageError("config key %s: %r is not a number"
                                     % (key, raw))
            else:
                merged[key] = raw
        else:
            merged[key] = default
    return argparse.Namespace(**merged)


def _data_root():
    return os.environ.get(ENV_DATA_ROOT, "")


def _resolve_paths(args):
    root = _data_root()
    if getattr(args, "annotations", None) is None:
        if not root:
            raise UsageError(
                "--annotations not given and %s unset" % (ENV_DATA_ROOT,))
        args.annotations = os.path.join(root, "annotations.tsv")
    if getattr(args, "images", None) is None and hasattr(args, "images"):
        args.images = os.path.join(root, "images") if root else \
            os.path.join(os.path.dirname(args.annotations), "images")
    return args


def _check_enum(value, name, allowed, allow_all=False):
    if allow_all and value == "all":
        return list(allowed)
    values = [v.strip() for v in value.split(",")] if "," in value else [value]
    for v in values:
        if v not in allowed:
            raise UsageError(
                "--%s: %r not one of %s%s"
                % (name, v, "/".join(allowed), "/all" if allow_all else ""))
    return values


def _task_samples(data, task):
    """(sample_ids, label01) of pedestrian boxes for an action task."""
    classes = TASK_CLASSES[task]
    ids, labels = [], []
    for sid, s in data:
        if s.bbox.kind != "pedestrian":
            continue
        token = s.behavior.head if task == "head" else s.behavior.motion
        ids.append(sid)
        labels.append(classes.index(token))
    if not ids:
        raise DataError("no pedestrian samples for task %s" % (task,))
    return ids, np.array(labels, dtype=np.intp)


def _extract_one(job):
    """Worker: one sample to a descriptor vector (or crop PNG)."""
    (sid, clip_id, frame_index, bbox, part, feature, resize_to,
     images_root, crops_dir) = job
    from PIL import Image

    frame = fx.load_frame(images_root, clip_id, frame_index)
    crop = ds.crop_region(frame, bbox, part)
    if feature == "cnn":
        out_path = os.path.join(crops_dir, "%s.png" % sid)
        Image.fromarray(crop).save(out_path)
        return sid, out_path
    gray = resize(to_gray(crop), resize_to, resize_to)
    if feature == "hog":
        return sid, hog(gray, sample_id=sid).values
    return sid, lbp(gray, sample_id=sid).values


def cmd_extract(args):
    data = ds.load_annotations(args.annotations)
    os.makedirs(args.out, exist_ok=True)
    tasks = _check_enum(args.task, "task", TASKS, allow_all=True)
    features = _check_enum(args.feature, "feature", FEATURES, allow_all=True)
    if args.cnn_features and "cnn" not in features:
        raise UsageError("--cnn-features given but feature is %s"
                         % (args.feature,))
    for task in tasks:
        ids, _ = _task_samples(data, task)
        for feature in features:
            _extract_task_feature(args, data, task, feature, ids)
    return 0


def _extract_task_feature(args, data, task, feature, ids):
    part = TASK_PART[task]
    crops_dir = os.path.join(args.out, "crops_%s" % task)
    if feature == "cnn":
        os.makedirs(crops_dir, exist_ok=True)
    jobs = []
    kept_ids = []
    for sid in ids:
        s = data.get(sid)
        path = fx.frame_image_path(args.images, s.clip_id, s.frame_index)
        if not os.path.isfile(path):
            if args.strict:
                raise DataError("missing frame image for sample %s (%s)"
                                % (sid, path))
            print("warning: skipping %s, missing image %s" % (sid, path),
                  file=sys.stderr)
            continue
        kept_ids.append(sid)
        jobs.append((sid, s.clip_id, s.frame_index, s.bbox, part, feature,
                     args.resize, args.images, crops_dir))
    if not jobs:
        raise DataError("no extractable samples for task %s" % (task,))
    if args.workers > 1:
        with Pool(args.workers) as pool:
            results = pool.map(_extract_one, jobs)
    else:
        results = [_extract_one(j) for j in jobs]

    if feature == "cnn":
        manifest = os.path.join(args.out, "manifest_%s.tsv" % task)
        with open(manifest, "w", encoding="utf-8") as fh:
            for sid, path in results:
                fh.write("%s\t%s\n" % (sid, path))
        if args.cnn_features:
            table = load_cnn_features(args.cnn_features)
            missing = [sid for sid in kept_ids if sid not in table]
            if missing:
                raise DataError(
                    "cnn feature file lacks %d task samples (first: %s)"
                    % (len(missing), missing[0]))
            vectors = [table[sid] for sid in kept_ids]
            write_feature_file(_feature_path(args.out, task, "cnn"), vectors,
                               CANONICAL_LENGTH["cnn"])
        else:
            print("wrote %s; run the exporter on it, then re-run extract "
                  "with --cnn-features" % (manifest,))
        return
    vectors = [FeatureVector(sid, feature, vals) for sid, vals in results]
    write_feature_file(_feature_path(args.out, task, feature), vectors)


def _feature_path(out_dir, task, feature):
    return os.path.join(out_dir, "features_%s_%s.cnnf" % (task, feature))


def _load_task_features(args, task, feature):
    path = _feature_path(args.out, task, feature)
    if feature == "cnn" and not os.path.isfile(path) and args.cnn_features:
        return load_cnn_features(args.cnn_features)
    if not os.path.isfile(path):
        raise DataError(
            "%s not found: run `extract --task %s --feature %s` first"
            % (path, task, feature))
    expected = CANONICAL_LENGTH[feature] if feature == "cnn" else None
    return read_feature_file(path, feature, expected_dim=expected)


def cmd_train_eval(args):
    data = ds.load_annotations(args.annotations)
    os.makedirs(args.out, exist_ok=True)
    tasks = _check_enum(args.task, "task", TASKS, allow_all=True)
    features = _check_enum(args.feature, "feature", FEATURES, allow_all=True)
    classifiers = _check_enum(args.classifier, "classifier", CLASSIFIER_KINDS,
                              allow_all=True)
    if "cnn" in features and not args.cnn_features:
        # acceptable when extract already subset a cnn file into out dir
        if not os.path.isfile(_feature_path(args.out, "head", "cnn")) and \
           not os.path.isfile(_feature_path(args.out, "motion", "cnn")):
            raise UsageError("--cnn-features required for feature cnn")
    if args.cnn_features and "cnn" not in features:
        raise UsageError("--cnn-features given but feature is %s"
                         % (args.feature,))
    reports = []
    for task in tasks:
        for feature in features:
            table = _load_task_features(args, task, feature)
            for classifier in classifiers:
                reports.append(
                    _train_eval_one(args, data, task, feature, classifier,
                                    table))
    tag = "%s_%s_%s" % (args.task.replace(",", "+"),
                        args.feature.replace(",", "+"),
                        args.classifier.replace(",", "+"))
    reports_to_csv(reports, os.path.join(args.out, "results_%s.csv" % tag))
    with open(os.path.join(args.out, "table_%s.txt" % tag), "w",
              encoding="utf-8") as fh:
        fh.write(render_grid(reports))
        fh.write("\n")
        for r in reports:
            fh.write(render_confusion(r))
            fh.write("\n")
    print(render_grid(reports), end="")
    return 0


def _train_eval_one(args, data, task, feature, classifier, table):
    ids, labels = _task_samples(data, task)
    missing = [sid for sid in ids if sid not in table]
    if missing:
        raise DataError(
            "feature file for %s/%s lacks %d samples (first: %s)"
            % (task, feature, len(missing), missing[0]))
    label_of = dict(zip(ids, labels))

    if args.split == "A":
        split = ds.split_by_clip(data, args.train_frac, args.seed)
    else:
        split = ds.split_by_frame(data, args.train_frac, args.seed)
    train_ids = [sid for sid in split.train if sid in label_of]
    test_ids = [sid for sid in split.test if sid in label_of]
    if not train_ids or not test_ids:
        raise DataError("split left an empty side for task %s" % (task,))

    train_ids = ds.balance_classes(train_ids,
                                   [label_of[s] for s in train_ids],
                                   args.seed)
    if args.balance_both:
        test_ids = ds.balance_classes(test_ids,
                                      [label_of[s] for s in test_ids],
                                      args.seed)

    X_train = np.stack([table[s].values for s in train_ids])
    y_train = np.array([label_of[s] for s in train_ids], dtype=np.intp)
    X_test = np.stack([table[s].values for s in test_ids])
    y_test = np.array([label_of[s] for s in test_ids], dtype=np.intp)

    trainer = make_trainer(classifier, seed=args.seed, epochs=args.epochs,
                           k=args.knn_k)
    plan = kfold(len(train_ids), 5, args.seed)
    models, cv_acc, _ = cross_validate(trainer, X_train, y_train, plan)
    report = evaluate_ensemble(
        models, X_test, y_test, task=task, feature=feature,
        classifier=classifier, cv_accuracy=cv_acc,
        class_names=TASK_CLASSES[task])

    # majority-vote predictions over every task sample, for intent fusion
    X_all = np.stack([table[s].values for s in ids])
    votes = majority_vote(models, X_all)
    pred_path = os.path.join(
        args.out, "predictions_%s_%s_%s.tsv" % (task, feature, classifier))
    with open(pred_path, "w", encoding="utf-8") as fh:
        for sid, cls in zip(ids, votes):
            fh.write("%s\t%s\n" % (sid, TASK_CLASSES[task][int(cls)]))
    return report


def load_predictions(path, task):
    """A predictions TSV back to {sample_id: token}."""
    classes = TASK_CLASSES[task]
    out = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError("cannot read predictions %s: %s" % (path, exc))
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError("%s:%d: expected id<TAB>label" % (path, lineno))
            sid, token = parts
            if token not in classes:
                raise DataError("%s:%d: %r not one of %s"
                                % (path, lineno, token, "/".join(classes)))
            if sid in out:
                raise DataError("%s:%d: duplicate id %r" % (path, lineno, sid))
            out[sid] = token
    if not out:
        raise DataError("%s: no predictions" % (path,))
    return out


def cmd_select(args):
    data = ds.load_annotations(args.annotations)
    os.makedirs(args.out, exist_ok=True)
    head_pred = (load_predictions(args.head_predictions, "head")
                 if args.head_predictions else None)
    motion_pred = (load_predictions(args.motion_predictions, "motion")
                   if args.motion_predictions else None)
    samples = it.intent_samples(data, head_pred, motion_pred)
    if not samples:
        raise DataError("no crossing-labeled pedestrian samples")
    labels = [s.crossing for s in samples]
    samples = ds.balance_classes(samples, labels, args.seed)
    variables = it.VARIABLES_5STATE if args.five_state_driver else it.VARIABLES
    trace = it.forward_select(samples, variables, seed=args.seed)
    it.trace_to_csv(trace, os.path.join(args.out, "selection.csv"))
    text = it.render_trace(trace)
    with open(os.path.join(args.out, "selection.txt"), "w",
              encoding="utf-8") as fh:
        fh.write("head: %s, motion: %s, %d samples\n"
                 % (samples[0].head_source, samples[0].motion_source,
                    len(samples)))
        fh.write(text)
    print(text, end="")
    return 0


def cmd_report(args):
    if not os.path.isdir(args.out):
        raise DataError("output dir %s not found" % (args.out,))
    names = sorted(n for n in os.listdir(args.out)
                   if n.startswith("results_") and n.endswith(".csv"))
    if not names:
        raise DataError("no results_*.csv under %s" % (args.out,))
    reports = []
    for name in names:
        reports.extend(reports_from_csv(os.path.join(args.out, name)))
    grid = render_grid(reports)
    with open(os.path.join(args.out, "report_grid.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(grid)
    print(grid, end="")
    return 0


def cmd_fixture(args):
    fx.generate_fixture(args.out, n_clips=args.clips,
                        frames_per_clip=args.frames, seed=args.seed)
    print("fixture: %d clips x %d frames under %s"
          % (args.clips, args.frames, args.out))
    return 0


def cmd_features(args):
    if args.direction == "dump":
        dump_feature_text(args.infile, args.outfile)
    else:
        load_feature_text(args.infile, args.outfile)
    return 0


def _add_common(sp, *names):
    if "annotations" in names:
        sp.add_argument("--annotations", help="annotation TSV path")
    if "images" in names:
        sp.add_argument("--images", help="frame image root")
    if "out" in names:
        sp.add_argument("--out", help="output directory")
    if "seed" in names:
        sp.add_argument("--seed", type=int)
    sp.add_argument("--config", help="key=value config file")


_DEFAULTS = {
    "extract": dict(annotations=None, images=None, out=None, seed=0,
                    task="all", feature="hog", cnn_features=None,
                    strict=False, workers=1, resize=RESIZE_DEFAULT,
                    config=None),
    "train-eval": dict(annotations=None, out=None, seed=0, task="head",
                       feature="hog", classifier="svm", split="B",
                       train_frac=0.6, balance_both=False, epochs=200,
                       knn_k=1, cnn_features=None, config=None),
    "select": dict(annotations=None, out=None, seed=0,
                   head_predictions=None, motion_predictions=None,
                   five_state_driver=False, config=None),
    "report": dict(out=None, config=None),
    "fixture": dict(out=None, seed=0, clips=12, frames=12, config=None),
    "features": dict(direction=None, infile=None, outfile=None, config=None),
}


def build_parser():
    parser = _Parser(prog="pedintent",
                     description="pedestrian action and intention pipeline")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("fixture", help="generate the synthetic corpus",
                       add_help=True)
    _add_common(p, "out", "seed")
    p.add_argument("--clips", type=int)
    p.add_argument("--frames", type=int)

    p = sub.add_parser("extract", help="compute descriptor files")
    _add_common(p, "annotations", "images", "out", "seed")
    p.add_argument("--task", help="head, motion or all")
    p.add_argument("--feature", help="hog, lbp, cnn or all")
    p.add_argument("--cnn-features", dest="cnn_features",
                   help="externally computed cnn feature file")
    p.add_argument("--strict", action="store_const", const=True, default=None,
                   help="fail on missing images instead of skipping")
    p.add_argument("--workers", type=int)
    p.add_argument("--resize", type=int, help="crop resize target")

    p = sub.add_parser("train-eval", help="cross-validate and evaluate")
    _add_common(p, "annotations", "out", "seed")
    p.add_argument("--task")
    p.add_argument("--feature")
    p.add_argument("--classifier", help="knn, svm, ann, dt or all")
    p.add_argument("--split", choices=SPLITS)
    p.add_argument("--train-frac", dest="train_frac", type=float)
    p.add_argument("--balance-both", dest="balance_both",
                   action="store_const", const=True, default=None,
                   help="balance the test side too")
    p.add_argument("--epochs", type=int)
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--cnn-features", dest="cnn_features")

    p = sub.add_parser("select", help="greedy variable selection")
    _add_common(p, "annotations", "out", "seed")
    p.add_argument("--head-predictions", dest="head_predictions")
    p.add_argument("--motion-predictions", dest="motion_predictions")
    p.add_argument("--five-state-driver", dest="five_state_driver",
                   action="store_const", const=True, default=None)

    p = sub.add_parser("report", help="merge result CSVs into one table")
    _add_common(p, "out")

    p = sub.add_parser("features", help="feature file text round-trip")
    p.add_argument("direction", choices=("dump", "load"))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--config")

    return parser


_HANDLERS = {
    "fixture": cmd_fixture,
    "extract": cmd_extract,
    "train-eval": cmd_train_eval,
    "select": cmd_select,
    "report": cmd_report,
    "features": cmd_features,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a command is required (see --help)")
        merged = _merge_config(args, _DEFAULTS[args.command])
        if args.command in ("extract", "train-eval", "select"):
            merged = _resolve_paths(merged)
        if args.command != "features" and merged.out is None:
            raise UsageError("--out is required")
        if args.command == "train-eval":
            if merged.split not in SPLITS:
                raise UsageError("--split must be A or B")
            if not 0.0 < merged.train_frac < 1.0:
                raise UsageError("--train-frac must be in (0, 1)")
        return _HANDLERS[args.command](merged)
    except UsageError as exc:
        print("usage error: %s" % (exc,), file=sys.stderr)
        return 1
    except DataError as exc:
        print("data error: %s" % (exc,), file=sys.stderr)
        return 2
    except NumericalError as exc:
        print("numerical error: %s" % (exc,), file=sys.stderr)
        return 3
    except OSError as exc:
        # unreadable input or unwritable output caught at the boundary
        print("data error: %s" % (exc,), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
