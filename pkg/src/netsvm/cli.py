"""``netsvm`` command line: convert, merge, train, evaluate, predict, report.

Exit codes: 0 ok, 2 parse error, 3 I/O error, 4 training failure, 5 schema
mismatch between a model and the data it is applied to.

Every long option can also be set in an INI config file (``--config`` or the
``NETSVM_CONFIG`` environment variable), in a section named after the
command or in ``[global]``. Keys use the option name without leading dashes,
e.g. ``class = Protocol`` or ``train-percent = 70``. Command-line flags win.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
import warnings

from . import __version__
from .arff import from_capture, load_arff, parse_positions, remove_attributes, save_arff
from .errors import (
    ConvergenceWarning,
    DatasetError,
    DegenerateFeatureWarning,
    ModelFormatError,
    NetsvmError,
    ParseError,
    SchemaMismatch,
    SvmError,
)
from .evalkit import confusion, format_report, format_run_information, report_json, summarize
from .ingest import merge_batches, read_capture_csv, write_capture_csv
from .prep import RareBucket, SplitSpec, check_schema, encode, fit_encoder, percentage_split, split_order, split_sizes
from .report import weekly_report
from .svm import KernelSpec, TrainConfig, load_model, save_model, train_ovo

EXIT_OK, EXIT_PARSE, EXIT_IO, EXIT_TRAIN, EXIT_SCHEMA = 0, 2, 3, 4, 5
CONFIG_ENV = "NETSVM_CONFIG"


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def _log(args, msg):
    if not getattr(args, "quiet", False):
        print(msg, file=sys.stderr)


def _is_arff(path):
    return str(path).lower().endswith(".arff")


def _load_dataset(path, args):
    """Load ARFF directly, anything else as a Wireshark CSV export."""
    if _is_arff(path):
        return load_arff(path)
    batch = read_capture_csv(path, skip_malformed=getattr(args, "skip_malformed", False))
    _report_rejected(batch, args)
    return from_capture(batch, info_nominal=getattr(args, "info_nominal", False))


def _report_rejected(batch, args):
    for row in batch.rejected:
        _log(args, f"warning: {batch.source_files[0][0]}: skipped {row}")


def _positions(text):
    if text in (None, ""):
        return set()
    try:
        return parse_positions(text)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"bad --remove list {text!r}: {exc}") from None


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- commands -----------------------------------------------------------------


def cmd_merge(args):
    batches = [read_capture_csv(p, skip_malformed=args.skip_malformed) for p in args.inputs]
    for b in batches:
        _report_rejected(b, args)
    label = args.label or os.path.splitext(os.path.basename(args.output or "merged"))[0]
    merged = merge_batches(batches, label)
    data = write_capture_csv(merged)
    if args.output in (None, "-"):
        sys.stdout.buffer.write(data)
    else:
        with open(args.output, "wb") as fh:
            fh.write(data)
    for name, count in merged.source_files:
        _log(args, f"{name}: {count} packets")
    _log(args, f"{label}: {len(merged)} packets total")
    return EXIT_OK


def cmd_convert(args):
    batches = [read_capture_csv(p, skip_malformed=args.skip_malformed) for p in args.inputs]
    for b in batches:
        _report_rejected(b, args)
    label = args.label or (batches[0].label if len(batches) == 1 else "merged")
    batch = merge_batches(batches, label)
    d = from_capture(batch, info_nominal=args.info_nominal)
    d = remove_attributes(d, _positions(args.remove))
    save_arff(d, args.output)
    _log(args, f"wrote {args.output}: {len(d)} instances, {len(d.attributes)} attributes")
    return EXIT_OK


def _train_config(args):
    kernel = KernelSpec(args.kernel, int(args.degree), float(args.gamma), float(args.coef0))
    return TrainConfig(
        kernel=kernel,
        c=float(args.cost),
        tolerance=float(args.tolerance),
        max_iterations=int(args.max_iter),
        cache_budget=int(args.cache),
        seed=int(args.seed),
        working_set=args.working_set,
    )


def cmd_train(args):
    d = _load_dataset(args.data, args)
    removed = _positions(args.remove)
    if removed:
        try:
            cls_pos = d.attribute_index(args.class_attribute) + 1
        except DatasetError:
            cls_pos = None
        if cls_pos in removed:
            raise CliError(EXIT_PARSE, f"class attribute {args.class_attribute!r} is in the --remove list")
    d = remove_attributes(d, removed)
    split = SplitSpec(float(args.train_percent), bool(args.shuffle), int(args.seed))
    config = _train_config(args)
    rare = RareBucket(int(args.rare_min_support), args.rare_label)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        spec = fit_encoder(d, args.class_attribute, rare_bucket=rare, scale=not args.no_scale)
        enc = encode(d, spec)
        train, _ = percentage_split(enc, split)
        t0 = time.perf_counter()
        model = train_ovo(train, config, n_jobs=int(args.jobs), backend=args.backend, split=split, removed=removed)
        build = time.perf_counter() - t0
    for w in caught:
        if issubclass(w.category, (ConvergenceWarning, DegenerateFeatureWarning)):
            _log(args, f"warning: {w.message}")
    save_model(model, args.output)
    if not args.quiet:
        info = format_run_information(
            model.config.scheme(), d.relation, len(d), d.attribute_names, split.describe()
        )
        sys.stdout.write(info)
        sys.stdout.write(
            f"\n=== Classifier model (full training set) ===\n\n"
            f"One-vs-one C-SVC: {len(model.label_names)} classes, {len(model.binaries)} binary models, "
            f"{sum(b.support_vectors.shape[0] for b in model.binaries)} support vectors, "
            f"{model.encoder.dimension} features, gamma={model.config.kernel.gamma!r}\n"
        )
    _log(args, f"Time taken to build model: {build:.2f} seconds")
    _log(args, f"wrote {args.output}")
    return EXIT_OK


def _prepare_eval_rows(model, d, which):
    d = remove_attributes(d, model.removed)
    try:
        check_schema(d, model.encoder)
        enc = encode(d, model.encoder)
    except SchemaMismatch as exc:
        raise CliError(EXIT_SCHEMA, str(exc)) from None
    if which == "all" or model.split is None:
        return d, enc
    n_train, _ = split_sizes(len(enc), model.split.train_percent)
    order = split_order(len(enc), model.split)
    rows = order[:n_train] if which == "train" else order[n_train:]
    return d, enc.subset(rows)


def cmd_evaluate(args):
    model = load_model(args.model)
    d, enc = _prepare_eval_rows(model, _load_dataset(args.data, args), args.on)
    if len(enc) == 0:
        raise CliError(EXIT_SCHEMA, "no rows to evaluate")
    t0 = time.perf_counter()
    pred = model.predict(enc.features)
    test_time = time.perf_counter() - t0
    m = confusion(enc.labels, pred, model.label_names)
    s = summarize(m, model.train_priors(), enc.class_counts())
    timings = {"test": test_time} if args.timings else None
    test_mode = model.split.describe() if model.split and args.on != "all" else "evaluate on all rows"
    if args.on == "train":
        test_mode = "evaluate on training split"
    if args.json:
        extra = {
            "relation": d.relation,
            "class_attribute": model.encoder.class_attribute,
            "train_percent": model.split.train_percent if model.split else None,
            "evaluated_on": args.on,
        }
        _write_text(args.output, report_json(s, m, extra))
    else:
        run_info = dict(
            scheme=model.config.scheme(),
            relation=d.relation,
            instances=len(d),
            attributes=d.attribute_names,
            test_mode=test_mode,
        )
        _write_text(args.output, format_report(s, m, timings, run_info))
    _log(args, f"accuracy {100 * s.accuracy:.4f} % on {s.n} instances")
    return EXIT_OK


def cmd_predict(args):
    model = load_model(args.model)
    _, enc = _prepare_eval_rows(model, _load_dataset(args.data, args), "all")
    pred = model.predict(enc.features)
    names = [model.label_names[p] for p in pred]
    if args.json:
        _write_text(args.output, json.dumps({"predictions": names}, ensure_ascii=False) + "\n")
    else:
        _write_text(args.output, "".join(f"{i + 1},{json.dumps(n, ensure_ascii=False)}\n" for i, n in enumerate(names)))
    return EXIT_OK


def _load_report_batch(path, args):
    if _is_arff(path):
        return load_arff(path)
    batch = read_capture_csv(path, skip_malformed=args.skip_malformed)
    _report_rejected(batch, args)
    return batch


def cmd_report(args):
    labels = args.labels.split(",") if args.labels else []
    if labels and len(labels) != len(args.inputs):
        raise CliError(EXIT_PARSE, f"{len(labels)} labels given for {len(args.inputs)} inputs")
    if not labels:
        labels = [os.path.splitext(os.path.basename(p))[0] for p in args.inputs]
    batches = [(lab, _load_report_batch(p, args)) for lab, p in zip(labels, args.inputs)]
    evaluations = {}
    for spec in args.eval or []:
        label, sep, path = spec.partition("=")
        if not sep:
            raise CliError(EXIT_PARSE, f"--eval expects LABEL=PATH, got {spec!r}")
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        task = str(doc.get("class_attribute", "")).lower()
        entry = evaluations.setdefault(label, {})
        entry[task or "protocol"] = doc["summary"]["accuracy"]
        if doc.get("train_percent") is not None:
            entry["train_percent"] = doc["train_percent"]
    top_k = int(args.top_k) if args.top_k not in (None, "", "0", 0) else None
    rep = weekly_report(batches, top_k, evaluations)
    fmt = "json" if args.json else args.format
    _write_text(args.output, rep.render(fmt))
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------

DEFAULTS = {
    "train": {
        "class_attribute": "Protocol",
        "remove": "",
        "train_percent": 70.0,
        "shuffle": False,
        "kernel": "rbf",
        "degree": 3,
        "gamma": 0.0,
        "coef0": 0.0,
        "cost": 1.0,
        "tolerance": 1e-3,
        "max_iter": 10_000_000,
        "cache": 12_500_000,
        "working_set": "second_order",
        "rare_min_support": 0,
        "rare_label": "(rare)",
        "no_scale": False,
        "jobs": 1,
        "backend": None,
    },
    "report": {"format": "text", "top_k": 10},
    "evaluate": {"on": "test"},
}

_BOOL_KEYS = {"shuffle", "no_scale", "skip_malformed", "info_nominal", "json", "quiet", "timings"}


def _common(parser):
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 1)")
    g.add_argument("--config", default=argparse.SUPPRESS, help=f"INI config file (default ${CONFIG_ENV})")
    g.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    g.add_argument("--quiet", "-q", action="store_true", default=argparse.SUPPRESS, help="suppress diagnostics")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    _common(common)
    p = argparse.ArgumentParser(prog="netsvm", description=__doc__.split("\n")[0], parents=[common])
    p.add_argument("--version", action="version", version=f"netsvm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("merge", parents=[common], help="concatenate capture CSV exports")
    s.add_argument("inputs", nargs="+")
    s.add_argument("-o", "--output")
    s.add_argument("--label")
    s.add_argument("--skip-malformed", action="store_true", default=None)
    s.set_defaults(func=cmd_merge)

    s = sub.add_parser("convert", parents=[common], help="capture CSV(s) -> ARFF")
    s.add_argument("inputs", nargs="+")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--label")
    s.add_argument("--remove", help="1-based attribute positions to drop, e.g. 1,2,3,7")
    s.add_argument("--info-nominal", action="store_true", default=None)
    s.add_argument("--skip-malformed", action="store_true", default=None)
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("train", parents=[common], help="train a one-vs-one SVM model")
    s.add_argument("data", help="ARFF file or capture CSV")
    s.add_argument("-o", "--output", required=True, help="model file to write")
    s.add_argument("--class", dest="class_attribute")
    s.add_argument("--remove")
    s.add_argument("--split", dest="train_percent", type=float, help="train percentage (default 70)")
    s.add_argument("--shuffle", action="store_true", default=None)
    s.add_argument("--kernel", choices=["linear", "polynomial", "poly", "rbf", "sigmoid"])
    s.add_argument("--degree", type=int)
    s.add_argument("--gamma", type=float, help="0 = 1/number of features")
    s.add_argument("--coef0", type=float)
    s.add_argument("-C", "--cost", type=float)
    s.add_argument("--tolerance", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--cache", type=int, help="kernel cache budget in Gram entries")
    s.add_argument("--working-set", choices=["second_order", "random"])
    s.add_argument("--rare-min-support", type=int)
    s.add_argument("--rare-label")
    s.add_argument("--no-scale", action="store_true", default=None)
    s.add_argument("--jobs", type=int)
    s.add_argument("--backend", choices=["cython", "python"])
    s.add_argument("--skip-malformed", action="store_true", default=None)
    s.add_argument("--info-nominal", action="store_true", default=None)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", parents=[common], help="evaluate a model on held-out rows")
    s.add_argument("model")
    s.add_argument("data")
    s.add_argument("-o", "--output")
    s.add_argument("--on", choices=["test", "train", "all"])
    s.add_argument("--timings", action="store_true", default=None)
    s.add_argument("--skip-malformed", action="store_true", default=None)
    s.add_argument("--info-nominal", action="store_true", default=None)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("predict", parents=[common], help="predict class labels")
    s.add_argument("model")
    s.add_argument("data")
    s.add_argument("-o", "--output")
    s.add_argument("--skip-malformed", action="store_true", default=None)
    s.add_argument("--info-nominal", action="store_true", default=None)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("report", parents=[common], help="weekly traffic tables")
    s.add_argument("inputs", nargs="+", help="capture CSV or ARFF files, one per batch")
    s.add_argument("--labels", help="comma separated batch labels")
    s.add_argument("--top-k", type=int)
    s.add_argument("--format", choices=["text", "csv", "json"])
    s.add_argument("--eval", action="append", help="LABEL=evaluate.json, joins accuracy per batch")
    s.add_argument("-o", "--output")
    s.add_argument("--skip-malformed", action="store_true", default=None)
    s.set_defaults(func=cmd_report)
    return p


def _read_config(path, command):
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    values = {}
    for section in ("global", command):
        if cp.has_section(section):
            for key, raw in cp.items(section):
                k = key.replace("-", "_")
                if k == "class":
                    k = "class_attribute"
                elif k == "split":
                    k = "train_percent"
                if k in _BOOL_KEYS:
                    values[k] = cp.getboolean(section, key)
                else:
                    values[k] = raw
    return values


def _coerce(key, value, default):
    if value is None or isinstance(value, bool):
        return value
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    config = {}
    if config_path:
        try:
            config = _read_config(config_path, args.command)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read config {config_path}: {exc}") from None
        except configparser.Error as exc:
            raise CliError(EXIT_PARSE, f"bad config {config_path}: {exc}") from None
    defaults = dict(DEFAULTS.get(args.command, {}))
    defaults.setdefault("seed", 1)
    for key in ("seed", "json", "quiet", "skip_malformed", "info_nominal", "timings"):
        defaults.setdefault(key, 1 if key == "seed" else False)
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            value = config.get(key, default)
            setattr(args, key, _coerce(key, value, default))
    for key, value in config.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"netsvm: error: {exc}", file=sys.stderr)
        return exc.code
    except (ParseError, ModelFormatError) as exc:
        print(f"netsvm: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SchemaMismatch as exc:
        print(f"netsvm: schema mismatch: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        where = f" {exc.filename}" if getattr(exc, "filename", None) else ""
        print(f"netsvm: I/O error:{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except (SvmError, DatasetError) as exc:
        print(f"netsvm: training failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except NetsvmError as exc:
        print(f"netsvm: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
