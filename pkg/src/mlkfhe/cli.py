"""Command line interface.

Subcommands: train, predict, evaluate, benchmark, stats, dataset-info.
Exit codes: 0 success, 1 training/benchmark failure, 2 configuration error.

Every output file starts with '# key: value' metadata lines (tool version,
seed, the exact invocation) followed by a regular RFC-4180 table, so a run
can be reproduced byte for byte from its own header. Relative dataset paths
are also resolved against the MLKFHE_DATA_DIR environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import DatasetFormatError, load_dataset, load_features
from .estimators import ALGORITHMS, make_algorithm
from .ensembles import BaggedModel, KfheModel
from .experiments import (
    CellResult,
    ExperimentConfig,
    format_summary_table,
    run_cv_experiment,
    summarize_results,
)
from .learners import BinaryLearnerSpec
from .metrics import MetricReport, dataset_stats
from .serialize import load_metadata, load_model, save_model

DATA_DIR_ENV = "MLKFHE_DATA_DIR"


class ConfigError(Exception):
    """User configuration problem; maps to exit code 2."""


class TrainingError(Exception):
    """Runtime training/benchmark failure; maps to exit code 1."""


# --------------------------------------------------------------------------
# Shared helpers


def _resolve_data_path(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    base = os.environ.get(DATA_DIR_ENV)
    if base and not p.is_absolute():
        candidate = Path(base) / p
        if candidate.exists():
            return candidate
    return p


def _invocation(argv) -> str:
    return "mlkfhe " + " ".join(shlex.quote(str(a)) for a in argv)


def _metadata_lines(seed, argv) -> list[str]:
    return [
        f"# tool: mlkfhe {__version__}",
        f"# seed: {seed}",
        f"# invocation: {_invocation(argv)}",
    ]


def _write_table(path, columns, rows, seed, argv) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    text = "\n".join(_metadata_lines(seed, argv)) + "\n" + buffer.getvalue()
    Path(path).write_text(text, encoding="utf-8")


def _learner_from_args(args) -> BinaryLearnerSpec:
    try:
        return BinaryLearnerSpec(
            kernel=args.kernel,
            reg_lambda=args.reg_lambda,
            rff_dim=args.rff_dim,
            rff_gamma=args.rff_gamma,
            learning_rate=args.learning_rate,
            lr_decay=args.lr_decay,
            max_epochs=args.max_epochs,
            tol=args.tol,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _add_learner_flags(parser):
    group = parser.add_argument_group("base learner")
    group.add_argument("--kernel", choices=("linear", "radial"), default="linear")
    group.add_argument("--reg-lambda", type=float, default=1e-3)
    group.add_argument("--rff-dim", type=int, default=256)
    group.add_argument("--rff-gamma", type=float, default=None)
    group.add_argument("--max-epochs", type=int, default=500)
    group.add_argument("--learning-rate", type=float, default=1.0)
    group.add_argument("--lr-decay", type=float, default=0.0)
    group.add_argument("--tol", type=float, default=1e-6)


def _load(args_data, args_labels, what="dataset"):
    path = _resolve_data_path(args_data)
    try:
        return load_dataset(path, n_labels=args_labels)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    except DatasetFormatError as exc:
        raise ConfigError(f"cannot read {what}: {exc}") from exc


# --------------------------------------------------------------------------
# train


def cmd_train(args, argv) -> int:
    if args.components < 1:
        raise ConfigError(f"--components must be at least 1, got {args.components}")
    if args.seed < 0:
        raise ConfigError("--seed must be nonnegative")
    if args.family not in ALGORITHMS:
        raise ConfigError(f"unknown --family {args.family!r}")
    dataset = _load(args.data, args.labels)
    learner = _learner_from_args(args)
    estimator = make_algorithm(args.family, args.components, learner, args.seed)
    tunable = estimator.get_params(deep=False)
    if "weighting" in tunable:
        estimator.set_params(weighting=args.weighting)
    if "resample_factor" in tunable:
        estimator.set_params(resample_factor=args.resample_factor)

    try:
        estimator.fit(dataset.X, dataset.Y)
    except Exception as exc:
        raise TrainingError(f"training failed: {exc}") from exc

    out = Path(args.out)
    save_model(
        estimator.model_,
        out,
        metadata={
            "algorithm": args.family,
            "seed": args.seed,
            "invocation": _invocation(argv),
            "n_labels": dataset.n_labels,
            "label_names": list(dataset.label_names),
            "dataset": dataset.name,
        },
    )

    log_path = Path(args.log) if args.log else out.with_suffix(".log")
    _write_training_log(log_path, estimator.model_, args.seed, argv)
    print(f"model written to {out}")
    print(f"training log written to {log_path}")
    return 0


def _write_training_log(path, model, seed, argv):
    lines = _metadata_lines(seed, argv)
    if isinstance(model, KfheModel):
        lines.append("t,noise,gain,variance,weight_gain,weight_variance")
        for rec in model.history:
            lines.append(
                f"{rec.t},{rec.noise:.12g},{rec.gain:.12g},{rec.variance:.12g},"
                f"{rec.weight_gain:.12g},{rec.weight_variance:.12g}"
            )
    elif isinstance(model, BaggedModel):
        lines.append("t,params")
        for t, draw in enumerate(model.param_draws):
            desc = ";".join(f"{k}={_param_text(v)}" for k, v in sorted(draw.items()))
            lines.append(f"{t},{desc}")
    else:
        lines.append("component,params")
        lines.append(f"0,{type(model).__name__}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _param_text(value):
    if isinstance(value, np.ndarray):
        return "[" + " ".join(str(int(v)) for v in value) + "]"
    return str(value)


# --------------------------------------------------------------------------
# predict / evaluate


def cmd_predict(args, argv) -> int:
    model_path = Path(args.model)
    if not model_path.exists():
        raise ConfigError(f"model file not found: {model_path}")
    model = load_model(model_path)
    metadata = load_metadata(model_path)
    label_names = metadata.get("label_names") or [
        f"y{j}" for j in range(model.n_labels)
    ]
    path = _resolve_data_path(args.data)
    try:
        X, _ = load_features(path, n_labels=args.labels)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from exc
    except DatasetFormatError as exc:
        raise ConfigError(str(exc)) from exc

    scores = model.predict_scores(X)
    predicted = model.predict(X)
    columns = (
        ["index"]
        + [f"score:{name}" for name in label_names]
        + [f"pred:{name}" for name in label_names]
    )
    rows = [
        [i] + [repr(float(s)) for s in scores[i]] + [int(v) for v in predicted[i]]
        for i in range(X.shape[0])
    ]
    seed = metadata.get("seed", "-")
    if args.out:
        _write_table(args.out, columns, rows, seed, argv)
        print(f"predictions written to {args.out}")
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    return 0


def cmd_evaluate(args, argv) -> int:
    model_path = Path(args.model)
    if not model_path.exists():
        raise ConfigError(f"model file not found: {model_path}")
    model = load_model(model_path)
    metadata = load_metadata(model_path)
    dataset = _load(args.data, args.labels)
    if dataset.n_labels != model.n_labels:
        raise ConfigError(
            f"dataset has {dataset.n_labels} labels, model expects {model.n_labels}"
        )
    report = MetricReport.from_predictions(dataset.Y, model.predict(dataset.X))
    print(f"dataset:      {dataset.name}")
    print(f"macro_f:      {report.macro_f:.6f}")
    print(f"hamming_loss: {report.hamming_loss:.6f}")
    for name, f in zip(dataset.label_names, report.per_label_f):
        print(f"  f1[{name}]: {f:.6f}")
    if args.out:
        _write_table(
            args.out,
            ["dataset", "algorithm", "macro_f", "hamming_loss"],
            [[dataset.name, metadata.get("algorithm", "-"),
              f"{report.macro_f:.6f}", f"{report.hamming_loss:.6f}"]],
            metadata.get("seed", "-"), argv,
        )
    return 0


# --------------------------------------------------------------------------
# dataset-info


def cmd_dataset_info(args, argv) -> int:
    dataset = _load(args.data, args.labels)
    stats = dataset_stats(dataset)
    print(f"name:        {dataset.name}")
    print(f"instances:   {stats.n_instances}")
    print(f"features:    {stats.n_features}")
    print(f"labels:      {stats.n_labels}")
    print(f"cardinality: {stats.cardinality:.4f}")
    print(f"mean_ir:     {stats.mean_ir:.4f}")
    if args.out:
        _write_table(
            args.out,
            ["name", "instances", "features", "labels", "cardinality", "mean_ir"],
            [[dataset.name, stats.n_instances, stats.n_features, stats.n_labels,
              f"{stats.cardinality:.6f}", f"{stats.mean_ir:.6f}"]],
            "-", argv,
        )
    return 0


# --------------------------------------------------------------------------
# benchmark


_CONFIG_KEYS = {
    "datasets", "algorithms", "components", "folds", "repetitions", "seed",
    "output", "jobs", "fixed_timing", "kernel", "reg_lambda", "rff_dim",
    "rff_gamma", "max_epochs", "learning_rate", "lr_decay", "tol",
}


def parse_benchmark_config(path) -> dict:
    """Flat 'key = value' file; '#' starts a comment, blank lines ignored.

    datasets is a comma-separated list of path[:label_count] entries;
    algorithms a comma-separated list of registry names.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    for required in ("datasets", "algorithms"):
        if required not in values:
            raise ConfigError(f"{path}: missing required key {required!r}")
    return values


def _config_int(values, key, default):
    if key not in values:
        return default
    try:
        return int(values[key])
    except ValueError:
        raise ConfigError(f"config key {key!r} must be an integer") from None


def _config_float(values, key, default):
    if key not in values:
        return default
    if values[key].lower() in ("auto", "none"):
        return None
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"config key {key!r} must be a number") from None


def _config_bool(values, key, default):
    if key not in values:
        return default
    text = values[key].lower()
    if text in ("true", "yes", "1"):
        return True
    if text in ("false", "no", "0"):
        return False
    raise ConfigError(f"config key {key!r} must be true or false")


def _parse_dataset_entry(entry: str):
    entry = entry.strip()
    if ":" in entry:
        head, tail = entry.rsplit(":", 1)
        if tail.isdigit():
            return head.strip(), int(tail)
    return entry, None


def build_experiment_config(values, argv_overrides=None) -> ExperimentConfig:
    overrides = argv_overrides or {}
    datasets = []
    for entry in values["datasets"].split(","):
        path_text, n_labels = _parse_dataset_entry(entry)
        path = _resolve_data_path(path_text)
        try:
            datasets.append(load_dataset(path, n_labels=n_labels))
        except FileNotFoundError as exc:
            raise ConfigError(str(exc)) from exc
        except DatasetFormatError as exc:
            raise ConfigError(str(exc)) from exc
    algorithms = [a.strip() for a in values["algorithms"].split(",") if a.strip()]
    for name in algorithms:
        if name not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {name!r} in config")
    try:
        learner = BinaryLearnerSpec(
            kernel=values.get("kernel", "linear"),
            reg_lambda=_config_float(values, "reg_lambda", 1e-3),
            rff_dim=_config_int(values, "rff_dim", 256),
            rff_gamma=_config_float(values, "rff_gamma", None),
            learning_rate=_config_float(values, "learning_rate", 1.0),
            lr_decay=_config_float(values, "lr_decay", 0.0),
            max_epochs=_config_int(values, "max_epochs", 500),
            tol=_config_float(values, "tol", 1e-6),
        )
        return ExperimentConfig(
            datasets=datasets,
            algorithms=algorithms,
            n_components=_config_int(values, "components", 10),
            n_folds=_config_int(values, "folds", 5),
            repetitions=_config_int(values, "repetitions", 2),
            seed=overrides.get("seed", _config_int(values, "seed", 0)),
            learner=learner,
            n_jobs=overrides.get("jobs", _config_int(values, "jobs", 1)),
            fixed_timing=overrides.get(
                "fixed_timing", _config_bool(values, "fixed_timing", False)
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_benchmark_outputs(results, tables, out_dir, seed, argv) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    result_rows = [
        [c.dataset, c.algorithm, c.repetition, c.fold,
         "" if c.report is None else f"{c.report.macro_f:.6f}",
         "" if c.report is None else f"{c.report.hamming_loss:.6f}",
         f"{c.train_seconds:.3f}"]
        for c in results
    ]
    _write_table(
        out_dir / "results.csv",
        ["dataset", "algorithm", "repetition", "fold",
         "macro_f", "hamming_loss", "train_seconds"],
        result_rows, seed, argv,
    )

    rank_rows = []
    for i, ds in enumerate(tables.dataset_names):
        for j, alg in enumerate(tables.algorithm_names):
            mean = tables.mean_macro_f[i, j]
            sd = tables.sd_macro_f[i, j]
            rank = tables.ranks[i, j]
            rank_rows.append([
                ds, alg,
                "" if np.isnan(mean) else f"{mean:.6f}",
                "" if np.isnan(sd) else f"{sd:.6f}",
                "" if np.isnan(rank) else f"{rank:g}",
            ])
    _write_table(
        out_dir / "ranks.csv",
        ["dataset", "algorithm", "mean_macro_f", "sd_macro_f", "rank"],
        rank_rows, seed, argv,
    )

    stats_rows = []
    for j, alg in enumerate(tables.algorithm_names):
        avg = tables.avg_ranks[j]
        stats_rows.append([
            "avg_rank", "", alg, "", "", "",
            "" if np.isnan(avg) else f"{avg:.6g}",
        ])
    for ds, a, b, stat, p in tables.wilcoxon:
        stats_rows.append(["wilcoxon", ds, a, b, f"{stat:.6g}", f"{p:.6g}", ""])
    fr = tables.friedman
    if fr is not None:
        stats_rows.append([
            "friedman_chi2", "", "", "", f"{fr.chi_square:.6g}",
            f"{fr.chi_square_p:.6g}", "",
        ])
        control_name = tables.algorithm_names[fr.control]
        for j, alg in enumerate(tables.algorithm_names):
            if j == fr.control:
                continue
            stats_rows.append([
                "friedman_control", "", control_name, alg,
                f"{fr.z_scores[j]:.6g}", f"{fr.raw_p[j]:.6g}",
                f"{fr.adjusted_p[j]:.6g}",
            ])
    _write_table(
        out_dir / "stats.csv",
        ["section", "dataset_or_control", "algorithm_a", "algorithm_b",
         "statistic", "p_value", "adjusted_p_or_avg_rank"],
        stats_rows, seed, argv,
    )

    summary = "\n".join(_metadata_lines(seed, argv)) + "\n" + format_summary_table(tables) + "\n"
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")


def cmd_benchmark(args, argv) -> int:
    values = parse_benchmark_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.fixed_timing:
        overrides["fixed_timing"] = True
    try:
        config = build_experiment_config(values, overrides)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    results = run_cv_experiment(config)
    tables = summarize_results(results)
    out_dir = args.out_dir or values.get("output", "benchmark-out")
    write_benchmark_outputs(results, tables, out_dir, config.seed, argv)

    print(format_summary_table(tables))
    failures = [c for c in results if c.failed]
    if failures:
        print(f"\n{len(failures)} cell(s) failed:", file=sys.stderr)
        for c in failures:
            print(
                f"  {c.dataset}/{c.algorithm} rep={c.repetition} fold={c.fold}: {c.error}",
                file=sys.stderr,
            )
        return 1
    return 0


# --------------------------------------------------------------------------
# stats (recompute significance tables from a results CSV)


def _read_results_csv(path) -> list[CellResult]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"results file not found: {path}")
    lines = [
        line for line in path.read_text(encoding="utf-8").splitlines()
        if line and not line.startswith("#")
    ]
    reader = csv.DictReader(lines)
    results = []
    for row in reader:
        try:
            macro = row["macro_f"]
            report = None
            if macro != "":
                report = MetricReport(
                    hamming_loss=float(row["hamming_loss"]),
                    macro_f=float(macro),
                    per_label_f=np.zeros(0),
                    confusion=np.zeros((0, 4), dtype=np.int64),
                )
            results.append(
                CellResult(
                    dataset=row["dataset"],
                    algorithm=row["algorithm"],
                    repetition=int(row["repetition"]),
                    fold=int(row["fold"]),
                    report=report,
                    train_seconds=float(row.get("train_seconds") or 0.0),
                    error=None if report is not None else "missing",
                )
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{path}: malformed results row {row!r}: {exc}") from exc
    if not results:
        raise ConfigError(f"{path}: no result rows found")
    return results


def cmd_stats(args, argv) -> int:
    results = _read_results_csv(args.results)
    algorithm_names = sorted({c.algorithm for c in results})
    control = None
    if args.control is not None:
        if args.control not in algorithm_names:
            raise ConfigError(
                f"control algorithm {args.control!r} not in results "
                f"(found {algorithm_names})"
            )
        control = algorithm_names.index(args.control)
    tables = summarize_results(results, control=control)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_benchmark_outputs(results, tables, out_dir, "-", argv)
    print(format_summary_table(tables))
    return 0


# --------------------------------------------------------------------------
# Parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlkfhe",
        description="Kalman-fused multi-label ensembles: train, evaluate, benchmark.",
    )
    parser.add_argument("--version", action="version", version=f"mlkfhe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and save it")
    p.add_argument("--data", required=True, help="dataset file (.csv or .arff)")
    p.add_argument("--labels", type=int, default=None, help="label column count")
    p.add_argument("--family", default="kfhe-homer", help="algorithm name")
    p.add_argument("--components", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="model.json")
    p.add_argument("--log", default=None, help="training log path (default: model path with .log)")
    p.add_argument("--weighting", choices=("resample", "direct"), default="resample")
    p.add_argument("--resample-factor", type=int, default=2)
    _add_learner_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score new instances with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--labels", type=int, default=None,
                   help="label columns to strip from the input file")
    p.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a labeled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--labels", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="run the cross-validation benchmark from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--fixed-timing", action="store_true",
                   help="write train_seconds as 0.000 for byte-identical reruns")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("stats", help="recompute significance tables from a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--control", default=None)
    p.add_argument("--out-dir", default="stats-out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("dataset-info", help="print dataset statistics")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dataset_info)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
