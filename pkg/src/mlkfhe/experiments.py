"""Repeated stratified cross-validation driver and result aggregation.

Folds are generated once per (dataset, repetition) with iterative
stratification and shared by every algorithm, so per-dataset score vectors
are paired and the Wilcoxon tests downstream are valid. Each (dataset,
repetition, fold, algorithm) cell derives its own seed substream from the
experiment seed, making runs reproducible regardless of scheduling.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import rankdata
from sklearn.base import clone

from .estimators import ALGORITHMS, make_algorithm
from .learners import BinaryLearnerSpec
from .metrics import MetricReport
from .rng import substream
from .significance import friedman_finner, wilcoxon_signed_rank
from .stratification import iterative_stratification


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one benchmark run."""

    datasets: list  # of Dataset
    algorithms: list  # of names from the registry, or (name, estimator) pairs
    n_components: int = 10
    n_folds: int = 5
    repetitions: int = 2
    seed: int = 0
    learner: BinaryLearnerSpec | None = None
    n_jobs: int = 1
    fixed_timing: bool = False

    def __post_init__(self):
        if self.n_folds < 2:
            raise ValueError("n_folds must be at least 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.n_components < 1:
            raise ValueError("n_components must be at least 1")
        if not self.datasets:
            raise ValueError("at least one dataset is required")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        for entry in self.algorithms:
            name = entry[0] if isinstance(entry, tuple) else entry
            if isinstance(entry, str) and name not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}")

    def algorithm_names(self):
        return [e[0] if isinstance(e, tuple) else e for e in self.algorithms]


@dataclass
class CellResult:
    """Outcome of one (dataset, algorithm, repetition, fold) training cell."""

    dataset: str
    algorithm: str
    repetition: int
    fold: int
    report: MetricReport | None
    train_seconds: float
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def _build_estimator(entry, config: ExperimentConfig, cell_seed: int):
    if isinstance(entry, tuple):
        _, estimator = entry
        est = clone(estimator)
        if "random_state" in est.get_params(deep=False):
            est.set_params(random_state=cell_seed)
        return est
    return make_algorithm(entry, config.n_components, config.learner, cell_seed)


def _run_cell(config, dataset, ds_idx, rep, fold, algo_idx, entry, train_idx, test_idx):
    name = entry[0] if isinstance(entry, tuple) else entry
    cell_seed = int(
        np.random.SeedSequence(
            [config.seed, ds_idx, rep, fold, algo_idx]
        ).generate_state(1)[0]
    )
    started = time.perf_counter()
    try:
        estimator = _build_estimator(entry, config, cell_seed)
        estimator.fit(dataset.X[train_idx], dataset.Y[train_idx])
        predicted = estimator.predict(dataset.X[test_idx])
        report = MetricReport.from_predictions(dataset.Y[test_idx], predicted)
        elapsed = 0.0 if config.fixed_timing else time.perf_counter() - started
        return CellResult(dataset.name, name, rep, fold, report, elapsed)
    except Exception as exc:  # record and continue; the run must not die
        elapsed = 0.0 if config.fixed_timing else time.perf_counter() - started
        message = f"{type(exc).__name__}: {exc}"
        return CellResult(dataset.name, name, rep, fold, None, elapsed, error=message)


def run_cv_experiment(config: ExperimentConfig) -> list[CellResult]:
    """Train and evaluate every cell; results sorted by (dataset, algorithm,
    repetition, fold) so output is deterministic regardless of scheduling."""
    tasks = []
    for ds_idx, dataset in enumerate(config.datasets):
        for rep in range(config.repetitions):
            assignment = iterative_stratification(
                dataset.Y, config.n_folds,
                random_state=substream(config.seed, ds_idx, rep),
                repetition=rep,
            )
            for fold in range(config.n_folds):
                train_idx, test_idx = assignment.split(fold)
                for algo_idx, entry in enumerate(config.algorithms):
                    tasks.append(
                        (config, dataset, ds_idx, rep, fold, algo_idx, entry,
                         train_idx, test_idx)
                    )
    if config.n_jobs == 1:
        results = [_run_cell(*task) for task in tasks]
    else:
        results = Parallel(n_jobs=config.n_jobs)(
            delayed(_run_cell)(*task) for task in tasks
        )
    results.sort(key=lambda c: (c.dataset, c.algorithm, c.repetition, c.fold))
    return results


# --------------------------------------------------------------------------
# Aggregation


@dataclass
class BenchmarkTables:
    """Aggregated views over the raw cell results."""

    dataset_names: list
    algorithm_names: list
    mean_macro_f: np.ndarray  # (datasets, algorithms), NaN where cells failed
    sd_macro_f: np.ndarray
    ranks: np.ndarray  # per-dataset midranks of the means (lower is better)
    avg_ranks: np.ndarray
    wilcoxon: list = field(default_factory=list)  # (dataset, a, b, stat, p)
    friedman: object = None


def _scores_by_cell(results, dataset, algorithm):
    scores = [
        (c.repetition, c.fold, c.report.macro_f if c.report else np.nan)
        for c in results
        if c.dataset == dataset and c.algorithm == algorithm
    ]
    scores.sort()
    return np.array([s[2] for s in scores])


def summarize_results(results: list[CellResult], control: int | None = None) -> BenchmarkTables:
    """Mean/sd per cell group, per-dataset ranks, Friedman/Finner across
    datasets (when there are at least 2 of both) and pairwise Wilcoxon tests
    over the paired fold scores of each dataset."""
    dataset_names = sorted({c.dataset for c in results})
    algorithm_names = sorted({c.algorithm for c in results})
    n_ds, n_alg = len(dataset_names), len(algorithm_names)

    fold_scores = {}
    mean = np.full((n_ds, n_alg), np.nan)
    sd = np.full((n_ds, n_alg), np.nan)
    for i, ds in enumerate(dataset_names):
        for j, alg in enumerate(algorithm_names):
            scores = _scores_by_cell(results, ds, alg)
            fold_scores[ds, alg] = scores
            if scores.size and not np.isnan(scores).any():
                mean[i, j] = scores.mean()
                sd[i, j] = scores.std(ddof=1) if scores.size > 1 else 0.0

    ranks = np.full((n_ds, n_alg), np.nan)
    for i in range(n_ds):
        row = mean[i]
        if not np.isnan(row).any():
            ranks[i] = rankdata(-row)
    valid_rows = ~np.isnan(ranks).any(axis=1)
    avg_ranks = ranks[valid_rows].mean(axis=0) if valid_rows.any() else np.full(n_alg, np.nan)

    wilcoxon_rows = []
    for ds in dataset_names:
        for a_idx in range(n_alg):
            for b_idx in range(a_idx + 1, n_alg):
                a = fold_scores[ds, algorithm_names[a_idx]]
                b = fold_scores[ds, algorithm_names[b_idx]]
                if a.size != b.size or a.size < 5 or np.isnan(a).any() or np.isnan(b).any():
                    continue
                stat, p = wilcoxon_signed_rank(a, b)
                wilcoxon_rows.append(
                    (ds, algorithm_names[a_idx], algorithm_names[b_idx], stat, p)
                )

    friedman = None
    if n_ds >= 2 and n_alg >= 2 and valid_rows.sum() >= 2:
        if control is None:
            control = int(np.nanargmin(avg_ranks))
        friedman = friedman_finner(mean[valid_rows], control=control, higher_is_better=True)

    return BenchmarkTables(
        dataset_names=dataset_names,
        algorithm_names=algorithm_names,
        mean_macro_f=mean,
        sd_macro_f=sd,
        ranks=ranks,
        avg_ranks=avg_ranks,
        wilcoxon=wilcoxon_rows,
        friedman=friedman,
    )


def format_summary_table(tables: BenchmarkTables) -> str:
    """Human-readable grid: one dataset per row, 'mean +- sd (rank)' cells and
    a closing 'Avg. rank' row."""
    header = ["dataset"] + list(tables.algorithm_names)
    rows = [header]
    for i, ds in enumerate(tables.dataset_names):
        row = [ds]
        for j in range(len(tables.algorithm_names)):
            m, s, r = tables.mean_macro_f[i, j], tables.sd_macro_f[i, j], tables.ranks[i, j]
            if np.isnan(m):
                row.append("failed")
            else:
                rank = f"{r:g}" if not np.isnan(r) else "-"
                row.append(f"{m:.4f} +- {s:.2f} ({rank})")
        rows.append(row)
    avg = ["Avg. rank"] + [
        f"{r:.2f}" if not np.isnan(r) else "-" for r in tables.avg_ranks
    ]
    rows.append(avg)

    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)))
        if idx == 0:
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    return "\n".join(lines)
