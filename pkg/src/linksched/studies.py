"""The four comparison studies: sum-rate, convergence, sample complexity and
cross-size generalization, built from independent (K, regime, size, seed)
training cells."""

from __future__ import annotations

import csv
import io
import logging

from .data import SampleSet
from .evaluation import aggregate, convergence_epoch, evaluate, generalization_rows
from .training import TrainingRegime, TrainResult, train

__all__ = [
    "STUDY_COLUMNS",
    "training_subset",
    "run_cell",
    "sum_rate_rows",
    "convergence_rows",
    "sample_complexity_sweep",
    "sample_complexity_rows",
    "generalization_sweep",
    "rows_to_csv",
]

log = logging.getLogger(__name__)

STUDY_COLUMNS = {
    "fig2a": ["k", "regime", "mean", "std"],
    "fig2b": ["k", "regime", "ssl_flag", "convergence_epoch"],
    "fig2c": ["k", "n_train", "regime", "mean", "std"],
    "fig2d": ["k_train", "k_test", "regime", "mean", "std"],
}


def training_subset(train_set: SampleSet, n: int) -> SampleSet:
    """The first ``n`` samples.  Samples are i.i.d. in file order, so smaller
    subsets are prefixes of larger ones."""
    if n > len(train_set):
        raise ValueError(f"requested {n} training samples, dataset has {len(train_set)}")
    return train_set.subset(slice(0, n)) if n < len(train_set) else train_set


def run_cell(train_set, test_set, regime: TrainingRegime, seed: int, n_train: int | None = None) -> TrainResult:
    if n_train is not None:
        train_set = training_subset(train_set, n_train)
    return train(train_set, test_set, regime, seed)


def sum_rate_rows(best_metrics: dict) -> list[dict]:
    """``best_metrics[(k, regime)]`` maps seed -> max normalized test sum-rate."""
    rows = []
    for (k, regime), per_seed in sorted(best_metrics.items()):
        mean, std = aggregate(per_seed.values())
        rows.append({"k": k, "regime": regime, "mean": mean, "std": std, "per_seed": dict(per_seed)})
    return rows


def convergence_rows(metric_logs: dict, threshold: float = 0.8) -> list[dict]:
    """``metric_logs[(k, regime)]`` maps seed -> per-epoch metric list.

    Seeds that never exceed ``threshold`` are excluded from the mean; a cell
    where no seed converges reports ``None``.
    """
    rows = []
    for (k, regime), per_seed in sorted(metric_logs.items()):
        epochs = {s: convergence_epoch(m, threshold) for s, m in per_seed.items()}
        missing = sum(e is None for e in epochs.values())
        if missing:
            log.info("k=%s %s: %d of %d seeds never exceeded %.2f", k, regime, missing, len(epochs), threshold)
        mean, _ = aggregate(epochs.values())
        base = regime.replace("ssl_then_", "")
        rows.append(
            {
                "k": k,
                "regime": base,
                "ssl_flag": int(regime.startswith("ssl_")),
                "convergence_epoch": None if missing == len(epochs) else mean,
                "per_seed": epochs,
            }
        )
    return rows


def sample_complexity_rows(best_metrics: dict) -> list[dict]:
    """``best_metrics[(k, n_train, regime)]`` maps seed -> metric."""
    rows = []
    for (k, n, regime), per_seed in sorted(best_metrics.items()):
        mean, std = aggregate(per_seed.values())
        rows.append({"k": k, "n_train": n, "regime": regime, "mean": mean, "std": std, "per_seed": dict(per_seed)})
    return rows


def sample_complexity_sweep(train_set, test_set, regime: TrainingRegime, sizes=(32, 64, 128, 256), seeds=(0, 1, 2)):
    """Train on nested prefixes of the training set and report the best
    normalized test sum-rate per size."""
    for n in sizes:
        if n > len(train_set):
            raise ValueError(f"size {n} exceeds the {len(train_set)}-sample training set")
    metrics = {
        (train_set.k, n, regime.kind): {s: run_cell(train_set, test_set, regime, s, n).best_metric for s in seeds}
        for n in sizes
    }
    return sample_complexity_rows(metrics)


def generalization_sweep(models_by_seed: dict, test_sets: dict, k_train: int, regime: str) -> list[dict]:
    """Evaluate models trained at ``k_train`` on test sets of other sizes."""
    return generalization_rows(models_by_seed, test_sets, k_train, regime)


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, study: str) -> str:
    cols = STUDY_COLUMNS[study]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def evaluate_seeds(models_by_seed: dict, test_set: SampleSet) -> dict:
    return {s: evaluate(m, test_set, s).normalized for s, m in models_by_seed.items()}
