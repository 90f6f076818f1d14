"""Evaluation of trained schedulers against the exhaustive-search optimum,
plus the aggregation helpers behind the four comparison studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SampleSet
from .gnn import GnnModel, gnn_forward, threshold_schedule
from .rates import batch_sum_rates

__all__ = [
    "EvalReport",
    "evaluate",
    "normalized_sum_rate",
    "convergence_epoch",
    "aggregate",
    "generalization_rows",
]


@dataclass
class EvalReport:
    achieved: np.ndarray
    optimal: np.ndarray
    all_on: np.ndarray
    seed: int | None = None
    k_train: int | None = None
    k_test: int | None = None

    @property
    def normalized(self) -> float:
        """Ratio of sums, the headline metric."""
        return float(self.achieved.sum() / self.optimal.sum())

    @property
    def mean_of_ratios(self) -> float:
        return float(np.mean(self.achieved / self.optimal))

    @property
    def all_on_normalized(self) -> float:
        return float(self.all_on.sum() / self.optimal.sum())


def _achieved(model: GnnModel, test_set: SampleSet, chunk: int = 4096):
    out = []
    for start in range(0, len(test_set), chunk):
        idx = slice(start, start + chunk)
        _, psi, _ = gnn_forward(test_set.graphs[idx], model)
        gamma = threshold_schedule(psi)
        out.append(batch_sum_rates(test_set.gain_sq[idx], gamma, test_set.noise_over_pmax))
    return np.concatenate(out)


def evaluate(model: GnnModel, test_set: SampleSet, seed=None, k_train=None) -> EvalReport:
    """Threshold the model's power levels and compare with the stored optima."""
    if len(test_set) == 0:
        raise ValueError("empty test set")
    if test_set.optimal_rates is None:
        raise ValueError("test set needs optimal sum-rates (label it first)")
    if np.any(test_set.optimal_rates <= 0):
        raise ValueError("optimal sum-rates must be positive")
    ones = np.ones(test_set.gain_sq.shape[:2])
    return EvalReport(
        achieved=_achieved(model, test_set),
        optimal=np.asarray(test_set.optimal_rates, dtype=float),
        all_on=batch_sum_rates(test_set.gain_sq, ones, test_set.noise_over_pmax),
        seed=seed,
        k_train=k_train,
        k_test=test_set.k,
    )


def normalized_sum_rate(model: GnnModel, test_set: SampleSet) -> float:
    return float(_achieved(model, test_set).sum() / test_set.optimal_rates.sum())


def convergence_epoch(metric_log, threshold: float = 0.8):
    """First 1-based epoch whose metric strictly exceeds ``threshold``, else None.

    ``metric_log`` is a sequence of floats or of log rows carrying a
    ``test_norm_sum_rate`` entry.
    """
    for i, m in enumerate(metric_log, start=1):
        val = m["test_norm_sum_rate"] if isinstance(m, dict) else m
        if val > threshold:
            return i
    return None


def aggregate(values) -> tuple[float, float]:
    """Mean and population std of per-seed values, ignoring ``None``."""
    vals = np.array([v for v in values if v is not None], dtype=float)
    if vals.size == 0:
        return float("nan"), float("nan")
    return float(vals.mean()), float(vals.std())


def generalization_rows(models_by_seed: dict, test_sets: dict, k_train: int, regime: str) -> list[dict]:
    """Evaluate the seed models of one ``(k_train, regime)`` cell on every
    test size.  ``test_sets`` maps ``k_test`` to a labeled :class:`SampleSet`."""
    rows = []
    for k_test in sorted(test_sets):
        per_seed = {s: evaluate(m, test_sets[k_test], s, k_train).normalized for s, m in models_by_seed.items()}
        mean, std = aggregate(per_seed.values())
        rows.append(
            {"k_train": k_train, "k_test": k_test, "regime": regime, "mean": mean, "std": std, "per_seed": per_seed}
        )
    return rows
