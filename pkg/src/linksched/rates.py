"""Per-link rates under treating interference as noise, and the
exhaustive-search labeling oracle for binary link scheduling."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelRealization,
    GeometryParams,
    PathLossParams,
    SystemParams,
    generate_channel,
)

__all__ = [
    "ScheduleSizeError",
    "LabeledSample",
    "link_rates",
    "sum_rate",
    "batch_sum_rates",
    "schedule_from_index",
    "exhaustive_search",
    "label_timing_benchmark",
    "benchmark_csv",
]

K_MAX_EXHAUSTIVE = 20


class ScheduleSizeError(ValueError):
    pass


@dataclass
class LabeledSample:
    channel: ChannelRealization
    optimal_schedule: np.ndarray  # int8 0/1
    optimal_sum_rate: float
    label_wallclock: float = 0.0
    evaluated: int = 0


def _noise(sys):
    return sys.noise_over_pmax if isinstance(sys, SystemParams) else float(sys)


def link_rates(channel, gamma, sys: SystemParams | float = SystemParams()) -> np.ndarray:
    """Rates in bits/s/Hz for (possibly relaxed) power levels ``gamma``.

    ``channel`` may be a :class:`ChannelRealization` or a bare gain matrix;
    ``sys`` may be a :class:`SystemParams` or the ratio N/P_max directly.
    """
    g = channel.gain_sq if isinstance(channel, ChannelRealization) else np.asarray(channel, float)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (g.shape[0],):
        raise ValueError(f"schedule length {gamma.shape} does not match K={g.shape[0]}")
    if np.any(gamma < 0) or np.any(gamma > 1):
        raise ValueError("power levels must lie in [0, 1]")
    signal = np.diag(g) * gamma
    cross = g * gamma[None, :]
    np.fill_diagonal(cross, 0.0)
    interference = cross.sum(axis=1) + _noise(sys)
    return np.log2(1.0 + signal / interference)


def sum_rate(channel, gamma, sys: SystemParams | float = SystemParams()) -> float:
    return float(np.sum(link_rates(channel, gamma, sys)))


def batch_sum_rates(gain_sq, gamma, noise_over_pmax: float) -> np.ndarray:
    """Sum-rate of every sample in a stack, ``gain_sq`` ``(B, K, K)`` and ``gamma`` ``(B, K)``."""
    g = np.asarray(gain_sq, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    k = g.shape[-1]
    off = ~np.eye(k, dtype=bool)
    signal = np.diagonal(g, axis1=-2, axis2=-1) * gamma
    interference = np.sum(np.where(off, g * gamma[:, None, :], 0.0), axis=-1) + noise_over_pmax
    return np.sum(np.log2(1.0 + signal / interference), axis=-1)


def schedule_from_index(n: int, k: int) -> np.ndarray:
    """Big-endian bit expansion: link 1 is the most significant bit."""
    return np.array([(n >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.int8)


def exhaustive_search(
    channel, sys: SystemParams | float = SystemParams(), k_max: int = K_MAX_EXHAUSTIVE
) -> LabeledSample:
    """Optimal binary schedule by enumerating all ``2**K`` on/off patterns.

    Patterns are visited in counting order, each evaluated from scratch; the
    first maximizer wins, so ties go to the smallest big-endian integer.
    ``channel`` may be a :class:`ChannelRealization` or a bare gain matrix.
    """
    if not isinstance(channel, ChannelRealization):
        channel = ChannelRealization(channel)
    k = channel.k
    if k > k_max:
        raise ScheduleSizeError(f"K={k} exceeds exhaustive-search cap {k_max}")
    t0 = time.perf_counter()
    best_n, best_val = 0, -np.inf
    for n in range(2**k):
        val = sum_rate(channel, schedule_from_index(n, k), sys)
        if val > best_val:
            best_n, best_val = n, val
    elapsed = time.perf_counter() - t0
    return LabeledSample(
        channel=channel,
        optimal_schedule=schedule_from_index(best_n, k),
        optimal_sum_rate=best_val,
        label_wallclock=elapsed,
        evaluated=2**k,
    )


def label_timing_benchmark(
    k_values,
    n_samples: int,
    sys: SystemParams = SystemParams(),
    geom: GeometryParams = GeometryParams(),
    pl: PathLossParams = PathLossParams(),
    seed: int = 0,
) -> list[dict]:
    """Mean wall-clock to produce one unlabeled and one labeled sample per K."""
    rows = []
    for k in k_values:
        if k > K_MAX_EXHAUSTIVE:
            raise ScheduleSizeError(f"K={k} exceeds exhaustive-search cap {K_MAX_EXHAUSTIVE}")
        # one untimed draw so first-call costs do not land on the smallest K
        exhaustive_search(generate_channel(k, seed, n_samples, "bench", geom, pl), sys)
        # generation and labeling are timed in separate passes so the cost of
        # drawing a channel is not measured right after a long search
        channels, t_unl = [], 0.0
        for i in range(n_samples):
            t0 = time.perf_counter()
            channels.append(generate_channel(k, seed, i, "bench", geom, pl))
            t_unl += time.perf_counter() - t0
        t_search, evals = 0.0, 0
        for ch in channels:
            t0 = time.perf_counter()
            lab = exhaustive_search(ch, sys)
            t_search += time.perf_counter() - t0
            evals = lab.evaluated
        t_lab = t_unl + t_search
        rows.append(
            {"k": k, "t_unlabeled_s": t_unl / n_samples, "t_labeled_s": t_lab / n_samples, "evals": evals}
        )
    return rows


def benchmark_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "t_unlabeled_s", "t_labeled_s", "evals"])
    for r in rows:
        w.writerow([r["k"], f"{r['t_unlabeled_s']:.6f}", f"{r['t_labeled_s']:.6f}", r["evals"]])
    return buf.getvalue()
