"""Training regimes: supervised, unsupervised, and contrastive pre-training
followed by either of the two."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import make_rng
from .data import SampleSet
from .evaluation import normalized_sum_rate
from .gnn import Adam, GnnModel, gnn_backward, gnn_forward, init_model
from .graph import GraphBatch, InterferenceGraph, build_batch, build_graph, log_ratios
from .losses import contrastive_loss, supervised_loss, unsupervised_loss

__all__ = [
    "REGIMES",
    "NumericalFailure",
    "TrainingRegime",
    "AugmentedPair",
    "TrainResult",
    "perturb_gains",
    "prune_mask",
    "augment",
    "augment_batch",
    "train",
]

log = logging.getLogger(__name__)

REGIMES = ("supervised", "unsupervised", "ssl_then_supervised", "ssl_then_unsupervised")

# stream ids under a training seed
_INIT, _SHUFFLE, _AUGMENT = 10, 11, 12


class NumericalFailure(FloatingPointError):
    pass


@dataclass(frozen=True)
class TrainingRegime:
    kind: str = "supervised"
    epochs: int = 500
    ssl_epochs: int = 100
    tau: float = 0.1
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    dims: tuple = (1, 64, 64, 64)
    leaky_slope: float = 1e-2
    perturb_low: float = 0.9
    perturb_high: float = 1.1
    prune: bool = True
    prune_quantile: float = 0.25

    def __post_init__(self):
        if self.kind not in REGIMES:
            raise ValueError(f"unknown regime {self.kind!r}, expected one of {REGIMES}")
        if self.epochs < 0 or self.ssl_epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def supervised(self) -> bool:
        return self.kind.endswith("supervised") and not self.kind.endswith("unsupervised")

    @property
    def uses_ssl(self) -> bool:
        return self.kind.startswith("ssl_")

    @classmethod
    def from_config(cls, config, kind: str, **overrides) -> "TrainingRegime":
        t, m = config.training, config.model
        kw = dict(
            kind=kind,
            epochs=t.epochs,
            ssl_epochs=t.ssl_epochs,
            tau=t.tau,
            lr=t.lr,
            beta1=t.beta1,
            beta2=t.beta2,
            eps=t.eps,
            batch_size=t.batch_size,
            dims=tuple(m.dims),
            leaky_slope=m.leaky_slope,
            perturb_low=t.perturb_low,
            perturb_high=t.perturb_high,
            prune=t.prune,
            prune_quantile=t.prune_quantile,
        )
        kw.update(overrides)
        return cls(**kw)


@dataclass
class AugmentedPair:
    view_a: InterferenceGraph
    view_b: InterferenceGraph


@dataclass
class TrainResult:
    model: GnnModel
    best_model: GnnModel
    best_epoch: int | None
    best_metric: float
    log: list[dict] = field(default_factory=list)
    ssl_log: list[dict] = field(default_factory=list)
    initial_metric: float = float("nan")

    @property
    def metrics(self) -> list[float]:
        return [row["test_norm_sum_rate"] for row in self.log]


def perturb_gains(gain_sq, rng, low=0.9, high=1.1):
    """Scale each |h| by an independent U[low, high] factor, so |h|^2 by its square."""
    f = rng.uniform(low, high, size=np.shape(gain_sq))
    return np.asarray(gain_sq) * f * f


def prune_mask(logs, quantile=0.25):
    """Edges to keep: cross links whose log-INR is above the graph's
    ``quantile`` of log-INR values.  ``logs`` is ``(..., K, K)``; the
    diagonal (own links) is always kept."""
    k = logs.shape[-1]
    off = ~np.eye(k, dtype=bool)
    if k < 2:
        return np.ones(logs.shape, dtype=bool)
    cross = logs[..., off]
    thresh = np.quantile(cross, quantile, axis=-1)
    return (logs > thresh[..., None, None]) | ~off


def augment(channel, rng, sys, low=0.9, high=1.1, prune=True, prune_quantile=0.25) -> AugmentedPair:
    """Two independently perturbed and pruned views of one channel.

    Weak interferers, in the sense of the treating-interference-as-noise
    optimality condition, barely move the optimal schedule, so dropping the
    weakest cross links keeps the views semantically close.
    """
    g = channel.gain_sq if hasattr(channel, "gain_sq") else np.asarray(channel, float)
    n0 = sys.noise_over_pmax if hasattr(sys, "noise_over_pmax") else float(sys)
    views = []
    for _ in range(2):
        gv = perturb_gains(g, rng, low, high)
        graph = build_graph(gv, n0)
        if prune and graph.n_nodes > 1:
            keep = prune_mask(log_ratios(gv, n0), prune_quantile)
            sel = keep[graph.edge_index[:, 1], graph.edge_index[:, 0]]
            graph.edge_index = graph.edge_index[sel]
            graph.edge_weights = graph.edge_weights[sel]
        views.append(graph)
    return AugmentedPair(*views)


def augment_batch(gain_sq, rng, n0, low=0.9, high=1.1, prune=True, prune_quantile=0.25) -> GraphBatch:
    """One augmented view of every sample in a ``(B, K, K)`` stack (dense form
    of :func:`augment`)."""
    gv = perturb_gains(gain_sq, rng, low, high)
    batch = build_batch(gv, n0)
    if prune and gv.shape[-1] > 1:
        batch.adj = np.where(prune_mask(log_ratios(gv, n0), prune_quantile), batch.adj, 0.0)
    return batch


def _check_finite(loss, phase, epoch, batch_idx):
    if not np.isfinite(loss):
        raise NumericalFailure(f"non-finite {phase} loss {loss} at epoch {epoch}, batch {batch_idx}")


def _batches(n, batch_size, rng):
    order = rng.permutation(n)
    return [order[i : i + batch_size] for i in range(0, n, batch_size)]


def pretrain_contrastive(model, train_set: SampleSet, regime: TrainingRegime, seed: int) -> list[dict]:
    """Contrastive epochs that update only the backbone parameters."""
    opt = Adam(regime.lr, regime.beta1, regime.beta2, regime.eps)
    keys = model.backbone_keys()
    history = []
    for epoch in range(1, regime.ssl_epochs + 1):
        shuffle = make_rng(seed, _SHUFFLE, 0, epoch)
        aug = make_rng(seed, _AUGMENT, epoch)
        total = 0.0
        batches = _batches(len(train_set), regime.batch_size, shuffle)
        for bi, idx in enumerate(batches):
            gains = train_set.gain_sq[idx]
            views = [
                augment_batch(
                    gains, aug, train_set.noise_over_pmax, regime.perturb_low, regime.perturb_high,
                    regime.prune, regime.prune_quantile,
                )
                for _ in range(2)
            ]
            emb_a, _, tr_a = gnn_forward(views[0], model)
            emb_b, _, tr_b = gnn_forward(views[1], model)
            loss, d_a, d_b = contrastive_loss(emb_a, emb_b, regime.tau)
            _check_finite(loss, "contrastive", epoch, bi)
            g_a = gnn_backward(tr_a, views[0], model, d_emb=d_a)
            g_b = gnn_backward(tr_b, views[1], model, d_emb=d_b)
            opt.step(model.params, {k: g_a[k] + g_b[k] for k in keys}, keys)
            total += loss
        history.append({"epoch": epoch, "ssl_loss": total / len(batches)})
    return history


def train(
    train_set: SampleSet,
    test_set: SampleSet,
    regime: TrainingRegime,
    seed: int = 0,
    model: GnnModel | None = None,
    callback=None,
) -> TrainResult:
    """Train one model and track the normalized test sum-rate after every epoch.

    The run is a pure function of the data, the regime and ``seed``.  When
    ``model`` is given it is trained in place of a fresh initialization.
    """
    if regime.supervised and not train_set.labeled:
        raise ValueError(f"regime {regime.kind} needs a labeled training set")
    if test_set.optimal_rates is None:
        raise ValueError("test set needs optimal sum-rates for normalization")
    if model is None:
        model = init_model(regime.dims, make_rng(seed, _INIT), regime.leaky_slope)

    ssl_log = pretrain_contrastive(model, train_set, regime, seed) if regime.uses_ssl else []

    opt = Adam(regime.lr, regime.beta1, regime.beta2, regime.eps)
    n0 = train_set.noise_over_pmax
    graphs = train_set.graphs
    best_model = model.copy()
    best_metric, best_epoch = normalized_sum_rate(model, test_set), None
    initial = best_metric
    history = []
    for epoch in range(1, regime.epochs + 1):
        total = 0.0
        batches = _batches(len(train_set), regime.batch_size, make_rng(seed, _SHUFFLE, 1, epoch))
        for bi, idx in enumerate(batches):
            batch = graphs[idx]
            _, psi, trace = gnn_forward(batch, model)
            if regime.supervised:
                loss, d_psi = supervised_loss(psi, train_set.labels[idx])
            else:
                loss, d_psi = unsupervised_loss(psi, train_set.gain_sq[idx], n0)
            _check_finite(loss, regime.kind, epoch, bi)
            opt.step(model.params, gnn_backward(trace, batch, model, d_psi=d_psi))
            total += loss
        metric = normalized_sum_rate(model, test_set)
        row = {"epoch": epoch, "train_loss": total / len(batches), "test_norm_sum_rate": metric}
        history.append(row)
        if best_epoch is None or metric > best_metric:
            best_metric, best_epoch, best_model = metric, epoch, model.copy()
        if callback is not None:
            callback(row)
    log.debug("%s seed=%s best %.4f at epoch %s", regime.kind, seed, best_metric, best_epoch)
    return TrainResult(model, best_model, best_epoch, best_metric, history, ssl_log, initial)
