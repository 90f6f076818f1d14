import dataclasses

import numpy as np
import pytest

from linksched.channel import generate_channel, make_rng
from linksched.gnn import init_model
from linksched.graph import build_graph
from linksched.training import (
    TrainingRegime,
    augment,
    augment_batch,
    perturb_gains,
    prune_mask,
    train,
)

N0 = 10 ** (-11.4)
TINY = dict(dims=(1, 16, 16, 16), batch_size=16)


def test_identity_augmentation():
    ch = generate_channel(5, 1, 0)
    pair = augment(ch, make_rng(0), N0, low=1.0, high=1.0, prune=False)
    ref = build_graph(ch, N0)
    for view in (pair.view_a, pair.view_b):
        assert np.array_equal(view.node_features, ref.node_features)
        assert np.array_equal(view.edge_index, ref.edge_index)
        assert np.array_equal(view.edge_weights, ref.edge_weights)


def test_augmentation_structure():
    ch = generate_channel(6, 1, 1)
    pair = augment(ch, make_rng(1), N0)
    assert pair.view_a.n_nodes == pair.view_b.n_nodes == 6
    # a quarter of the 30 cross links fall at or below the 25th percentile
    assert len(pair.view_a.edge_weights) < 30
    assert not np.array_equal(pair.view_a.node_features, pair.view_b.node_features)


def test_perturbation_factor_distribution():
    g = np.ones(10_000)
    f = np.sqrt(perturb_gains(g, make_rng(5)))
    assert f.min() >= 0.9 and f.max() <= 1.1
    assert abs(f.mean() - 1.0) < 0.005


def test_prune_mask_keeps_diagonal_and_drops_weakest():
    logs = np.arange(16, dtype=float).reshape(4, 4)
    keep = prune_mask(logs, 0.25)
    assert np.all(np.diag(keep))
    off = ~np.eye(4, dtype=bool)
    cross = logs[off]
    assert np.array_equal(keep[off], cross > np.quantile(cross, 0.25))


def test_dense_augment_matches_graph_augment():
    ch = generate_channel(5, 2, 2)
    pair = augment(ch, make_rng(3), N0)
    batch = augment_batch(ch.gain_sq[None], make_rng(3), N0)
    assert np.allclose(batch.adj[0], pair.view_a.adjacency(), atol=0)
    assert np.allclose(batch.x0[0], pair.view_a.node_features, atol=0)


def test_regime_validation():
    with pytest.raises(ValueError):
        TrainingRegime(kind="reinforce")
    with pytest.raises(ValueError):
        TrainingRegime(tau=0)
    assert TrainingRegime(kind="ssl_then_supervised").supervised
    assert not TrainingRegime(kind="ssl_then_unsupervised").supervised
    assert TrainingRegime(kind="ssl_then_unsupervised").uses_ssl


def test_zero_epochs_returns_initialization(small_sets):
    tr, te = small_sets
    res = train(tr, te, TrainingRegime(epochs=0, **TINY), seed=4)
    ref = init_model((1, 16, 16, 16), make_rng(4, 10))
    assert res.log == []
    for k in ref.params:
        assert np.array_equal(res.model.params[k], ref.params[k])


def test_ssl_leaves_head_untouched(small_sets):
    tr, te = small_sets
    regime = TrainingRegime(kind="ssl_then_supervised", epochs=0, ssl_epochs=2, **TINY)
    res = train(tr, te, regime, seed=4)
    ref = init_model((1, 16, 16, 16), make_rng(4, 10))
    assert np.array_equal(res.model.params["head.w"], ref.params["head.w"])
    assert np.array_equal(res.model.params["head.b"], ref.params["head.b"])
    assert not np.array_equal(res.model.params["layer0.self"], ref.params["layer0.self"])
    assert len(res.ssl_log) == 2 and all(np.isfinite(r["ssl_loss"]) for r in res.ssl_log)


@pytest.mark.parametrize("kind", ["supervised", "unsupervised", "ssl_then_unsupervised"])
def test_training_deterministic(small_sets, kind):
    tr, te = small_sets
    regime = TrainingRegime(kind=kind, epochs=3, ssl_epochs=1, **TINY)
    a = train(tr, te, regime, seed=1)
    b = train(tr, te, regime, seed=1)
    assert a.log == b.log
    c = train(tr, te, regime, seed=2)
    assert a.log != c.log


def test_training_improves_and_tracks_best(small_sets):
    tr, te = small_sets
    res = train(tr, te, TrainingRegime(epochs=20, **TINY), seed=0)
    assert len(res.log) == 20
    assert res.best_metric == max(res.metrics)
    assert res.metrics[res.best_epoch - 1] == res.best_metric
    assert res.best_metric > 0.8
    assert res.log[-1]["train_loss"] < res.log[0]["train_loss"]


def test_supervised_needs_labels(small_sets):
    tr, te = small_sets
    unlabeled = dataclasses.replace(tr, labels=None, optimal_rates=None, _graphs=None)
    with pytest.raises(ValueError, match="labeled"):
        train(unlabeled, te, TrainingRegime(epochs=1, **TINY))
    train(unlabeled, te, TrainingRegime(kind="unsupervised", epochs=1, **TINY))
