"""
Contrastive pre-training
========================

Pre-train the message-passing layers on pairs of perturbed views, then
fine-tune with labels.  The question is how quickly each variant passes
80% of the optimal sum-rate.
"""

import numpy as np

from linksched import ExperimentConfig, TrainingRegime, convergence_epoch, generate_dataset, label_dataset, train
from linksched.channel import make_rng
from linksched.training import augment

cfg = ExperimentConfig()
n0 = cfg.system.noise_over_pmax

# what a pair of views looks like
ds = generate_dataset(cfg, 6, "train", 1)
ch = ds.channels()[0]
pair = augment(ch, make_rng(0), n0)
print("edges kept in the two views:", len(pair.view_a.edge_weights), len(pair.view_b.edge_weights), "of 30")
print("node feature shift:", np.round(pair.view_a.node_features[:, 0] - pair.view_b.node_features[:, 0], 3))

sets = {}
for split in ("train", "test"):
    d = generate_dataset(cfg, 4, split, 128)
    label_dataset(d)
    sets[split] = d.to_sample_set(require_labels=True)

for kind in ("supervised", "ssl_then_supervised"):
    regime = TrainingRegime.from_config(cfg, kind, epochs=40, ssl_epochs=20)
    res = train(sets["train"], sets["test"], regime, seed=1)
    extra = f", contrastive loss {res.ssl_log[0]['ssl_loss']:.2f} -> {res.ssl_log[-1]['ssl_loss']:.2f}" if res.ssl_log else ""
    print(f"{kind:>20}: converged at epoch {convergence_epoch(res.metrics)}, best {res.best_metric:.3f}{extra}")
