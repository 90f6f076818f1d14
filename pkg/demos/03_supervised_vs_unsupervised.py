"""
Supervised and unsupervised training
====================================

Train the same network twice on a small K=4 problem: once against
exhaustive-search labels, once by directly maximizing the sum-rate.
"""

from linksched import ExperimentConfig, TrainingRegime, generate_dataset, label_dataset, train

cfg = ExperimentConfig()
sets = {}
for split, n in (("train", 128), ("test", 128)):
    ds = generate_dataset(cfg, 4, split, n)
    label_dataset(ds)
    sets[split] = ds.to_sample_set(require_labels=True)

for kind in ("supervised", "unsupervised"):
    regime = TrainingRegime.from_config(cfg, kind, epochs=60)
    res = train(sets["train"], sets["test"], regime, seed=0)
    curve = [round(m, 3) for m in res.metrics[::10]]
    print(f"{kind:>12}: start {res.initial_metric:.3f}, every 10 epochs {curve}")
    print(f"{'':>12}  best {res.best_metric:.3f} at epoch {res.best_epoch}")
