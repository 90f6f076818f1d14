"""
Larger networks and fewer samples
=================================

A model trained at K=4 is evaluated on bigger networks, and the training
set is cut down to its first n samples.
"""

from linksched import ExperimentConfig, TrainingRegime, generate_dataset, label_dataset
from linksched.studies import generalization_sweep, sample_complexity_sweep

cfg = ExperimentConfig()


def labeled(k, split, n):
    ds = generate_dataset(cfg, k, split, n)
    label_dataset(ds)
    return ds.to_sample_set(require_labels=True)


train_set, test_set = labeled(4, "train", 128), labeled(4, "test", 64)
regime = TrainingRegime.from_config(cfg, "unsupervised", epochs=30)

for row in sample_complexity_sweep(train_set, test_set, regime, sizes=(16, 32, 128), seeds=(0,)):
    print(f"n_train={row['n_train']:>4}: best normalized sum-rate {row['mean']:.3f}")

from linksched import train  # noqa: E402

model = train(train_set, test_set, regime, seed=0).best_model
tests = {k: labeled(k, "test", 32) for k in (4, 6, 8)}
for row in generalization_sweep({0: model}, tests, 4, "unsupervised"):
    print(f"trained K=4, tested K={row['k_test']}: {row['mean']:.3f}")
