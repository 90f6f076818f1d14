"""
What labels cost
================

Drawing a channel is cheap at any size; labeling it means trying all 2^K
schedules.
"""

from linksched.rates import benchmark_csv, label_timing_benchmark

rows = label_timing_benchmark(range(4, 11), n_samples=5)
print(benchmark_csv(rows))
r4, r10 = rows[0], rows[-1]
print(f"K 4 -> 10: labeled time x{r10['t_labeled_s'] / r4['t_labeled_s']:.0f}, "
      f"unlabeled time x{r10['t_unlabeled_s'] / r4['t_unlabeled_s']:.1f}")
