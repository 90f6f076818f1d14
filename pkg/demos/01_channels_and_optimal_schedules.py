"""
Channels, rates and optimal schedules
=====================================

Drop a handful of transmitter/receiver pairs, look at the gain matrix and
find the best on/off pattern by trying all of them.
"""

import numpy as np

from linksched import SystemParams, exhaustive_search, generate_channel, link_rates, sum_rate

sys = SystemParams()
print(f"noise / P_max = {sys.noise_over_pmax:.3e}")

# sample 0 of a K=6 network; the same (seed, index) always gives the same draw
ch = generate_channel(6, master_seed=1, index=0)
print("Tx positions (m):\n", np.round(ch.deployment.tx_positions, 1))
print("gain matrix in dB (row = receiver, column = transmitter):")
print(np.round(10 * np.log10(ch.gain_sq), 1))

# everyone on versus the exhaustive optimum
all_on = np.ones(6)
print("per-link rates, all on:", np.round(link_rates(ch, all_on, sys), 3))
best = exhaustive_search(ch, sys)
print("optimal schedule:", best.optimal_schedule, f"after {best.evaluated} evaluations")
print(f"sum-rate all on {sum_rate(ch, all_on, sys):.3f}, optimal {best.optimal_sum_rate:.3f} bit/s/Hz")

# switching off strong interferers is what makes the optimum better
off = np.flatnonzero(best.optimal_schedule == 0)
print("links switched off:", off)
