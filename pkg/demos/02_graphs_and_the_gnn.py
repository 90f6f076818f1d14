"""
From a channel to a graph, and through the GNN
==============================================

Every link becomes a node, every interfering pair a weighted edge.  The
network maps node features to a power level per link.
"""

import numpy as np

from linksched import build_graph, generate_channel, gnn_forward, init_model, permute_graph
from linksched.gnn import threshold_schedule

n0 = 10 ** (-11.4)
ch = generate_channel(5, master_seed=2, index=0)
g = build_graph(ch, n0)
print("node features (normalized direct-link SNR):", np.round(g.node_features[:, 0], 3))
print(f"{len(g.edge_weights)} directed edges, normalizer Z = {g.norm_z:.2f}")

model = init_model(dims=(1, 64, 64, 64), rng=0)
emb, psi, _ = gnn_forward(g, model)
print("embedding shape:", emb.shape)
print("power levels psi:", np.round(psi[0], 3), "-> schedule", threshold_schedule(psi)[0])

# relabeling the links just relabels the outputs
perm = np.array([4, 2, 0, 3, 1])
_, psi_p, _ = gnn_forward(permute_graph(g, perm), model)
print("max deviation after relabeling:", np.max(np.abs(psi_p[0] - psi[0][perm])))

# the same weights run on any number of links
_, psi10, _ = gnn_forward(build_graph(generate_channel(10, 2, 1), n0), model)
print("K=10 power levels:", np.round(psi10[0], 3))
