"""Interference graph construction.

Node ``v`` carries the normalized log-SNR of link ``v``; the directed edge
``(u, v)`` carries the normalized log-INR from Tx_u at Rx_v, i.e. it is
built from ``gain_sq[v, u]``.  All ``K**2`` log terms share one
normalization constant so that, stacked together, they have unit norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, SystemParams

__all__ = [
    "DegenerateGraph",
    "InterferenceGraph",
    "GraphBatch",
    "log_ratios",
    "build_graph",
    "build_batch",
    "permute_graph",
]


class DegenerateGraph(ValueError):
    pass


@dataclass
class InterferenceGraph:
    node_features: np.ndarray  # (K, F0)
    edge_index: np.ndarray  # (E, 2), rows are (source u, target v)
    edge_weights: np.ndarray  # (E,)
    norm_z: float

    @property
    def n_nodes(self) -> int:
        return self.node_features.shape[0]

    def adjacency(self) -> np.ndarray:
        """Dense incoming-weight matrix ``A[v, u] = e_{u,v}`` (zero when absent)."""
        k = self.n_nodes
        a = np.zeros((k, k))
        a[self.edge_index[:, 1], self.edge_index[:, 0]] = self.edge_weights
        return a


def complete_edges(k: int) -> np.ndarray:
    """All ordered pairs ``(u, v)`` with ``u != v``, sorted by target then source."""
    v, u = np.divmod(np.arange(k * k), k)
    keep = u != v
    return np.stack([u[keep], v[keep]], axis=1)


def log_ratios(gain_sq, noise_over_pmax: float) -> np.ndarray:
    """``ln(P_max |h_vu|^2 / N)`` for every receiver ``v`` and transmitter ``u``."""
    g = np.asarray(gain_sq, dtype=float)
    if np.any(~(g > 0)) or not np.all(np.isfinite(g)):
        raise ValueError("channel gains must be positive and finite")
    return np.log(g / noise_over_pmax)


def build_graph(channel, sys: SystemParams | float = SystemParams()) -> InterferenceGraph:
    g = channel.gain_sq if isinstance(channel, ChannelRealization) else np.asarray(channel, float)
    n0 = sys.noise_over_pmax if isinstance(sys, SystemParams) else float(sys)
    logs = log_ratios(g, n0)
    z = float(np.sqrt(np.sum(logs * logs)))
    if z == 0.0:
        raise DegenerateGraph("all SNR/INR terms equal 1, normalization constant is zero")
    normed = logs / z
    edges = complete_edges(g.shape[0])
    return InterferenceGraph(
        node_features=np.diag(normed).copy()[:, None],
        edge_index=edges,
        edge_weights=normed[edges[:, 1], edges[:, 0]],
        norm_z=z,
    )


def permute_graph(graph: InterferenceGraph, perm) -> InterferenceGraph:
    """Relabel nodes so that new node ``i`` is old node ``perm[i]``."""
    perm = np.asarray(perm)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    edges = inv[graph.edge_index]
    order = np.lexsort((edges[:, 0], edges[:, 1]))
    return InterferenceGraph(
        node_features=graph.node_features[perm],
        edge_index=edges[order],
        edge_weights=graph.edge_weights[order],
        norm_z=graph.norm_z,
    )


@dataclass
class GraphBatch:
    """``B`` graphs with ``K`` nodes each, stored densely."""

    x0: np.ndarray  # (B, K, F0)
    adj: np.ndarray  # (B, K, K), adj[b, v, u] = e_uv

    @classmethod
    def from_graphs(cls, graphs: list[InterferenceGraph]) -> "GraphBatch":
        sizes = {g.n_nodes for g in graphs}
        if len(sizes) != 1:
            raise ValueError(f"a batch needs graphs of one size, got sizes {sorted(sizes)}")
        return cls(
            x0=np.stack([g.node_features for g in graphs]),
            adj=np.stack([g.adjacency() for g in graphs]),
        )

    @property
    def deg(self) -> np.ndarray:
        return self.adj.sum(axis=2)

    def __len__(self):
        return self.x0.shape[0]

    def __getitem__(self, idx) -> "GraphBatch":
        return GraphBatch(self.x0[idx], self.adj[idx])


def build_batch(gain_sq, noise_over_pmax: float) -> GraphBatch:
    """Vectorized :func:`build_graph` for a ``(B, K, K)`` stack of complete graphs."""
    logs = log_ratios(gain_sq, noise_over_pmax)
    z = np.sqrt(np.sum(logs * logs, axis=(-2, -1), keepdims=True))
    if np.any(z == 0.0):
        raise DegenerateGraph("all SNR/INR terms equal 1, normalization constant is zero")
    normed = logs / z
    k = normed.shape[-1]
    x0 = np.diagonal(normed, axis1=-2, axis2=-1)[..., None].copy()
    adj = np.where(np.eye(k, dtype=bool), 0.0, normed)
    return GraphBatch(x0, adj)
