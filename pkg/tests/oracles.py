"""Slow, loop-based reference implementations used only by the tests.

Nothing here imports the vectorized code paths it is compared against.
"""

import itertools
import math

import numpy as np


def rate_loop(gain, gamma, n0):
    k = len(gamma)
    out = []
    for i in range(k):
        interf = n0
        for j in range(k):
            if j != i:
                interf += gain[i][j] * gamma[j]
        out.append(math.log2(1.0 + gain[i][i] * gamma[i] / interf))
    return out


def sum_rate_loop(gain, gamma, n0):
    return math.fsum(rate_loop(gain, gamma, n0))


def enumerate_best(gain, n0):
    """Brute-force argmax over itertools.product, first maximum wins.

    ``product((0, 1), repeat=k)`` yields schedules in increasing big-endian
    integer order, which fixes the tie rule.
    """
    k = len(gain)
    best, best_val = None, -math.inf
    for sched in itertools.product((0, 1), repeat=k):
        val = sum_rate_loop(gain, sched, n0)
        if val > best_val:
            best, best_val = sched, val
    return list(best), best_val


def graph_loop(gain, n0):
    """Node features, edge dict {(u, v): weight} and Z from the definitions."""
    k = len(gain)
    logs = [[math.log(gain[v][u] / n0) for u in range(k)] for v in range(k)]
    z = math.sqrt(sum(logs[v][u] ** 2 for v in range(k) for u in range(k)))
    feats = [logs[v][v] / z for v in range(k)]
    edges = {(u, v): logs[v][u] / z for v in range(k) for u in range(k) if u != v}
    return feats, edges, z


def leaky(x, slope):
    return x if x > 0 else slope * x


def layer_loop(x, edges, w_self, w_center, w_nbr, slope):
    """Per-node evaluation of the convolution with an explicit edge dict."""
    k = x.shape[0]
    out = np.zeros((k, w_self.shape[1]))
    for v in range(k):
        acc = x[v] @ w_self
        for u in range(k):
            if (u, v) in edges:
                acc = acc + edges[(u, v)] * (x[v] @ w_center - x[u] @ w_nbr)
        out[v] = [leaky(a, slope) for a in acc]
    return out


def forward_loop(x0, edges, params, dims, slope):
    x = np.asarray(x0, dtype=float)
    for l in range(len(dims) - 1):
        x = layer_loop(x, edges, params[f"layer{l}.self"], params[f"layer{l}.center"],
                       params[f"layer{l}.neighbor"], slope)
    z = x @ params["head.w"] + params["head.b"][0]
    psi = np.array([1.0 / (1.0 + math.exp(-zi)) for zi in z])
    return x, psi


def supervised_loop(psi_batch, labels_batch):
    b = len(psi_batch)
    total = 0.0
    for psi, lab in zip(psi_batch, labels_batch):
        for p, y in zip(psi, lab):
            total += y * math.log2(p) + (1 - y) * math.log2(1 - p)
    return -total / b


def unsupervised_loop(psi_batch, gains, n0):
    b = len(psi_batch)
    return -sum(sum_rate_loop(g, psi, n0) for psi, g in zip(psi_batch, gains)) / b


def contrastive_loop(emb_a, emb_b, tau):
    """Nested-loop node-level contrastive loss over lists of (K_i, F) arrays."""
    b = len(emb_a)
    all_b = [row for graph in emb_b for row in graph]
    total = 0.0
    for i in range(b):
        for v in range(len(emb_a[i])):
            num = math.exp(float(emb_a[i][v] @ emb_b[i][v]) / tau)
            den = sum(math.exp(float(emb_a[i][v] @ row) / tau) for row in all_b)
            total += math.log2(num / den)
    return -total / b


def numeric_grad(f, arr, h=1e-5):
    """Central differences of scalar ``f()`` w.r.t. every entry of ``arr`` (mutated and restored)."""
    grad = np.zeros_like(arr)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        gflat[i] = (fp - fm) / (2 * h)
    return grad


def rel_error(analytic, numeric):
    """Max absolute deviation scaled by the larger of the two tensors' max magnitudes."""
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-300)
    return float(np.max(np.abs(analytic - numeric)) / scale)
