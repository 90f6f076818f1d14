"""Training objectives and their analytic gradients.

All three losses sum over nodes and average over the ``B`` graphs of a
batch, and use base-2 logarithms.
"""

from __future__ import annotations

import numpy as np

__all__ = ["PSI_CLAMP", "supervised_loss", "unsupervised_loss", "contrastive_loss"]

PSI_CLAMP = 1e-12
LN2 = np.log(2.0)


def supervised_loss(psi, labels):
    """Binary cross-entropy against optimal schedules.

    Parameters
    ----------
    psi : (B, K) array
        Power levels from the scheduling head.
    labels : (B, K) array of 0/1
        Optimal schedules.

    Returns
    -------
    loss : float
    d_psi : (B, K) array
        Gradient of ``loss`` w.r.t. ``psi``; zero where ``psi`` was clamped.
    """
    if labels is None:
        raise RuntimeError("supervised loss needs labels")
    psi = np.asarray(psi, dtype=float)
    y = np.asarray(labels, dtype=float)
    if psi.shape != y.shape:
        raise ValueError(f"psi shape {psi.shape} != label shape {y.shape}")
    b = psi.shape[0]
    p = np.clip(psi, PSI_CLAMP, 1.0 - PSI_CLAMP)
    ll = y * np.log2(p) + (1.0 - y) * np.log2(1.0 - p)
    loss = -np.sum(ll) / b
    d_psi = -(y / p - (1.0 - y) / (1.0 - p)) / (b * LN2)
    d_psi = np.where(p == psi, d_psi, 0.0)
    return float(loss), d_psi


def unsupervised_loss(psi, gain_sq, noise_over_pmax: float):
    """Negative relaxed sum-rate averaged over the batch.

    ``gain_sq`` is ``(B, K, K)`` with ``gain_sq[b, v, u]`` the gain from Tx_u
    to Rx_v.  The gradient covers both the own-signal path of ``psi_v`` and
    its interference contribution to every other receiver.
    """
    psi = np.asarray(psi, dtype=float)
    g = np.asarray(gain_sq, dtype=float)
    if g.shape != psi.shape + psi.shape[-1:]:
        raise ValueError(f"gain shape {g.shape} incompatible with psi shape {psi.shape}")
    b, k = psi.shape
    off = ~np.eye(k, dtype=bool)
    g_off = np.where(off, g, 0.0)
    signal = np.diagonal(g, axis1=-2, axis2=-1) * psi
    interference = np.einsum("bvu,bu->bv", g_off, psi) + noise_over_pmax
    total = interference + signal
    loss = -np.sum(np.log2(1.0 + signal / interference)) / b
    # rate_v = log2(total_v) - log2(interference_v)
    d_rate_total = 1.0 / (total * LN2)
    d_rate_interf = -1.0 / (interference * LN2)
    d_psi = np.einsum("bv,bvu->bu", d_rate_total, g) + np.einsum("bv,bvu->bu", d_rate_interf, g_off)
    return float(loss), -d_psi / b


def _flatten(emb):
    if isinstance(emb, np.ndarray) and emb.ndim == 3:
        return emb.reshape(-1, emb.shape[-1]), emb.shape[0], emb.shape
    parts = [np.asarray(e, dtype=float) for e in emb]
    return np.concatenate(parts, axis=0), len(parts), [p.shape[0] for p in parts]


def _unflatten(flat, shape):
    if isinstance(shape, tuple):
        return flat.reshape(shape)
    return np.split(flat, np.cumsum(shape)[:-1])


def contrastive_loss(emb_a, emb_b, tau: float = 0.1):
    """Node-level contrastive loss between two views of the same graphs.

    Each node of view ``a`` is scored against every node of view ``b`` in
    the whole batch; its own counterpart is the positive.  The positive is
    kept in the denominator, so the loss is non-negative.

    ``emb_a`` and ``emb_b`` are ``(B, K, F)`` arrays or equal-length lists of
    ``(K_i, F)`` arrays.  Returns ``(loss, d_emb_a, d_emb_b)`` with gradients
    in the same layout as the inputs.
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    a, b, shape = _flatten(emb_a)
    bb, b2, shape_b = _flatten(emb_b)
    if a.shape != bb.shape or b != b2:
        raise ValueError("both views must have matching node counts and embedding widths")
    s = a @ bb.T / tau
    s_max = s.max(axis=1, keepdims=True)
    e = np.exp(s - s_max)
    denom = e.sum(axis=1, keepdims=True)
    lse = s_max[:, 0] + np.log(denom[:, 0])
    loss = np.sum(lse - np.diag(s)) / (b * LN2)
    d_s = e / denom
    d_s[np.diag_indices_from(d_s)] -= 1.0
    d_s /= b * LN2
    d_a = d_s @ bb / tau
    d_b = d_s.T @ a / tau
    return float(loss), _unflatten(d_a, shape), _unflatten(d_b, shape_b)
