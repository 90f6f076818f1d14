"""Local extremum graph convolution backbone with a sigmoid scheduling head.

Each layer computes, for every node ``v``::

    x_v' = leaky( x_v W_self + sum_u e_uv (x_v W_center - x_u W_neighbor) )

where the sum runs over the in-neighbours of ``v``.  The head maps the last
embedding to a power level ``sigmoid(w . x_v + b)``.

Everything is plain numpy in float64 with a hand-written backward pass.
Graphs of one batch are stacked densely, so all graphs in a batch must
have the same number of nodes; pruned or missing edges are zeros in the
adjacency, which contributes nothing to the sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .graph import GraphBatch, InterferenceGraph

__all__ = [
    "GraphBatch",
    "GnnModel",
    "ForwardTrace",
    "Adam",
    "init_model",
    "lec_layer_forward",
    "lec_layer_backward",
    "gnn_forward",
    "gnn_backward",
    "threshold_schedule",
    "save_checkpoint",
    "load_checkpoint",
    "CHECKPOINT_FORMAT",
]

CHECKPOINT_FORMAT = "linksched-checkpoint/1"
LAYER_PARTS = ("self", "center", "neighbor")


@dataclass
class GnnModel:
    dims: list[int]
    params: dict[str, np.ndarray]
    leaky_slope: float = 1e-2

    @property
    def n_layers(self) -> int:
        return len(self.dims) - 1

    def layer(self, l: int):
        return tuple(self.params[f"layer{l}.{p}"] for p in LAYER_PARTS)

    @property
    def head_w(self) -> np.ndarray:
        return self.params["head.w"]

    @property
    def head_b(self) -> float:
        return float(self.params["head.b"][0])

    def backbone_keys(self) -> list[str]:
        return [k for k in self.params if k.startswith("layer")]

    def copy(self) -> "GnnModel":
        return GnnModel(list(self.dims), {k: v.copy() for k, v in self.params.items()}, self.leaky_slope)

    def check(self):
        for l in range(self.n_layers):
            for p in self.layer(l):
                if p.shape != (self.dims[l], self.dims[l + 1]):
                    raise ValueError(f"layer {l} parameter shape {p.shape} breaks dims {self.dims}")
        if self.head_w.shape != (self.dims[-1],):
            raise ValueError("head weight does not match embedding width")
        for k, v in self.params.items():
            if not np.all(np.isfinite(v)):
                raise FloatingPointError(f"non-finite values in {k}")


@dataclass
class ForwardTrace:
    inputs: list[np.ndarray] = field(default_factory=list)  # layer inputs
    pre: list[np.ndarray] = field(default_factory=list)  # pre-activations
    head_z: np.ndarray | None = None
    psi: np.ndarray | None = None


def init_model(dims=(1, 64, 64, 64), rng: np.random.Generator | int = 0, leaky_slope: float = 1e-2) -> GnnModel:
    """Glorot-uniform layer matrices and head weight, zero head bias."""
    dims = [int(d) for d in dims]
    if len(dims) < 2 or min(dims) < 1:
        raise ValueError(f"invalid dims {dims}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    params = {}
    for l in range(len(dims) - 1):
        bound = np.sqrt(6.0 / (dims[l] + dims[l + 1]))
        for p in LAYER_PARTS:
            params[f"layer{l}.{p}"] = rng.uniform(-bound, bound, size=(dims[l], dims[l + 1]))
    bound = np.sqrt(6.0 / (dims[-1] + 1))
    params["head.w"] = rng.uniform(-bound, bound, size=dims[-1])
    params["head.b"] = np.zeros(1)
    return GnnModel(dims, params, leaky_slope)


def _leaky(x, slope):
    return np.where(x > 0, x, slope * x)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lec_layer_forward(x, adj, params, slope=1e-2):
    """One convolution layer on a dense batch.

    ``x`` is ``(B, K, F_in)`` and ``adj[b, v, u]`` the weight of edge
    ``u -> v``.  Returns the activations and the pre-activation cache.
    """
    w_self, w_center, w_nbr = params
    if x.shape[-1] != w_self.shape[0]:
        raise ValueError(f"feature width {x.shape[-1]} does not match layer input {w_self.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise FloatingPointError("non-finite layer input")
    deg = adj.sum(axis=-1)[..., None]
    pre = x @ w_self + deg * (x @ w_center) - adj @ (x @ w_nbr)
    return _leaky(pre, slope), pre


def lec_layer_backward(d_out, x, adj, pre, params, slope=1e-2):
    """Gradients of one layer; returns ``(d_x, (d_self, d_center, d_neighbor))``."""
    w_self, w_center, w_nbr = params
    d_pre = d_out * np.where(pre > 0, 1.0, slope)
    deg = adj.sum(axis=-1)[..., None]
    d_pre_deg = deg * d_pre
    d_agg = np.swapaxes(adj, -1, -2) @ d_pre  # messages flow back to sources
    xt = np.swapaxes(x, -1, -2)
    grads = (
        np.sum(xt @ d_pre, axis=0),
        np.sum(xt @ d_pre_deg, axis=0),
        -np.sum(xt @ d_agg, axis=0),
    )
    d_x = d_pre @ w_self.T + d_pre_deg @ w_center.T - d_agg @ w_nbr.T
    return d_x, grads


def gnn_forward(batch: GraphBatch | InterferenceGraph, model: GnnModel):
    """Embeddings ``(B, K, F_L)``, power levels ``(B, K)`` and the trace.

    A single :class:`InterferenceGraph` is treated as a batch of one.
    """
    if isinstance(batch, InterferenceGraph):
        batch = GraphBatch.from_graphs([batch])
    if batch.x0.shape[-1] != model.dims[0]:
        raise ValueError(f"node feature width {batch.x0.shape[-1]} != model input width {model.dims[0]}")
    trace = ForwardTrace()
    x = batch.x0
    for l in range(model.n_layers):
        trace.inputs.append(x)
        x, pre = lec_layer_forward(x, batch.adj, model.layer(l), model.leaky_slope)
        trace.pre.append(pre)
    trace.inputs.append(x)
    trace.head_z = x @ model.head_w + model.head_b
    trace.psi = _sigmoid(trace.head_z)
    return x, trace.psi, trace


def gnn_backward(
    trace: ForwardTrace,
    batch: GraphBatch | InterferenceGraph,
    model: GnnModel,
    d_psi: np.ndarray | None = None,
    d_emb: np.ndarray | None = None,
    return_input_grad: bool = False,
):
    """Reverse pass for a scalar loss given its gradient w.r.t. ``psi`` and/or
    the embeddings.  Returns a dict shaped like ``model.params``.

    At a pre-activation of exactly zero the leaky slope is used as the
    derivative.
    """
    if isinstance(batch, InterferenceGraph):
        batch = GraphBatch.from_graphs([batch])
    if len(trace.pre) != model.n_layers or trace.inputs[0].shape != batch.x0.shape:
        raise RuntimeError("trace does not come from this model and batch")
    emb = trace.inputs[-1]
    grads = {k: np.zeros_like(v) for k, v in model.params.items()}
    d_x = np.zeros_like(emb) if d_emb is None else np.array(d_emb, dtype=float)
    if d_psi is not None:
        psi = trace.psi
        d_z = np.asarray(d_psi) * psi * (1.0 - psi)
        grads["head.w"] = np.einsum("bk,bkf->f", d_z, emb)
        grads["head.b"] = np.array([d_z.sum()])
        d_x = d_x + d_z[..., None] * model.head_w
    for l in reversed(range(model.n_layers)):
        d_x, layer_grads = lec_layer_backward(
            d_x, trace.inputs[l], batch.adj, trace.pre[l], model.layer(l), model.leaky_slope
        )
        for name, g in zip(LAYER_PARTS, layer_grads):
            grads[f"layer{l}.{name}"] = g
    if return_input_grad:
        return grads, d_x
    return grads


def threshold_schedule(psi, threshold: float = 0.5) -> np.ndarray:
    """On/off decisions, inclusive at the threshold."""
    return (np.asarray(psi) >= threshold).astype(np.int8)


class Adam:
    """Bias-corrected adaptive moment estimation over a parameter dict."""

    def __init__(self, lr=1e-2, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict, grads: dict, keys=None):
        """Update ``params`` in place.  ``keys`` restricts the update to a subset."""
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for k in params if keys is None else keys:
            g = grads[k]
            if g.shape != params[k].shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {params[k].shape} for {k}")
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[k] / bc1
            v_hat = self.v[k] / bc2
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def state_dict(self):
        return {
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "t": self.t,
            "m": {k: v.tolist() for k, v in self.m.items()},
            "v": {k: v.tolist() for k, v in self.v.items()},
        }

    @classmethod
    def from_state_dict(cls, d):
        opt = cls(d["lr"], d["beta1"], d["beta2"], d["eps"])
        opt.t = d["t"]
        opt.m = {k: np.array(v, dtype=float) for k, v in d["m"].items()}
        opt.v = {k: np.array(v, dtype=float) for k, v in d["v"].items()}
        return opt


def checkpoint_dict(model: GnnModel, optimizer: Adam | None = None, extra: dict | None = None) -> dict:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "dims": model.dims,
        "leaky_slope": model.leaky_slope,
        "params": {k: v.tolist() for k, v in model.params.items()},
    }
    if optimizer is not None:
        doc["optimizer"] = optimizer.state_dict()
    if extra:
        doc["meta"] = extra
    return doc


def save_checkpoint(path, model: GnnModel, optimizer: Adam | None = None, extra: dict | None = None):
    # json writes the shortest repr that round-trips each double exactly
    with open(path, "w") as fh:
        json.dump(checkpoint_dict(model, optimizer, extra), fh)
        fh.write("\n")


def model_from_dict(doc: dict) -> GnnModel:
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unknown checkpoint format {doc.get('format')!r}")
    params = {k: np.array(v, dtype=float) for k, v in doc["params"].items()}
    model = GnnModel([int(d) for d in doc["dims"]], params, float(doc["leaky_slope"]))
    model.check()
    return model


def load_checkpoint(path):
    """Returns ``(model, optimizer or None, meta dict)``."""
    with open(path) as fh:
        doc = json.load(fh)
    opt = Adam.from_state_dict(doc["optimizer"]) if "optimizer" in doc else None
    return model_from_dict(doc), opt, doc.get("meta", {})
