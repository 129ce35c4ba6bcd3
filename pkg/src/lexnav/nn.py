"""A small fully connected ReLU network with Adam, written against numpy.

Weights are stored as ``(fan_out, fan_in)`` matrices so a single input ``x``
maps through ``W @ x + b``. Batches are rows: ``X @ W.T + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NET_MAGIC = "lexnav-net"
NET_VERSION = "v1"


class CheckpointError(ValueError):
    pass


@dataclass
class DenseNet:
    weights: list
    biases: list

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def layer_sizes(self) -> list:
        return [self.input_dim] + [w.shape[0] for w in self.weights]

    def params(self) -> list:
        """Parameters in a fixed order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "DenseNet":
        return DenseNet([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_net(layer_sizes, rng: np.random.Generator, zero: bool = False) -> DenseNet:
    """Glorot-uniform weights and zero biases (all zeros when ``zero``)."""
    if len(layer_sizes) < 2:
        raise ValueError("need at least an input and an output size")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        if zero:
            w = np.zeros((fan_out, fan_in))
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return DenseNet(weights, biases)


def forward_trace(net: DenseNet, x):
    """Forward pass that also returns every layer's input (for backward)."""
    h = np.asarray(x, dtype=np.float64)
    if h.shape[-1] != net.input_dim:
        raise ValueError(f"input has {h.shape[-1]} features, net expects {net.input_dim}")
    inputs = []
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(h)
        h = h @ w.T + b
        if i < last:
            h = np.maximum(h, 0.0)
    return h, inputs


def forward(net: DenseNet, x) -> np.ndarray:
    return forward_trace(net, x)[0]


def backward(net: DenseNet, x, output_gradient, trace=None) -> list:
    """Gradients of ``sum(output * output_gradient)`` w.r.t. ``net.params()``."""
    if trace is None:
        _, trace = forward_trace(net, x)
    g = np.asarray(output_gradient, dtype=np.float64)
    expected = trace[-1].shape[:-1] + (net.output_dim,)
    if g.shape != expected:
        raise ValueError(f"output gradient has shape {g.shape}, expected {expected}")
    batched = g.ndim == 2
    grads = [None] * (2 * len(net.weights))
    for i in range(len(net.weights) - 1, -1, -1):
        h = trace[i]
        if batched:
            grads[2 * i] = g.T @ h
            grads[2 * i + 1] = g.sum(axis=0)
        else:
            grads[2 * i] = np.outer(g, h)
            grads[2 * i + 1] = g.copy()
        if i > 0:
            # h is the ReLU output of the previous layer; its mask is h > 0
            g = (g @ net.weights[i]) * (h > 0)
    return grads


def huber(prediction, target, delta: float = 1.0):
    """Elementwise Huber loss and its derivative w.r.t. ``prediction``."""
    err = np.asarray(prediction, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    abs_err = np.abs(err)
    quad = abs_err <= delta
    loss = np.where(quad, 0.5 * err * err, delta * (abs_err - 0.5 * delta))
    grad = np.where(quad, err, delta * np.sign(err))
    return loss, grad


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_net(cls, net: DenseNet, **kw) -> "AdamState":
        params = net.params()
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kw)


def adam_step(net: DenseNet, grads, state: AdamState):
    """In-place Adam update of ``net``; returns ``(net, state)`` for chaining."""
    params = net.params()
    if len(grads) != len(params):
        raise ValueError("gradient list does not match parameters")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    step = state.lr * np.sqrt(1.0 - b2 ** state.t) / (1.0 - b1 ** state.t)
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= step * m / (np.sqrt(v) + state.eps * np.sqrt(1.0 - b2 ** state.t))
    return net, state


def _format_row(row) -> str:
    return " ".join(repr(float(v)) for v in row)


def dump_net(net: DenseNet, comments=()) -> str:
    lines = [" ".join([NET_MAGIC, NET_VERSION] + [str(s) for s in net.layer_sizes])]
    lines += [f"# {c}" for c in comments]
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"# layer {i} weight {w.shape[0]}x{w.shape[1]}")
        lines += [_format_row(r) for r in w]
        lines.append(f"# layer {i} bias {b.shape[0]}")
        lines.append(_format_row(b))
    return "\n".join(lines) + "\n"


def parse_net(text: str):
    """Inverse of :func:`dump_net`; returns ``(net, comments)``."""
    lines = text.splitlines()
    if not lines:
        raise CheckpointError("empty checkpoint")
    head = lines[0].split()
    if len(head) < 2 or head[0] != NET_MAGIC:
        raise CheckpointError(f"not a network checkpoint: {lines[0][:40]!r}")
    if head[1] != NET_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {head[1]!r}")
    sizes = [int(s) for s in head[2:]]
    comments, rows = [], []
    for line in lines[1:]:
        if line.startswith("# layer"):
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif line.strip():
            rows.append([float(v) for v in line.split()])
    weights, biases = [], []
    pos = 0
    try:
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w = np.array(rows[pos:pos + fan_out], dtype=np.float64)
            pos += fan_out
            b = np.array(rows[pos], dtype=np.float64)
            pos += 1
            if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise CheckpointError("parameter block has the wrong shape")
            weights.append(w)
            biases.append(b)
    except IndexError:
        raise CheckpointError("checkpoint truncated") from None
    if pos != len(rows):
        raise CheckpointError("trailing data in checkpoint")
    return DenseNet(weights, biases), comments
