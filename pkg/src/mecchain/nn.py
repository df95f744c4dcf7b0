"""Fully connected ReLU network with hand-written backpropagation.

Inputs are handled as row batches: ``x`` of shape ``(batch, n_in)`` or a
single vector of shape ``(n_in,)``. Weights are stored as ``(n_in, n_out)``
matrices so a layer is ``z = x @ W + b``.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

IDENTITY = "identity"
SIGMOID = "sigmoid"


def relu(z):
    return np.maximum(z, 0.0)


def sigmoid(z):
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Mlp:
    def __init__(self, layer_sizes: Sequence[int], output_activation: str = IDENTITY,
                 rng: np.random.Generator | None = None, dtype=np.float64):
        sizes = [int(s) for s in layer_sizes]
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError(f"need positive layer sizes, got {layer_sizes!r}")
        if output_activation not in (IDENTITY, SIGMOID):
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.layer_sizes = sizes
        self.output_activation = output_activation
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(0) if rng is None else rng
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(self.dtype))
            self.biases.append(np.zeros(fan_out, dtype=self.dtype))
        self._version = 0

    @property
    def params(self) -> list[np.ndarray]:
        """Parameters in layer order: ``[W0, b0, W1, b1, ...]`` (views, not copies)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @property
    def num_params(self) -> int:
        return sum(p.size for p in self.params)

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.layer_sizes = list(self.layer_sizes)
        clone.output_activation = self.output_activation
        clone.dtype = self.dtype
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        clone._version = 0
        return clone

    def load_params_from(self, other: "Mlp") -> None:
        if other.layer_sizes != self.layer_sizes:
            raise ValueError("topology mismatch")
        for dst, src in zip(self.params, other.params):
            dst[...] = src
        self._version += 1

    def __call__(self, x) -> np.ndarray:
        return forward(self, x)[0]


@dataclass
class GradientTape:
    net_id: int
    version: int
    inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]
    output: np.ndarray
    squeeze: bool
    used: bool = False


def forward(net: Mlp, x) -> tuple[np.ndarray, GradientTape]:
    x = np.asarray(x, dtype=net.dtype)
    squeeze = x.ndim == 1
    a = x[None, :] if squeeze else x
    if a.ndim != 2 or a.shape[1] != net.layer_sizes[0]:
        raise ValueError(f"input width {a.shape[-1]} does not match layer size {net.layer_sizes[0]}")
    inputs, pre = [], []
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(a)
        z = a @ w + b
        pre.append(z)
        if i < last:
            a = relu(z)
        elif net.output_activation == SIGMOID:
            a = sigmoid(z)
        else:
            a = z
    tape = GradientTape(id(net), net._version, inputs, pre, a, squeeze)
    return (a[0] if squeeze else a), tape


def backward(net: Mlp, tape: GradientTape, output_grad) -> list[np.ndarray]:
    """Gradients of a scalar loss w.r.t. ``net.params`` given dLoss/dOutput."""
    if tape.net_id != id(net) or tape.version != net._version:
        raise ValueError("tape was recorded on a different network or before a parameter update")
    if tape.used:
        raise ValueError("tape already consumed by a backward pass")
    g = np.asarray(output_grad, dtype=net.dtype)
    if tape.squeeze:
        g = g[None, :]
    if g.shape != tape.output.shape:
        raise ValueError(f"output_grad shape {g.shape} != output shape {tape.output.shape}")
    tape.used = True
    if net.output_activation == SIGMOID:
        g = g * tape.output * (1.0 - tape.output)
    grads = [None] * (2 * len(net.weights))
    for i in reversed(range(len(net.weights))):
        grads[2 * i] = tape.inputs[i].T @ g
        grads[2 * i + 1] = g.sum(axis=0)
        if i:  # no input gradient is needed below the first layer
            g = (g @ net.weights[i].T) * (tape.pre_activations[i - 1] > 0)
    return grads


def sgd_step(net: Mlp, gradients: Sequence[np.ndarray], learning_rate: float) -> Mlp:
    params = net.params
    if len(gradients) != len(params):
        raise ValueError("gradient list does not match parameter list")
    for p, g in zip(params, gradients):
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient")
    if learning_rate:
        for p, g in zip(params, gradients):
            p -= learning_rate * g
    net._version += 1
    return net


def grad_check(net: Mlp, x, loss: Callable[[np.ndarray], tuple[float, np.ndarray]],
               h: float = 1e-5) -> float:
    """Worst relative error between backprop and central differences.

    ``loss`` maps the network output to ``(value, d value / d output)``.
    """
    out, tape = forward(net, x)
    _, dout = loss(out)
    analytic = backward(net, tape, dout)
    worst = 0.0
    for p, g in zip(net.params, analytic):
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up = loss(forward(net, x)[0])[0]
            flat[k] = orig - h
            down = loss(forward(net, x)[0])[0]
            flat[k] = orig
            numeric = (up - down) / (2 * h)
            denom = max(abs(numeric), abs(gflat[k]), 1e-8)
            worst = max(worst, abs(numeric - gflat[k]) / denom)
    return worst


def squared_loss(target):
    target = np.asarray(target, dtype=float)

    def f(out):
        diff = out - target
        return float(np.sum(diff ** 2)), 2.0 * diff

    return f


# -- checkpoints --------------------------------------------------------------
#
# Binary layout (little endian):
#   magic  b"MLP1"
#   u32    number of layer sizes L
#   u32*L  layer sizes
#   u8     output activation (0 identity, 1 sigmoid)
#   f64*   W0 (row-major, n_in x n_out), b0, W1, b1, ...

_MAGIC = b"MLP1"


def params_to_bytes(net: Mlp) -> bytes:
    """Binary checkpoint of ``net`` in the layout above."""
    parts = [_MAGIC, struct.pack("<I", len(net.layer_sizes)),
             struct.pack(f"<{len(net.layer_sizes)}I", *net.layer_sizes),
             struct.pack("<B", int(net.output_activation == SIGMOID))]
    parts += [np.ascontiguousarray(p, dtype="<f8").tobytes() for p in net.params]
    return b"".join(parts)


def params_from_bytes(raw: bytes, dtype=np.float64, source: str = "checkpoint") -> Mlp:
    if raw[:4] != _MAGIC:
        raise ValueError(f"{source}: not an MLP checkpoint")
    (n,) = struct.unpack_from("<I", raw, 4)
    sizes = struct.unpack_from(f"<{n}I", raw, 8)
    off = 8 + 4 * n
    (act,) = struct.unpack_from("<B", raw, off)
    off += 1
    net = Mlp(sizes, SIGMOID if act else IDENTITY, dtype=dtype)
    for p in net.params:
        count = p.size
        if off + 8 * count > len(raw):
            raise ValueError(f"{source}: truncated checkpoint")
        p[...] = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(p.shape)
        off += 8 * count
    if off != len(raw):
        raise ValueError(f"{source}: trailing bytes in checkpoint")
    return net


def save_params(net: Mlp, path) -> None:
    """Write ``net`` to ``path``: JSON if the suffix is ``.json``, else the binary layout."""
    path = Path(path)
    if path.suffix == ".json":
        payload = {"layer_sizes": net.layer_sizes, "output_activation": net.output_activation,
                   "params": [p.astype(float).ravel().tolist() for p in net.params]}
        path.write_text(json.dumps(payload))
        return
    path.write_bytes(params_to_bytes(net))


def load_params(path, dtype=np.float64) -> Mlp:
    path = Path(path)
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        net = Mlp(payload["layer_sizes"], payload["output_activation"], dtype=dtype)
        for p, flat in zip(net.params, payload["params"]):
            p[...] = np.asarray(flat, dtype=dtype).reshape(p.shape)
        return net
    return params_from_bytes(path.read_bytes(), dtype, str(path))
