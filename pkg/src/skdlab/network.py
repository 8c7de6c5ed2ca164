"""Minimal dense network with hand-derived gradients.

Fully-connected layers, ReLU hidden activations, linear output layer.
Everything is 64-bit: the finite-difference gradient checks this package
leans on are unreliable in 32-bit.  No framework autodiff anywhere; the
backward pass is the chain rule written out.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CHECKPOINT_FORMAT = "skdlab-net-v1"


@dataclass
class DenseNetwork:
    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def num_outputs(self) -> int:
        return self.layer_dims[-1]

    @property
    def num_inputs(self) -> int:
        return self.layer_dims[0]

    def parameter_count(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def copy(self) -> "DenseNetwork":
        return DenseNetwork(
            self.layer_dims,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )


@dataclass
class GradientSet:
    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]

    def max_abs(self) -> float:
        parts = [np.max(np.abs(g)) if g.size else 0.0 for g in self.d_weights + self.d_biases]
        return float(max(parts))


def init_network(layer_dims, seed) -> DenseNetwork:
    """Fan-in-scaled uniform init: W ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero.

    seed may be an int or a sequence of ints (a stream key).
    """
    dims = tuple(int(d) for d in layer_dims)
    if len(dims) < 2:
        raise ValueError("need at least input and output dimensions")
    if any(d < 1 for d in dims):
        raise ValueError("layer dimensions must be positive")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return DenseNetwork(dims, weights, biases)


def forward(net: DenseNetwork, features) -> np.ndarray:
    """Logits for a batch (n, d) or a single vector (d,)."""
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != net.num_inputs:
        raise ValueError(f"feature dim {x.shape[1]} does not match network input {net.num_inputs}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite features")
    a = x
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        a = np.maximum(a @ w + b, 0.0)
    logits = a @ net.weights[-1] + net.biases[-1]
    return logits[0] if single else logits


def softmax_temperature(logits, tau: float = 1.0) -> np.ndarray:
    """Temperature softmax with max-subtraction; tau=1 is the plain softmax."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    z = np.asarray(logits, dtype=float) / tau
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax_temperature(logits, tau: float = 1.0) -> np.ndarray:
    if tau <= 0:
        raise ValueError("tau must be positive")
    z = np.asarray(logits, dtype=float) / tau
    z = z - np.max(z, axis=-1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=-1, keepdims=True))


def argmax_lowest_tie(values) -> np.ndarray:
    """Row argmax, ties broken toward the lowest index (np.argmax already does)."""
    return np.argmax(np.asarray(values), axis=-1)


def backward(net: DenseNetwork, features, loss_spec) -> tuple[float, GradientSet]:
    """Batch-mean loss and its exact analytic gradients.

    loss_spec supplies the output-layer story: it must expose
    loss_and_logit_grad(logits) -> (scalar loss, dL/dlogits).  The chain
    rule back through the ReLU stack is handled here.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    activations = [x]
    pre_acts = []
    a = x
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = a @ w + b
        pre_acts.append(z)
        a = np.maximum(z, 0.0)
        activations.append(a)
    logits = a @ net.weights[-1] + net.biases[-1]
    loss, d_logits = loss_spec.loss_and_logit_grad(logits)
    if not np.isfinite(loss):
        raise FloatingPointError("non-finite loss")

    d_weights = [np.empty(0)] * len(net.weights)
    d_biases = [np.empty(0)] * len(net.biases)
    delta = d_logits
    for li in range(len(net.weights) - 1, -1, -1):
        d_weights[li] = activations[li].T @ delta
        d_biases[li] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ net.weights[li].T) * (pre_acts[li - 1] > 0)
    return float(loss), GradientSet(d_weights, d_biases)


@dataclass
class OptimizerState:
    """Adaptive-moment optimizer with bias correction and decoupled weight decay.

    The learning rate is multiplied by lr_decay at each epoch boundary
    (call end_epoch once per epoch).
    """

    learning_rate: float = 1e-3
    lr_decay: float = 0.91
    weight_decay: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m_w: list = field(default_factory=list)
    v_w: list = field(default_factory=list)
    m_b: list = field(default_factory=list)
    v_b: list = field(default_factory=list)

    def ensure_shapes(self, net: DenseNetwork) -> None:
        if not self.m_w:
            self.m_w = [np.zeros_like(w) for w in net.weights]
            self.v_w = [np.zeros_like(w) for w in net.weights]
            self.m_b = [np.zeros_like(b) for b in net.biases]
            self.v_b = [np.zeros_like(b) for b in net.biases]

    def end_epoch(self) -> None:
        self.learning_rate *= self.lr_decay


def optimizer_step(net: DenseNetwork, grads: GradientSet, state: OptimizerState) -> None:
    """One in-place parameter update."""
    state.ensure_shapes(net)
    for g in grads.d_weights + grads.d_biases:
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    lr, wd, eps = state.learning_rate, state.weight_decay, state.eps
    for i in range(len(net.weights)):
        state.m_w[i] = b1 * state.m_w[i] + (1 - b1) * grads.d_weights[i]
        state.v_w[i] = b2 * state.v_w[i] + (1 - b2) * grads.d_weights[i] ** 2
        m_hat = state.m_w[i] / (1 - b1 ** t)
        v_hat = state.v_w[i] / (1 - b2 ** t)
        net.weights[i] -= lr * m_hat / (np.sqrt(v_hat) + eps) + lr * wd * net.weights[i]

        state.m_b[i] = b1 * state.m_b[i] + (1 - b1) * grads.d_biases[i]
        state.v_b[i] = b2 * state.v_b[i] + (1 - b2) * grads.d_biases[i] ** 2
        m_hat = state.m_b[i] / (1 - b1 ** t)
        v_hat = state.v_b[i] / (1 - b2 ** t)
        net.biases[i] -= lr * m_hat / (np.sqrt(v_hat) + eps) + lr * wd * net.biases[i]


# ---------------------------------------------------------------------------
# Checkpoints: JSON with a format tag.  Floats go through repr (shortest
# round-trip decimal), so 64-bit values survive save/load exactly.

def save_checkpoint(net: DenseNetwork, path, extra: dict | None = None) -> None:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "layer_dims": list(net.layer_dims),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }
    if extra:
        overlap = set(extra) & set(payload)
        if overlap:
            raise ValueError(f"extra keys collide with checkpoint fields: {sorted(overlap)}")
        payload.update(extra)
    Path(path).write_text(json.dumps(payload) + "\n")


def load_checkpoint(path) -> tuple[DenseNetwork, dict]:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
    dims = tuple(payload["layer_dims"])
    weights = [np.array(w, dtype=float) for w in payload["weights"]]
    biases = [np.array(b, dtype=float) for b in payload["biases"]]
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        if weights[i].shape != (fan_in, fan_out) or biases[i].shape != (fan_out,):
            raise ValueError(f"{path}: parameter shapes do not match layer_dims")
    meta = {k: v for k, v in payload.items()
            if k not in {"format", "layer_dims", "weights", "biases"}}
    return DenseNetwork(dims, weights, biases), meta
