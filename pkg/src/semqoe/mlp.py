"""Minimal dense MLP with backprop and Adam, numpy only.

Used both for fidelity surrogate fitting and as the Q-network of the
compression policy learner.  Everything is double precision; forward accepts a
single sample (1-D) or a batch (2-D, samples in rows).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

_ACTIVATIONS = ("relu", "sigmoid", "identity")


class TrainingDivergedError(RuntimeError):
    """Raised when a training loss becomes non-finite."""


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple[int, ...]
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"
    learning_rate: float = 1e-3

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output layer sizes")
        if any(int(n) < 1 for n in self.layer_sizes):
            raise ValueError("layer sizes must be positive")
        if self.hidden_activation not in _ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in _ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        if not (self.learning_rate > 0):
            raise ValueError("learning rate must be positive")
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))


@dataclass
class MlpParams:
    spec: MlpSpec
    weights: list = field(default_factory=list)   # (n_in, n_out) per layer
    biases: list = field(default_factory=list)    # (n_out,) per layer
    m_w: list = field(default_factory=list)
    v_w: list = field(default_factory=list)
    m_b: list = field(default_factory=list)
    v_b: list = field(default_factory=list)
    step: int = 0

    def copy(self) -> "MlpParams":
        return MlpParams(
            spec=self.spec,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            m_w=[m.copy() for m in self.m_w],
            v_w=[v.copy() for v in self.v_w],
            m_b=[m.copy() for m in self.m_b],
            v_b=[v.copy() for v in self.v_b],
            step=self.step,
        )


def init_params(spec: MlpSpec, rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights, zero biases, zeroed Adam moments."""
    params = MlpParams(spec=spec)
    sizes = spec.layer_sizes
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (n_in + n_out))
        params.weights.append(rng.uniform(-limit, limit, size=(n_in, n_out)))
        params.biases.append(np.zeros(n_out))
        params.m_w.append(np.zeros((n_in, n_out)))
        params.v_w.append(np.zeros((n_in, n_out)))
        params.m_b.append(np.zeros(n_out))
        params.v_b.append(np.zeros(n_out))
    return params


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def _activation_grad(a: np.ndarray, kind: str) -> np.ndarray:
    # derivative expressed through the activation output a
    if kind == "relu":
        return (a > 0).astype(float)
    if kind == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(a)


def forward_cached(params: MlpParams, inputs: np.ndarray) -> list:
    """All layer activations, inputs first; `inputs` must be 2-D (batch, n_in)."""
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.spec.layer_sizes[0]:
        raise ValueError("inputs must be (batch, n_in)")
    acts = [x]
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        kind = params.spec.output_activation if i == last else params.spec.hidden_activation
        acts.append(_activate(acts[-1] @ w + b, kind))
    return acts


def forward(params: MlpParams, inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    y = forward_cached(params, x)[-1]
    return y[0] if single else y


def backprop(params: MlpParams, acts: Sequence[np.ndarray], d_out: np.ndarray):
    """Gradients of a scalar loss given dLoss/dOutput; returns (grads_w, grads_b)."""
    spec = params.spec
    last = len(params.weights) - 1
    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    delta = d_out * _activation_grad(acts[-1], spec.output_activation)
    for i in range(last, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * _activation_grad(acts[i], spec.hidden_activation)
    return grads_w, grads_b


def adam_update(params: MlpParams, grads_w, grads_b) -> None:
    params.step += 1
    t = params.step
    lr = params.spec.learning_rate
    c1 = 1.0 - ADAM_BETA1 ** t
    c2 = 1.0 - ADAM_BETA2 ** t
    for i in range(len(params.weights)):
        for g, x, m, v in (
            (grads_w[i], params.weights[i], params.m_w[i], params.v_w[i]),
            (grads_b[i], params.biases[i], params.m_b[i], params.v_b[i]),
        ):
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * g * g
            x -= lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)


def mse_output_grad(outputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    return 2.0 * (outputs - targets) / outputs.size


def train_step(params: MlpParams, inputs, targets) -> float:
    """One Adam step on batch MSE; returns the pre-update loss."""
    x = np.asarray(inputs, dtype=float)
    t = np.asarray(targets, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if t.ndim == 1:
        t = t[None, :] if single else t[:, None]
    acts = forward_cached(params, x)
    y = acts[-1]
    if t.shape != y.shape:
        raise ValueError(f"targets shape {t.shape} does not match outputs {y.shape}")
    loss = float(np.mean((y - t) ** 2))
    if not np.isfinite(loss):
        raise TrainingDivergedError(f"non-finite loss {loss}")
    grads_w, grads_b = backprop(params, acts, mse_output_grad(y, t))
    adam_update(params, grads_w, grads_b)
    return loss


def loss_and_grads(params: MlpParams, inputs, targets):
    """MSE loss and gradients without applying an update (used by gradient checks)."""
    x = np.asarray(inputs, dtype=float)
    t = np.asarray(targets, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if t.ndim == 1:
        t = t[:, None]
    acts = forward_cached(params, x)
    y = acts[-1]
    loss = float(np.mean((y - t) ** 2))
    grads_w, grads_b = backprop(params, acts, mse_output_grad(y, t))
    return loss, grads_w, grads_b


def to_jsonable(params: MlpParams) -> dict:
    return {
        "schema": "semqoe.mlp.v1",
        "spec": {
            "layer_sizes": list(params.spec.layer_sizes),
            "hidden_activation": params.spec.hidden_activation,
            "output_activation": params.spec.output_activation,
            "learning_rate": params.spec.learning_rate,
        },
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "adam": {
            "m_w": [m.tolist() for m in params.m_w],
            "v_w": [v.tolist() for v in params.v_w],
            "m_b": [m.tolist() for m in params.m_b],
            "v_b": [v.tolist() for v in params.v_b],
            "step": params.step,
        },
    }


def from_jsonable(data: dict) -> MlpParams:
    if data.get("schema") != "semqoe.mlp.v1":
        raise ValueError(f"unknown mlp schema {data.get('schema')!r}")
    spec = MlpSpec(
        layer_sizes=tuple(data["spec"]["layer_sizes"]),
        hidden_activation=data["spec"]["hidden_activation"],
        output_activation=data["spec"]["output_activation"],
        learning_rate=data["spec"]["learning_rate"],
    )
    adam = data["adam"]
    return MlpParams(
        spec=spec,
        weights=[np.asarray(w, dtype=float) for w in data["weights"]],
        biases=[np.asarray(b, dtype=float) for b in data["biases"]],
        m_w=[np.asarray(m, dtype=float) for m in adam["m_w"]],
        v_w=[np.asarray(v, dtype=float) for v in adam["v_w"]],
        m_b=[np.asarray(m, dtype=float) for m in adam["m_b"]],
        v_b=[np.asarray(v, dtype=float) for v in adam["v_b"]],
        step=int(adam["step"]),
    )
