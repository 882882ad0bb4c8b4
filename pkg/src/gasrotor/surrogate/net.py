"""Minimal dense feed-forward networks on numpy with analytic gradients.

Parameters live as a flat list ``[W1, b1, W2, b2, ...]``.  Classifier
networks use a logistic output head; the cross-entropy gradient is taken
through the logits for numerical stability.  Everything is float64 and
single-threaded deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvariantError

ACTIVATIONS = ("tanh", "relu")
HEADS = ("identity", "logistic")
LOSSES = ("mse", "bce")


@dataclass(frozen=True)
class MLPSpec:
    """Layer widths (input, hidden..., 1) plus activation and output head."""

    widths: tuple[int, ...]
    activation: str = "tanh"
    head: str = "identity"

    def __post_init__(self):
        if len(self.widths) < 3:
            raise InvariantError("network needs at least one hidden layer", path="spec.widths")
        if any(w < 1 for w in self.widths):
            raise InvariantError("layer widths must be >= 1", path="spec.widths")
        if self.widths[-1] != 1:
            raise InvariantError("output width must be 1", path="spec.widths")
        if self.activation not in ACTIVATIONS:
            raise InvariantError(f"unknown activation {self.activation!r}", path="spec.activation")
        if self.head not in HEADS:
            raise InvariantError(f"unknown head {self.head!r}", path="spec.head")

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    @property
    def n_parameters(self) -> int:
        return sum((a + 1) * b for a, b in zip(self.widths[:-1], self.widths[1:]))


def init_params(spec: MLPSpec, rng: np.random.Generator) -> list[np.ndarray]:
    """Glorot-uniform (tanh) or He-normal (relu) initialisation."""
    params: list[np.ndarray] = []
    for fan_in, fan_out in zip(spec.widths[:-1], spec.widths[1:]):
        if spec.activation == "tanh":
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        else:
            W = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        params.append(W)
        params.append(np.zeros(fan_out))
    return params


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _hidden_pass(spec: MLPSpec, params: list[np.ndarray], X: np.ndarray) -> list[np.ndarray]:
    """Activations of every layer; the last entry is the raw output (logit)."""
    acts = [X]
    h = X
    n = spec.n_layers
    for layer in range(n):
        W, b = params[2 * layer], params[2 * layer + 1]
        z = h @ W + b
        if layer < n - 1:
            h = np.tanh(z) if spec.activation == "tanh" else np.maximum(z, 0.0)
        else:
            h = z
        acts.append(h)
    return acts


def forward(spec: MLPSpec, params: list[np.ndarray], X: np.ndarray) -> np.ndarray:
    """Network output for normalised inputs ``X`` of shape (N, n_in).

    Logistic heads return probabilities in [0, 1].
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != spec.widths[0]:
        raise InvariantError(
            f"input has {X.shape[1]} features, spec expects {spec.widths[0]}", path="x")
    z = _hidden_pass(spec, params, X)[-1][:, 0]
    return _sigmoid(z) if spec.head == "logistic" else z


def loss_and_grad(spec: MLPSpec, params: list[np.ndarray], X: np.ndarray,
                  y: np.ndarray, loss: str,
                  weights: np.ndarray | None = None) -> tuple[float, list[np.ndarray]]:
    """Mean loss over the batch and its gradients w.r.t. every parameter.

    ``bce`` expects a logistic head (gradient through the logits);
    ``mse`` an identity head.  Optional per-sample ``weights`` rescale the
    mean (pass weights of mean 1 to keep loss magnitudes comparable).
    """
    if loss not in LOSSES:
        raise InvariantError(f"unknown loss {loss!r}", path="loss")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).ravel()
    acts = _hidden_pass(spec, params, X)
    z = acts[-1][:, 0]
    if loss == "bce":
        # softplus(z) - y z, elementwise stable
        value = float(np.mean(w * (np.logaddexp(0.0, z) - y * z)))
        dz = w * (_sigmoid(z) - y) / n
    else:
        pred = z
        resid = pred - y
        value = float(np.mean(w * resid**2))
        dz = 2.0 * w * resid / n
    grads: list[np.ndarray] = [np.empty(0)] * len(params)
    delta = dz[:, None]
    for layer in range(spec.n_layers - 1, -1, -1):
        W = params[2 * layer]
        h_in = acts[layer]
        grads[2 * layer] = h_in.T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ W.T
            h_prev = acts[layer]
            if spec.activation == "tanh":
                delta = delta * (1.0 - h_prev**2)
            else:
                delta = delta * (h_prev > 0)
    return value, grads
