"""Adam training loop with early stopping, bit-reproducible under a fixed seed."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError, InvariantError
from .net import MLPSpec, forward, init_params, loss_and_grad


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 3e-3
    batch_size: int = 64
    epochs: int = 400
    patience: int = 40
    weight_decay: float = 0.0  # decoupled (AdamW-style), applied to W only

    def __post_init__(self):
        if not (self.learning_rate > 0 and self.batch_size >= 1
                and self.epochs >= 1 and self.patience >= 1 and self.weight_decay >= 0):
            raise InvariantError("hyperparameters out of range", path="hyperparams")


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0


def _val_loss(spec, params, X, y, loss, weights=None) -> float:
    value, _ = loss_and_grad(spec, params, X, y, loss, weights=weights)
    return value


def train_network(spec: MLPSpec, X_train: np.ndarray, y_train: np.ndarray,
                  X_val: np.ndarray, y_val: np.ndarray, loss: str,
                  hp: Hyperparams, seed: int,
                  w_train: np.ndarray | None = None,
                  w_val: np.ndarray | None = None) -> tuple[list[np.ndarray], TrainingHistory]:
    """Minimise ``loss`` with Adam; returns the best-validation parameters.

    The initial parameters count as an early-stopping candidate, so the
    returned validation loss never exceeds the initial one.  Optional
    per-sample weights apply to both the updates and the early-stopping
    criterion.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    params = init_params(spec, rng)
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps_adam = 0.9, 0.999, 1e-8
    t = 0

    history = TrainingHistory()
    best_val = _val_loss(spec, params, X_val, y_val, loss, w_val)
    best_params = [p.copy() for p in params]
    history.val_loss.append(best_val)
    since_best = 0
    n = X_train.shape[0]
    batch = min(hp.batch_size, n)

    for epoch in range(1, hp.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            value, grads = loss_and_grad(spec, params, X_train[idx], y_train[idx], loss,
                                         weights=None if w_train is None else w_train[idx])
            if not np.isfinite(value):
                raise ConvergenceError(
                    f"training diverged at epoch {epoch} (loss={value})", residual=value)
            epoch_loss += value * idx.size
            t += 1
            lr_t = hp.learning_rate * np.sqrt(1.0 - beta2**t) / (1.0 - beta1**t)
            for i, g in enumerate(grads):
                m[i] = beta1 * m[i] + (1.0 - beta1) * g
                v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
                params[i] = params[i] - lr_t * m[i] / (np.sqrt(v[i]) + eps_adam)
                if hp.weight_decay and params[i].ndim == 2:
                    params[i] = params[i] * (1.0 - hp.learning_rate * hp.weight_decay)
        history.train_loss.append(epoch_loss / n)
        val = _val_loss(spec, params, X_val, y_val, loss, w_val)
        history.val_loss.append(val)
        if val < best_val:
            best_val = val
            best_params = [p.copy() for p in params]
            history.best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= hp.patience:
                break
        history.stopped_epoch = epoch
    return best_params, history


__all__ = ["Hyperparams", "TrainingHistory", "train_network", "forward"]
