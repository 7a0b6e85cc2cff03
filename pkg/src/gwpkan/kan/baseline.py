"""Small dense reference network: two tanh hidden layers trained with Adam.

Serves as the black-box comparison model and as an optional estimator for
feature selection and the dimension sweep. Shares the determinism contract
of the spline network: everything derives from the config seed.
"""

from __future__ import annotations

import numpy as np

from .network import KanError
from .training import AdamState

__all__ = ["BaselineConfig", "BaselineNet", "baseline_net_train"]


class BaselineConfig:
    def __init__(self, seed: int = 0, hidden: int = 32, epochs: int = 400,
                 batch_size: int = 128, learning_rate: float = 1e-2,
                 weight_decay: float = 0.0, validation_fraction: float = 0.2,
                 patience: int = 50):
        if epochs < 0 or batch_size < 1 or learning_rate <= 0 or hidden < 1:
            raise ValueError("invalid baseline training configuration")
        if not 0.0 <= validation_fraction <= 0.5:
            raise ValueError(
                f"validation_fraction must be in [0, 0.5], got {validation_fraction}")
        self.seed = seed
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.validation_fraction = validation_fraction
        self.patience = patience


class BaselineNet:
    """[n_in -> hidden -> hidden -> 1] tanh network with z-scored inputs."""

    def __init__(self, n_in: int, hidden: int, seed: int):
        rng = np.random.Generator(np.random.PCG64(seed))
        def init(n_out, n_inp):
            return rng.normal(0.0, np.sqrt(1.0 / n_inp), size=(n_out, n_inp))
        self.w1 = init(hidden, n_in)
        self.b1 = np.zeros(hidden)
        self.w2 = init(hidden, hidden)
        self.b2 = np.zeros(hidden)
        self.w3 = init(1, hidden)
        self.b3 = np.zeros(1)
        self.x_mean = np.zeros(n_in)
        self.x_scale = np.ones(n_in)

    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w3, self.b3]

    def _forward(self, x: np.ndarray):
        z = (x - self.x_mean) / self.x_scale
        a1 = np.tanh(z @ self.w1.T + self.b1)
        a2 = np.tanh(a1 @ self.w2.T + self.b2)
        out = a2 @ self.w3.T + self.b3
        return z, a1, a2, out[:, 0]

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.w1.shape[1]:
            raise KanError(f"expected input width {self.w1.shape[1]}, got {x.shape}")
        return self._forward(x)[3]

    def loss_and_grad(self, x: np.ndarray, y: np.ndarray):
        b = x.shape[0]
        z, a1, a2, pred = self._forward(x)
        resid = pred - y
        loss = float(np.mean(resid ** 2))
        d_out = (2.0 * resid / b)[:, None]
        g_w3 = d_out.T @ a2
        g_b3 = d_out.sum(axis=0)
        d_a2 = (d_out @ self.w3) * (1.0 - a2 ** 2)
        g_w2 = d_a2.T @ a1
        g_b2 = d_a2.sum(axis=0)
        d_a1 = (d_a2 @ self.w2) * (1.0 - a1 ** 2)
        g_w1 = d_a1.T @ z
        g_b1 = d_a1.sum(axis=0)
        return loss, [g_w1, g_b1, g_w2, g_b2, g_w3, g_b3]


def baseline_net_train(x: np.ndarray, y: np.ndarray,
                       config: BaselineConfig) -> BaselineNet:
    """Deterministic Adam training of the dense baseline; returns the model."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape[0] != y.shape[0]:
        raise KanError(f"{x.shape[0]} inputs vs {y.shape[0]} targets")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = x.shape[0]
    order = rng.permutation(n)
    n_val = int(round(config.validation_fraction * n))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if train_idx.size == 0:
        raise KanError("empty training split")
    x_train, y_train = x[train_idx], y[train_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    net = BaselineNet(x.shape[1], config.hidden, config.seed)
    net.x_mean = x_train.mean(axis=0)
    scale = x_train.std(axis=0)
    scale[scale == 0.0] = 1.0
    net.x_scale = scale

    params = net.params()
    adam = AdamState(params, config.learning_rate, config.weight_decay)
    best_val = np.inf
    best_snapshot = None
    stale = 0
    for _ in range(config.epochs):
        perm = rng.permutation(train_idx.size)
        for start in range(0, perm.size, config.batch_size):
            batch = perm[start:start + config.batch_size]
            _, grads = net.loss_and_grad(x_train[batch], y_train[batch])
            adam.step(params, grads)
        if n_val:
            val_mse = float(np.mean((net.predict(x_val) - y_val) ** 2))
            if val_mse < best_val - 1e-12:
                best_val = val_mse
                best_snapshot = [p.copy() for p in params]
                stale = 0
            else:
                stale += 1
                if stale > config.patience:
                    if best_snapshot is not None:
                        for p, snap in zip(params, best_snapshot):
                            p[:] = snap
                    break
    return net
