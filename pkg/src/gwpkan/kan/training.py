"""Deterministic training and activation-based pruning for spline-edge nets.

The optimizer is plain Adam with decoupled weight decay; shuffling, the
train/validation split, and initialization all derive from the config seed,
so a (seed, data, config) triple pins the final parameters exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .network import KanError, KanNetwork, loss_and_grad

__all__ = ["TrainConfig", "TrainReport", "train", "prune", "PruneError", "AdamState"]


class PruneError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 500
    batch_size: int = 128
    learning_rate: float = 1e-2
    weight_decay: float = 0.0
    l1_weight: float = 1e-3
    entropy_weight: float = 1e-3
    validation_fraction: float = 0.2
    patience: int = 50

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("epochs >= 0, batch_size >= 1, learning_rate > 0 required")
        if not 0.0 <= self.validation_fraction <= 0.5:
            raise ValueError(
                f"validation_fraction must be in [0, 0.5], got {self.validation_fraction}")


@dataclass
class TrainReport:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    final_snapshot_id: str = ""
    wall_seconds: float = 0.0
    stopped_early: bool = False
    val_indices: list[int] = field(default_factory=list)


class AdamState:
    def __init__(self, params: list[np.ndarray], lr: float, weight_decay: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            if self.weight_decay:
                p -= self.lr * self.weight_decay * p
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def train(net: KanNetwork, x: np.ndarray, y: np.ndarray,
          config: TrainConfig) -> tuple[KanNetwork, TrainReport]:
    """Fit the network in place on (x, y); returns (net, report).

    Input normalization is frozen from the training split before the first
    update. Early stopping watches plain validation MSE and restores the
    best snapshot when patience runs out.
    """
    t0 = time.monotonic()
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

    net.set_input_normalization(x_train)
    report = TrainReport(val_indices=val_idx.tolist())
    params = net.param_arrays()
    adam = AdamState(params, config.learning_rate, config.weight_decay)
    best_val = np.inf
    best_snapshot = None
    stale = 0
    for _ in range(config.epochs):
        perm = rng.permutation(train_idx.size)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, perm.size, config.batch_size):
            batch = perm[start:start + config.batch_size]
            loss, grads = loss_and_grad(net, x_train[batch], y_train[batch],
                                        config.l1_weight, config.entropy_weight)
            adam.step(params, net.grad_arrays(grads))
            epoch_loss += loss
            n_batches += 1
        report.train_losses.append(epoch_loss / max(n_batches, 1))
        if n_val:
            val_mse = float(np.mean((net.predict(x_val) - y_val) ** 2))
            report.val_losses.append(val_mse)
            if val_mse < best_val - 1e-12:
                best_val = val_mse
                best_snapshot = [p.copy() for p in params]
                stale = 0
            else:
                stale += 1
                if stale > config.patience:
                    report.stopped_early = True
                    break
    if best_snapshot is not None and report.stopped_early:
        for p, snap in zip(params, best_snapshot):
            p[:] = snap
    report.final_snapshot_id = net.params_digest()
    report.wall_seconds = time.monotonic() - t0
    return net, report


def _node_scores(net: KanNetwork, x: np.ndarray) -> list[np.ndarray]:
    """Mean |incoming| + summed mean |outgoing| activation per hidden node."""
    values = net.node_values(x)
    acts = net.edge_activations(x)
    scores = []
    for l in range(1, len(net.layer_widths) - 1):
        incoming = np.mean(np.abs(values[l]), axis=0)
        outgoing = np.mean(np.abs(acts[l]), axis=0).sum(axis=0)
        scores.append(incoming + outgoing)
    return scores


def prune(net: KanNetwork, threshold: float, x: np.ndarray) -> tuple[KanNetwork, dict]:
    """Drop hidden nodes whose activation score falls below threshold.

    Candidates are removed weakest-first while the mean absolute output
    deviation on x stays within 10x threshold; the report itemizes removed
    nodes and the final deviation.
    """
    if threshold < 0:
        raise PruneError(f"threshold must be >= 0, got {threshold}")
    x = np.asarray(x, dtype=np.float64)
    baseline = net.forward_batch(x)
    scores = _node_scores(net, x)
    candidates = []  # (score, hidden_layer_index, node_index)
    for li, layer_scores in enumerate(scores, start=1):
        for j, s in enumerate(layer_scores):
            if s < threshold:
                candidates.append((float(s), li, j))
    candidates.sort()

    per_layer: dict[int, int] = {}
    for _, li, _ in candidates:
        per_layer[li] = per_layer.get(li, 0) + 1
    for li, count in per_layer.items():
        if count >= net.layer_widths[li]:
            raise PruneError(
                f"pruning at threshold {threshold} would empty hidden layer {li}; "
                "use a lower threshold")

    doomed: dict[int, set[int]] = {}
    removed: list[dict] = []
    deviation = 0.0
    for score, li, j in candidates:
        trial = dict(doomed)
        trial[li] = set(trial.get(li, set())) | {j}
        candidate_net = _drop_nodes(net, trial)
        dev = float(np.mean(np.abs(candidate_net.forward_batch(x) - baseline)))
        if dev <= 10.0 * threshold:
            doomed = trial
            deviation = dev
            removed.append({"layer": li, "node": j, "score": score})
        # else: keep the node; removing it would breach the deviation bound
    pruned = _drop_nodes(net, doomed) if doomed else net.copy()
    report = {"removed": removed, "mean_abs_output_deviation": deviation,
              "threshold": threshold,
              "widths_before": list(net.layer_widths),
              "widths_after": list(pruned.layer_widths)}
    return pruned, report


def _drop_nodes(net: KanNetwork, doomed: dict[int, set[int]]) -> KanNetwork:
    """Rebuild the network without the given {hidden layer: node set}."""
    from .network import _Layer

    keep = []
    for li, width in enumerate(net.layer_widths):
        dead = doomed.get(li, set())
        keep.append([j for j in range(width) if j not in dead])
    widths = [len(kp) for kp in keep]
    layers = []
    for l, layer in enumerate(net.layers):
        out_keep = keep[l + 1]
        in_keep = keep[l]
        coeffs = layer.coeffs[np.ix_(out_keep, in_keep)].copy()
        base_weight = layer.base_weight[np.ix_(out_keep, in_keep)].copy()
        scale = layer.scale[np.ix_(out_keep, in_keep)].copy()
        layers.append(_Layer(len(in_keep), len(out_keep), layer.grid,
                             coeffs, base_weight, scale))
    return KanNetwork(widths, list(net.grids), layers,
                      net.norm_slope.copy(), net.norm_offset.copy(),
                      net.seed, net.config_digest)
