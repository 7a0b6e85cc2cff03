"""Spline-edge networks: grids, kernels, the network, training, pruning,
and the dense baseline."""

from .grid import SplineGrid
from .kernels import HAS_NUMBA, USING_NUMBA, basis_and_deriv, basis_only, bspline_basis
from .network import KanEdge, KanError, KanNetwork, forward, loss_and_grad, silu
from .training import AdamState, PruneError, TrainConfig, TrainReport, prune, train
from .baseline import BaselineConfig, BaselineNet, baseline_net_train

__all__ = [
    "SplineGrid", "HAS_NUMBA", "USING_NUMBA", "basis_and_deriv", "basis_only",
    "bspline_basis", "KanEdge", "KanError", "KanNetwork", "forward",
    "loss_and_grad", "silu", "AdamState", "PruneError", "TrainConfig",
    "TrainReport", "prune", "train", "BaselineConfig", "BaselineNet",
    "baseline_net_train",
]
