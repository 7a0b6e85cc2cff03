import numpy as np
import pytest

from gwpkan.estimators import r2_score
from gwpkan.kan import KanNetwork, TrainConfig, train
from gwpkan.symbolic import CandidateLibrary, Const, distill, print_expr
from gwpkan.symbolic.distill import _eval_rows
from gwpkan.symbolic.expr import Exp, Log, Mul, Pow


def contains_node(expr, node_type) -> bool:
    if isinstance(expr, node_type):
        return True
    if hasattr(expr, "children"):
        return any(contains_node(c, node_type) for c in expr.children)
    if hasattr(expr, "child"):
        return contains_node(expr.child, node_type)
    if hasattr(expr, "base"):
        return contains_node(expr.base, node_type)
    return False


def train_single_edge(fn, seed=0, grid_intervals=8, epochs=1500):
    rng = np.random.default_rng(seed + 50)
    x = rng.uniform(-1, 1, (512, 1))
    y = fn(x[:, 0])
    net = KanNetwork.create([1, 1], grid_intervals=grid_intervals, seed=seed)
    cfg = TrainConfig(seed=seed, epochs=epochs, batch_size=128,
                      learning_rate=0.01, l1_weight=0.0, entropy_weight=0.0,
                      validation_fraction=0.15, patience=300)
    net, _ = train(net, x, y, cfg)
    return net, x


class TestDistill:
    def test_exponential_recovered(self):
        net, x = train_single_edge(np.exp, seed=0)
        result = distill(net, CandidateLibrary(), x)
        assert result.edge_fits[0].shape == "exp"
        assert result.edge_fits[0].r2 >= 0.99
        assert contains_node(result.expr, Exp)
        rms = float(np.sqrt(np.mean(
            (_eval_rows(result.expr, x, ["x0"]) - net.predict(x)) ** 2)))
        assert rms <= 1e-3

    def test_affine_target_yields_affine_expression(self):
        rng = np.random.default_rng(60)
        x = rng.uniform(-1, 1, (512, 2))
        y = 2.0 * x[:, 0] + 3.0 * x[:, 1]
        net = KanNetwork.create([2, 1], seed=1)
        cfg = TrainConfig(seed=1, epochs=1200, batch_size=128,
                          learning_rate=0.01, l1_weight=0.0, entropy_weight=0.0,
                          validation_fraction=0.15, patience=300)
        net, _ = train(net, x, y, cfg)
        result = distill(net, CandidateLibrary(), x)
        # both edges essentially linear: no transcendental nodes in the tree
        assert not contains_node(result.expr, Exp)
        assert not contains_node(result.expr, Log)
        rms = float(np.sqrt(np.mean(
            (_eval_rows(result.expr, x, ["x0", "x1"]) - net.predict(x)) ** 2)))
        assert rms <= 1e-3

    def test_all_zero_network(self):
        net = KanNetwork.create([2, 1], seed=2)
        net.layers[0].coeffs[:] = 0.0
        net.layers[0].base_weight[:] = 0.0
        x = np.random.default_rng(3).uniform(-1, 1, (50, 2))
        result = distill(net, CandidateLibrary(), x)
        assert result.expr == Const(0.0)
        assert result.zero_variance
        assert result.global_r2 is None

    def test_deterministic(self):
        net, x = train_single_edge(lambda t: np.sin(1.5 * t), seed=3)
        a = distill(net, CandidateLibrary(), x)
        b = distill(net, CandidateLibrary(), x)
        assert print_expr(a.expr) == print_expr(b.expr)
        assert [f.shape for f in a.edge_fits] == [f.shape for f in b.edge_fits]

    def test_low_fit_edge_flagged_and_replaced_by_mean(self):
        # a wiggly spline edge cannot be matched by the identity-only library
        net = KanNetwork.create([1, 1], grid_intervals=8, seed=4)
        rng = np.random.default_rng(5)
        net.layers[0].coeffs[0, 0] = rng.normal(0, 2.0, net.grids[0].n_basis)
        net.layers[0].base_weight[:] = 0.0
        x = rng.uniform(-1, 1, (100, 1))
        result = distill(net, CandidateLibrary(("identity",)), x,
                         r2_floor=0.9)
        assert result.low_fit_edges == [(0, 0, 0)]
        assert result.edge_fits[0].low_fit
        assert isinstance(result.expr, Const)

    def test_square_shape_on_quadratic(self):
        net, x = train_single_edge(lambda t: t ** 2, seed=6)
        result = distill(net, CandidateLibrary(), x)
        assert result.edge_fits[0].shape in ("square", "cube")
        assert result.global_r2 >= 0.999

    def test_sqrt_shape_encoded_with_integer_powers_only(self):
        net, x = train_single_edge(lambda t: np.sqrt(t + 1.5), seed=7)
        result = distill(net, CandidateLibrary(("identity", "sqrt_shifted")), x)
        if result.edge_fits[0].shape == "sqrt_shifted":
            # AST has no fractional powers: sqrt is exp(log/2)
            def no_fractional_pow(e):
                if isinstance(e, Pow):
                    assert isinstance(e.exponent, int)
                    no_fractional_pow(e.base)
                elif hasattr(e, "children"):
                    for c in e.children:
                        no_fractional_pow(c)
                elif hasattr(e, "child"):
                    no_fractional_pow(e.child)
            no_fractional_pow(result.expr)
        assert result.global_r2 >= 0.99

    def test_unknown_shape_rejected(self):
        with pytest.raises(ValueError, match="unknown shapes"):
            CandidateLibrary(("identity", "sigmoid"))

    def test_feature_names_used(self):
        net, x = train_single_edge(np.exp, seed=8, epochs=400)
        result = distill(net, CandidateLibrary(("exp", "identity")), x,
                         feature_names=["nC"])
        from gwpkan.symbolic import free_variables
        assert free_variables(result.expr) <= {"nC"}
