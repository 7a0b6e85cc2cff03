import numpy as np
import pytest

from gwpkan.kan import KanError, KanNetwork, SplineGrid, basis_only, loss_and_grad
from gwpkan.kan.network import silu


def zero_network(widths=(2, 3, 1), seed=0) -> KanNetwork:
    net = KanNetwork.create(widths, seed=seed)
    for layer in net.layers:
        layer.coeffs[:] = 0.0
        layer.base_weight[:] = 0.0
    return net


def fd_gradients(net, x, y, l1, h=1e-5, entropy=0.0, per_array=None):
    """Central finite differences for every parameter (or a sample)."""
    worst = 0.0
    params = net.param_arrays()
    _, grads = loss_and_grad(net, x, y, l1, entropy)
    analytic = net.grad_arrays(grads)
    for arr, grad in zip(params, analytic):
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        idx = range(flat.size) if per_array is None else \
            np.random.default_rng(0).choice(flat.size,
                                            min(per_array, flat.size),
                                            replace=False)
        for i in idx:
            old = flat[i]
            flat[i] = old + h
            lp, _ = loss_and_grad(net, x, y, l1, entropy)
            flat[i] = old - h
            lm, _ = loss_and_grad(net, x, y, l1, entropy)
            flat[i] = old
            fd = (lp - lm) / (2 * h)
            rel = abs(fd - gflat[i]) / max(abs(fd), abs(gflat[i]), 1e-8)
            worst = max(worst, rel)
    return worst


class TestForward:
    def test_zero_network_outputs_zero(self):
        net = zero_network()
        rng = np.random.default_rng(0)
        out = net.forward_batch(rng.uniform(-1, 1, (10, 2)))
        np.testing.assert_array_equal(out, 0.0)

    def test_identity_like_spline_edge(self):
        # least-squares fit of f(t) = t onto the basis is the oracle
        net = zero_network(widths=(1, 1), seed=1)
        grid = net.grids[0]
        ts = np.linspace(grid.lo, grid.hi, 400)
        basis = basis_only(ts, grid)
        coeffs, *_ = np.linalg.lstsq(basis, ts, rcond=None)
        net.layers[0].coeffs[0, 0] = coeffs
        interior = np.linspace(grid.lo + 0.05, grid.hi - 0.05, 100)
        out = net.forward_batch(interior[:, None])[:, 0]
        np.testing.assert_allclose(out, interior, atol=1e-6)

    def test_permuting_inputs_with_their_edges(self):
        net = KanNetwork.create([2, 3, 1], seed=2)
        swapped = net.copy()
        swapped.layers[0].coeffs[:] = net.layers[0].coeffs[:, ::-1, :]
        swapped.layers[0].base_weight[:] = net.layers[0].base_weight[:, ::-1]
        swapped.layers[0].scale[:] = net.layers[0].scale[:, ::-1]
        rng = np.random.default_rng(3)
        x = rng.uniform(-1, 1, (20, 2))
        np.testing.assert_allclose(swapped.forward_batch(x[:, ::-1]),
                                   net.forward_batch(x), atol=1e-14)

    def test_width_mismatch(self):
        net = KanNetwork.create([2, 2, 1])
        with pytest.raises(KanError):
            net.forward(np.zeros(3))

    def test_forward_continuous_at_grid_boundary(self):
        net = KanNetwork.create([1, 2, 1], seed=4)
        eps = 1e-12
        lo, hi = net.grids[0].lo, net.grids[0].hi
        for edge in (lo, hi):
            left = net.forward(np.array([edge - eps]))
            right = net.forward(np.array([edge + eps]))
            np.testing.assert_allclose(left, right, atol=1e-9)

    def test_serialization_round_trip_forward_equivalence(self):
        net = KanNetwork.create([3, 4, 1], seed=5)
        rng = np.random.default_rng(6)
        x = rng.uniform(-2, 2, (50, 3))
        net.set_input_normalization(x)
        back = KanNetwork.from_json(net.to_json())
        np.testing.assert_allclose(back.forward_batch(x), net.forward_batch(x),
                                   atol=1e-12)
        assert back.params_digest() == net.params_digest()


class TestLossAndGrad:
    def test_zero_network_zero_targets(self):
        net = zero_network()
        x = np.random.default_rng(0).uniform(-1, 1, (5, 2))
        loss, grads = loss_and_grad(net, x, np.zeros(5), l1_weight=0.0)
        assert loss == 0.0
        for arr in net.grad_arrays(grads):
            np.testing.assert_array_equal(arr, 0.0)

    def test_gradients_match_finite_differences(self):
        net = KanNetwork.create([2, 4, 1], seed=7)
        rng = np.random.default_rng(8)
        x = rng.uniform(-1.2, 1.2, (8, 2))
        y = rng.normal(0, 1, 8)
        assert fd_gradients(net, x, y, l1=1e-3, per_array=10) <= 1e-4

    def test_entropy_term_gradient(self):
        net = KanNetwork.create([2, 3, 1], seed=9)
        rng = np.random.default_rng(10)
        x = rng.uniform(-1, 1, (6, 2))
        y = rng.normal(0, 1, 6)
        assert fd_gradients(net, x, y, l1=1e-3, entropy=5e-3,
                            per_array=8, h=1e-6) <= 1e-4

    def test_doubling_targets_doubles_scale_gradient_at_zero_net(self):
        # analytic: with a zero network, d(mse)/d(scale) is linear in y
        net = zero_network(widths=(2, 1), seed=11)
        rng = np.random.default_rng(12)
        net.layers[0].coeffs[:] = rng.normal(0, 0.3, net.layers[0].coeffs.shape)
        net.layers[0].scale[:] = 0.0
        x = rng.uniform(-1, 1, (16, 2))
        y = rng.normal(0, 1, 16)
        _, g1 = loss_and_grad(net, x, y, 0.0)
        _, g2 = loss_and_grad(net, x, 2.0 * y, 0.0)
        np.testing.assert_allclose(g2[0].scale, 2.0 * g1[0].scale, rtol=1e-12)

    def test_rejects_non_finite(self):
        net = KanNetwork.create([2, 2, 1])
        x = np.zeros((3, 2))
        x[1, 0] = np.inf
        with pytest.raises(KanError, match="non-finite"):
            loss_and_grad(net, x, np.zeros(3))

    def test_rejects_empty_batch(self):
        net = KanNetwork.create([2, 2, 1])
        with pytest.raises(KanError):
            loss_and_grad(net, np.zeros((0, 2)), np.zeros(0))
