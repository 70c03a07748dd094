import numpy as np
import pytest

from originnet.backprop import Gradient, gradient
from originnet.network import Mlp, forward, init_weights, threshold_outputs
from originnet.rprop import RpropConfig, RpropState, rprop_step, train_rprop

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_T = np.array([[0.0], [1.0], [1.0], [0.0]])
XOR_SEEDS = list(range(10))


def one_weight(w=0.0):
    """1-1 network; the single weight is the object under test, the bias has zero gradient."""
    return Mlp([np.array([[w]])], [np.array([0.0])])


def state(delta, prev_grad, prev_step=0.0, **kw):
    return RpropState([np.array([[delta]]), np.array([1.0])],
                      [np.array([[prev_grad]]), np.array([0.0])],
                      [np.array([[prev_step]]), np.array([0.0])], **kw)


def grad(g):
    return Gradient([np.array([[g]])], [np.array([0.0])])


def step(w, g, delta, prev_grad, prev_step=0.0):
    net, st = rprop_step(one_weight(w), grad(g), state(delta, prev_grad, prev_step))
    return (net.weights[0][0, 0], st.update_values[0][0, 0], st.prev_gradient[0][0, 0],
            st.prev_step[0][0, 0])


class TestCases:
    def test_same_sign_grows_and_steps_against_gradient(self):
        w, delta, pg, last = step(0.0, 1.0, 1.0, 1.0)
        assert delta == 1.2
        assert w == -1.2
        assert pg == 1.0 and last == -1.2

    def test_same_sign_negative_gradient_increases_weight(self):
        w, delta, _, _ = step(0.0, -1.0, 1.0, -1.0)
        assert delta == 1.2 and w == 1.2

    def test_sign_change_shrinks_and_reverts(self):
        # previous step moved the weight by -1.0 from 3.0 to 2.0
        w, delta, pg, last = step(2.0, -1.0, 1.0, 1.0, prev_step=-1.0)
        assert delta == 0.5
        assert w == 3.0
        assert pg == 0.0
        assert last == 1.0

    def test_zero_product_keeps_update_value(self):
        w, delta, pg, _ = step(1.0, 2.0, 0.25, 0.0)
        assert delta == 0.25 and w == 0.75 and pg == 2.0
        w, delta, _, _ = step(1.0, -3.0, 0.25, 0.0)
        assert delta == 0.25 and w == 1.25

    def test_zero_gradient_moves_nothing(self):
        w, delta, pg, _ = step(0.5, 0.0, 0.25, 1.0)
        assert w == 0.5 and delta == 0.25 and pg == 0.0

    def test_upper_clamp(self):
        _, delta, _, _ = step(0.0, 1.0, 49.0, 1.0)
        assert delta == 50.0
        _, delta, _, _ = step(0.0, 1.0, 50.0, 1.0)
        assert delta == 50.0

    def test_lower_clamp(self):
        _, delta, _, _ = step(0.0, -1.0, 1e-6, 1.0)
        assert delta == 1e-6

    def test_no_adaptation_after_backtracking(self):
        net, st = rprop_step(one_weight(2.0), grad(-1.0), state(1.0, 1.0, prev_step=-1.0))
        assert st.prev_gradient[0][0, 0] == 0.0
        # gradient keeps its (new) sign: case (c), update value stays at 0.5
        net, st = rprop_step(net, grad(-1.0), st)
        assert st.update_values[0][0, 0] == 0.5
        assert net.weights[0][0, 0] == 3.5
        # from here on the product is positive again and growth resumes
        net, st = rprop_step(net, grad(-1.0), st)
        assert st.update_values[0][0, 0] == 0.5 * 1.2

    def test_mixed_cases_vectorised(self):
        net = Mlp([np.array([[0.0, 0.0, 0.0]])], [np.array([0.0])])
        st = RpropState([np.array([[1.0, 1.0, 1.0]]), np.array([1.0])],
                        [np.array([[1.0, 1.0, 0.0]]), np.array([0.0])],
                        [np.array([[0.0, -0.5, 0.0]]), np.array([0.0])])
        new, st2 = rprop_step(net, Gradient([np.array([[2.0, -2.0, -2.0]])], [np.array([0.0])]), st)
        assert new.weights[0].tolist() == [[-1.2, 0.5, 1.0]]
        assert st2.update_values[0].tolist() == [[1.2, 0.5, 1.0]]
        assert st2.prev_gradient[0].tolist() == [[2.0, 0.0, -2.0]]


class TestState:
    @pytest.mark.parametrize("kw", [dict(eta_minus=1.0), dict(eta_plus=1.0),
                                    dict(eta_minus=0.0), dict(delta_min=0.0),
                                    dict(delta_min=2.0, delta_max=1.0)])
    def test_factor_validation(self, kw):
        with pytest.raises(ValueError):
            state(1.0, 0.0, **kw)

    def test_positive_update_values(self):
        with pytest.raises(ValueError):
            state(0.0, 0.0)

    def test_shape_mismatch(self):
        net = init_weights((2, 2, 1))
        with pytest.raises(ValueError):
            rprop_step(net, grad(1.0), RpropState.initial(net))


class TestTraining:
    def test_first_epoch_is_plain_sign_step(self):
        net = init_weights((3, 2, 2), seed=0)
        X = np.random.default_rng(0).normal(size=(5, 3))
        T = np.eye(2)[[0, 1, 0, 1, 1]]
        g = gradient(net, X, T)
        out, h = train_rprop(net, (X, T), RpropConfig(max_epochs=1, error_target=0.0, delta_init=0.1))
        for w, gw, nw in zip(net.params(), g.params(), out.params()):
            np.testing.assert_array_equal(nw, w - np.sign(gw) * 0.1)
        assert h.mean_delta == [pytest.approx(0.1)]

    def test_bounds_hold_every_epoch(self):
        net = init_weights((3, 4, 2), seed=1)
        X = np.random.default_rng(1).normal(size=(8, 3))
        T = np.eye(2)[[0, 1] * 4]
        st = RpropState.initial(net, 0.1, delta_min=1e-3, delta_max=0.3)
        for _ in range(60):
            net, st = rprop_step(net, gradient(net, X, T), st)
            for d in st.update_values:
                assert np.all((d >= 1e-3) & (d <= 0.3))

    def test_xor(self):
        solved = 0
        for seed in XOR_SEEDS:
            net, _ = train_rprop(init_weights((2, 2, 1), seed=seed), (XOR_X, XOR_T),
                                 RpropConfig(max_epochs=1000))
            solved += np.array_equal(threshold_outputs(forward(net, XOR_X).output), XOR_T)
        assert solved >= 8

    def test_deterministic(self):
        cfg = RpropConfig(max_epochs=300)
        a, ha = train_rprop(init_weights((2, 2, 1), seed=3), (XOR_X, XOR_T), cfg)
        b, hb = train_rprop(init_weights((2, 2, 1), seed=3), (XOR_X, XOR_T), cfg)
        assert ha.mse == hb.mse
        for p, q in zip(a.params(), b.params()):
            np.testing.assert_array_equal(p, q)

    def test_empty_dataset(self):
        with pytest.raises(ValueError):
            train_rprop(init_weights((2, 1)), (np.zeros((0, 2)), np.zeros((0, 1))))
