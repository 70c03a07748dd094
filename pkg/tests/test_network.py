import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import forward_ref
from originnet.network import (
    Architecture,
    ArchitectureError,
    Mlp,
    forward,
    init_weights,
    load_model,
    save_model,
    sigmoid,
    sigmoid_slope,
    threshold_outputs,
)


class TestInit:
    def test_deterministic(self):
        a, b = init_weights((5, 4, 3), seed=3), init_weights((5, 4, 3), seed=3)
        for p, q in zip(a.params(), b.params()):
            np.testing.assert_array_equal(p, q)

    def test_paper_shapes(self):
        net = init_weights(Architecture((47, 15, 4)), seed=0)
        assert [w.shape for w in net.weights] == [(15, 47), (4, 15)]
        assert [b.shape for b in net.biases] == [(15,), (4,)]

    def test_range(self):
        net = init_weights((47, 5, 7, 4), seed=1, half_width=0.5)
        assert all(np.all(np.abs(p) <= 0.5) for p in net.params())

    @pytest.mark.parametrize("sizes", [(3,), (3, 0, 2), ()])
    def test_bad_architecture(self, sizes):
        with pytest.raises(ArchitectureError):
            init_weights(sizes)

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            init_weights((2, 1), sigma=0)


class TestSigmoid:
    def test_midpoint(self):
        assert sigmoid(0.0) == 0.5
        assert sigmoid(0.0, sigma=7.0) == 0.5

    def test_ten(self):
        # 1/(1+e^-10) to 40 digits: 0.99995460213129756560...
        assert abs(sigmoid(10.0) - 0.9999546021312976) <= 1e-7

    def test_no_overflow(self):
        with np.errstate(over="raise", invalid="raise"):
            out = sigmoid(np.array([-1e6, -800.0, 800.0, 1e6]))
        assert np.all((out > 0) & (out < 1))

    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(0.1, 5))
    def test_monotone_bounded(self, a, b, s):
        lo, hi = min(a, b), max(a, b)
        assert 0 < sigmoid(lo, s) <= sigmoid(hi, s) < 1

    @pytest.mark.parametrize("I, s", [(-2.0, 1.0), (0.3, 1.0), (1.5, 2.5), (-0.7, 0.4)])
    def test_derivative_matches_central_difference(self, I, s):
        h = 1e-6
        fd = (sigmoid(I + h, s) - sigmoid(I - h, s)) / (2 * h)
        analytic = sigmoid_slope(sigmoid(I, s), s)
        assert abs(analytic - fd) <= 1e-6 * abs(fd)


class TestForward:
    def test_zero_weights(self):
        net = Mlp([np.zeros((3, 4)), np.zeros((2, 3))], [np.zeros(3), np.zeros(2)])
        trace = forward(net, np.array([1.0, -2.0, 3.0, 0.5]))
        assert all(np.all(a == 0.5) for a in trace.activations[1:])

    def test_single_neuron(self):
        net = Mlp([np.array([[1.0]])], [np.array([0.0])])
        assert forward(net, [0.0]).output.tolist() == [0.5]

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(11)
        net = init_weights((5, 4, 3, 2), seed=5, half_width=1.5, sigma=1.3)
        ws = [w.tolist() for w in net.weights]
        bs = [b.tolist() for b in net.biases]
        X = rng.normal(size=(6, 5))
        batch_out = forward(net, X).output
        for x, out in zip(X, batch_out):
            ref = forward_ref(ws, bs, x.tolist(), sigma=1.3)
            np.testing.assert_allclose(out, ref, rtol=0, atol=1e-12)
            np.testing.assert_allclose(forward(net, x).output, ref, rtol=0, atol=1e-12)

    def test_trace_layout(self):
        net = init_weights((3, 2, 1), seed=0)
        tr = forward(net, np.ones(3))
        assert [a.shape for a in tr.activations] == [(3,), (2,), (1,)]
        assert [p.shape for p in tr.pre_activations] == [(2,), (1,)]
        np.testing.assert_array_equal(tr.activations[1], sigmoid(tr.pre_activations[0]))

    def test_dimension_mismatch(self):
        with pytest.raises(ArchitectureError):
            forward(init_weights((3, 2)), np.ones(4))

    def test_no_side_effects(self):
        net = init_weights((4, 3, 2), seed=2)
        before = [p.copy() for p in net.params()]
        forward(net, np.ones((5, 4)))
        for p, q in zip(before, net.params()):
            np.testing.assert_array_equal(p, q)

    @given(st.integers(0, 10_000), st.floats(-20, 20))
    def test_activations_strictly_inside(self, seed, scale):
        net = init_weights((4, 3, 2), seed=seed, half_width=2.0)
        tr = forward(net, np.full(4, scale))
        for a in tr.activations[1:]:
            assert np.all((a > 0) & (a < 1))
        assert all(np.all(np.isfinite(p)) for p in tr.pre_activations)


def test_threshold():
    assert threshold_outputs([0.5]).tolist() == [1]
    assert threshold_outputs([0.499]).tolist() == [0]
    assert threshold_outputs([0.9, 0.2, 0.51, 0.5]).tolist() == [1, 0, 1, 1]


def test_model_json_round_trip(tmp_path):
    net = init_weights((6, 4, 3), seed=9, sigma=1.7)
    p = tmp_path / "model.json"
    save_model(net, p)
    back = load_model(p)
    assert back.sigma == 1.7
    assert back.architecture == net.architecture
    for a, b in zip(net.params(), back.params()):
        np.testing.assert_array_equal(a, b)


def test_model_json_rejects_unknown_version(tmp_path):
    d = init_weights((2, 1)).to_dict()
    d["format_version"] = 99
    with pytest.raises(ValueError):
        Mlp.from_dict(d)
