import numpy as np
import pytest

from lexnav import nn
from oracles import central_difference, relative_error


def _random_net(rng):
    depth = rng.integers(1, 4)
    sizes = [int(s) for s in rng.integers(1, 6, size=depth + 1)]
    net = nn.init_net(sizes, rng)
    for b in net.biases:
        b[:] = rng.normal(scale=0.3, size=b.shape)
    return net


def test_init_shapes_and_determinism():
    net = nn.init_net([4, 3, 2], np.random.default_rng(0))
    assert [w.shape for w in net.weights] == [(3, 4), (2, 3)]
    assert all(np.all(b == 0) for b in net.biases)
    limit = np.sqrt(6 / 7)
    assert np.all(np.abs(net.weights[0]) <= limit)
    again = nn.init_net([4, 3, 2], np.random.default_rng(0))
    assert all(np.array_equal(a, b) for a, b in zip(net.params(), again.params()))


def test_zero_net_outputs_zero(rng):
    net = nn.init_net([5, 7, 3], rng, zero=True)
    assert np.all(nn.forward(net, rng.normal(size=5)) == 0)


def test_linear_layer_matches_hand_product():
    w = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 3.0], [2.0, 0.0, 1.0]])
    net = nn.DenseNet([w], [np.array([0.5, 0.0, -1.0])])
    x = np.array([1.0, 2.0, 3.0])
    # rows: 1+4+0+0.5, 0-2+9+0, 2+0+3-1
    np.testing.assert_array_equal(nn.forward(net, x), [5.5, 7.0, 4.0])


def test_relu_zeroes_negative_preactivations():
    net = nn.DenseNet([np.array([[1.0], [-1.0]]), np.eye(2)], [np.zeros(2), np.zeros(2)])
    np.testing.assert_array_equal(nn.forward(net, [2.0]), [2.0, 0.0])
    np.testing.assert_array_equal(nn.forward(net, [-3.0]), [0.0, 3.0])


def test_forward_is_pure(rng):
    net = _random_net(rng)
    x = rng.normal(size=net.input_dim)
    assert nn.forward(net, x).tobytes() == nn.forward(net, x).tobytes()


def test_batch_forward_matches_rows(rng):
    net = nn.init_net([4, 8, 3], rng)
    xs = rng.normal(size=(6, 4))
    np.testing.assert_allclose(nn.forward(net, xs), np.array([nn.forward(net, x) for x in xs]), rtol=1e-12)


def test_gradient_check_random_architectures():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(25):
        net = _random_net(rng)
        batch = rng.integers(1, 4)
        x = rng.normal(size=(batch, net.input_dim))
        upstream = rng.normal(size=(batch, net.output_dim))
        grads = nn.backward(net, x, upstream)
        numeric = central_difference(lambda: float(np.sum(nn.forward(net, x) * upstream)), net.params())
        for g, n in zip(grads, numeric):
            worst = max(worst, relative_error(g, n))
    assert worst < 1e-4


def test_zero_upstream_gives_zero_grads(rng):
    net = _random_net(rng)
    grads = nn.backward(net, rng.normal(size=net.input_dim), np.zeros(net.output_dim))
    assert all(np.all(g == 0) for g in grads)


def test_linear_squared_loss_gradient():
    w = np.array([[0.5, -1.0]])
    net = nn.DenseNet([w], [np.array([0.0])])
    x = np.array([2.0, 3.0])
    y = 1.0
    err = nn.forward(net, x)[0] - y  # 1 - 3 - 1 = -3
    grads = nn.backward(net, x, np.array([err]))  # d(0.5 err^2)/d out = err
    np.testing.assert_allclose(grads[0], err * x[None, :])
    np.testing.assert_allclose(grads[1], [err])


def test_backward_shape_mismatch(rng):
    net = nn.init_net([3, 2], rng)
    with pytest.raises(ValueError):
        nn.backward(net, np.ones(3), np.ones(5))


def test_huber_branches():
    loss, grad = nn.huber(1.5, 1.5)
    assert loss == 0 and grad == 0
    loss, grad = nn.huber(0.0, 0.5)
    assert loss == pytest.approx(0.125) and grad == pytest.approx(-0.5)
    loss, grad = nn.huber(2.0, 0.0)
    assert loss == pytest.approx(1.5) and grad == pytest.approx(1.0)
    loss, grad = nn.huber(-2.0, 0.0)
    assert loss == pytest.approx(1.5) and grad == pytest.approx(-1.0)


def test_adam_zero_gradient_is_noop(rng):
    net = nn.init_net([3, 4, 2], rng)
    before = [p.copy() for p in net.params()]
    state = nn.AdamState.for_net(net)
    nn.adam_step(net, [np.zeros_like(p) for p in net.params()], state)
    assert state.t == 1
    assert all(np.array_equal(a, b) for a, b in zip(before, net.params()))


def test_adam_scalar_hand_update():
    net = nn.DenseNet([np.array([[0.5]])], [np.array([0.0])])
    state = nn.AdamState.for_net(net)
    g = 0.2
    nn.adam_step(net, [np.array([[g]]), np.array([0.0])], state)
    # textbook first step: m = 0.1 g, v = 0.001 g^2, bias-corrected m = g, v = g^2
    m_hat, v_hat = (0.1 * g) / (1 - 0.9), (0.001 * g * g) / (1 - 0.999)
    expected = 0.5 - 1e-3 * m_hat / (np.sqrt(v_hat) + 1e-8)
    assert net.weights[0][0, 0] == pytest.approx(expected, abs=1e-15)
    assert state.t == 1
    nn.adam_step(net, [np.array([[g]]), np.array([0.0])], state)
    assert state.t == 2


def test_adam_stays_finite_on_random_data():
    rng = np.random.default_rng(1)
    net = nn.init_net([6, 16, 3], rng)
    state = nn.AdamState.for_net(net)
    for _ in range(10_000):
        x = rng.normal(size=(4, 6))
        out, trace = nn.forward_trace(net, x)
        _, dloss = nn.huber(out, rng.normal(scale=5, size=out.shape))
        nn.adam_step(net, nn.backward(net, x, dloss / 4, trace), state)
    assert all(np.all(np.isfinite(p)) for p in net.params())


def test_checkpoint_round_trip(rng):
    net = nn.init_net([5, 7, 3], rng)
    text = nn.dump_net(net, ["hello world"])
    assert text.splitlines()[0] == "lexnav-net v1 5 7 3"
    again, comments = nn.parse_net(text)
    assert comments == ["hello world"]
    x = rng.normal(size=(10, 5))
    assert np.max(np.abs(nn.forward(again, x) - nn.forward(net, x))) <= 1e-12


def test_checkpoint_version_mismatch(rng):
    text = nn.dump_net(nn.init_net([2, 2], rng)).replace("v1", "v9", 1)
    with pytest.raises(nn.CheckpointError, match="version"):
        nn.parse_net(text)
