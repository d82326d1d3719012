import numpy as np
import pytest

from tende.neural import (adam_init, adam_step, backward,
                          finite_difference_check, forward, forward_with_cache,
                          init_network, load_checkpoint, save_checkpoint,
                          time_embed)


def _probe_batch(rng, n=6, n_y=2, d_x=3, d_z=2):
    return (rng.normal(size=(n, n_y)), rng.normal(size=(n, d_x)),
            rng.normal(size=(n, d_z)), rng.uniform(0.05, 0.95, n))


def _randomized_net(rng, **kw):
    net = init_network(2, 3, 2, hidden=(16, 12), n_frequencies=4, rng=rng, **kw)
    net.weights[-1][:] = rng.normal(scale=0.3, size=net.weights[-1].shape)
    net.biases[-1][:] = rng.normal(scale=0.3, size=net.biases[-1].shape)
    return net


def test_zero_initialized_head_outputs_zero():
    rng = np.random.default_rng(0)
    net = init_network(2, 3, 2, rng=rng)
    y, x, z, t = _probe_batch(rng)
    assert np.all(forward(net, y, x, z, t, [1, 0, 0]) == 0.0)


def test_masked_block_is_erased_exactly():
    rng = np.random.default_rng(1)
    net = _randomized_net(rng)
    y, x, z, t = _probe_batch(rng)
    for mask, vary_x, vary_z in ([1, -1, 0], True, False), ([1, -1, -1], True, True):
        a = forward(net, y, x, z, t, mask)
        x2 = rng.normal(size=x.shape) if vary_x else x
        z2 = rng.normal(size=z.shape) if vary_z else z
        assert np.array_equal(a, forward(net, y, x2, z2, t, mask))


def test_distinct_masks_change_output():
    rng = np.random.default_rng(2)
    net = _randomized_net(rng)
    y, x, z, t = _probe_batch(rng)
    a = forward(net, y, x, z, t, [1, 0, 0])
    b = forward(net, y, x, z, t, [1, -1, -1])
    assert not np.allclose(a, b)


@pytest.mark.parametrize("mask", [[1, 2, 0], [0, 0, 0], [-1, 0, 0], [1, 0],
                                  [1, 0, 0, 0]])
def test_invalid_masks_rejected(mask):
    rng = np.random.default_rng(3)
    net = init_network(2, 3, 2, rng=rng)
    y, x, z, t = _probe_batch(rng)
    with pytest.raises(ValueError):
        forward(net, y, x, z, t, mask)


def test_block_width_mismatch_rejected():
    rng = np.random.default_rng(4)
    net = init_network(2, 3, 2, rng=rng)
    y, x, z, t = _probe_batch(rng)
    with pytest.raises(ValueError):
        forward(net, y, x[:, :2], z, t, [1, 0, 0])
    with pytest.raises(ValueError):
        forward(net, y[:3], x, z, t, [1, 0, 0])


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(5)
    net = init_network(2, 3, 2, hidden=(20,), n_frequencies=4, rng=rng)
    net.weights[-1][:] = rng.normal(scale=0.3, size=net.weights[-1].shape)
    y, x, z, t = _probe_batch(rng)
    err = finite_difference_check(net, y, x, z, t, [1, 0, 0], n_probes=50, rng=rng)
    assert err < 1e-4


def test_gradients_linear_in_adjoint():
    rng = np.random.default_rng(6)
    net = _randomized_net(rng)
    y, x, z, t = _probe_batch(rng)
    out, cache = forward_with_cache(net, y, x, z, t, [1, 0, 0])
    dout = rng.normal(size=out.shape)
    g1 = backward(net, cache, dout)
    g2 = backward(net, cache, 2.0 * dout)
    for (dw1, db1), (dw2, db2) in zip(g1, g2):
        assert np.allclose(dw2, 2.0 * dw1, rtol=1e-12)
        assert np.allclose(db2, 2.0 * db1, rtol=1e-12)


def test_adam_zero_gradient_is_noop():
    net = init_network(1, 1, 1, hidden=(8,), n_frequencies=2)
    state = adam_init(net)
    before = [p.copy() for p in net.parameters()]
    zeros = [(np.zeros_like(w), np.zeros_like(b))
             for w, b in zip(net.weights, net.biases)]
    adam_step(net, zeros, state)
    assert all(np.array_equal(a, b) for a, b in zip(before, net.parameters()))
    assert state.step == 1


def test_adam_first_step_magnitude_is_learning_rate():
    net = init_network(1, 1, 1, hidden=(8,), n_frequencies=2)
    state = adam_init(net, lr=1e-3)
    before = [p.copy() for p in net.parameters()]
    ones = [(np.ones_like(w), np.ones_like(b))
            for w, b in zip(net.weights, net.biases)]
    adam_step(net, ones, state)
    for a, b in zip(before, net.parameters()):
        # bias-corrected first step: lr * g / (|g| + eps) with g = 1
        assert np.allclose(np.abs(a - b), 1e-3, rtol=1e-6)


def test_adam_deterministic():
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(7)
        net = _randomized_net(rng)
        state = adam_init(net)
        y, x, z, t = _probe_batch(rng)
        for _ in range(5):
            out, cache = forward_with_cache(net, y, x, z, t, [1, 0, 0])
            adam_step(net, backward(net, cache, 2.0 * out), state)
        runs.append([p.copy() for p in net.parameters()])
    assert all(np.array_equal(a, b) for a, b in zip(*runs))


def test_time_embed_basics():
    freqs = np.geomspace(0.5, 64.0, 32)
    emb = time_embed(0.0, freqs)
    assert emb.shape == (64,)
    assert np.all(emb[:32] == 0.0) and np.all(emb[32:] == 1.0)


def test_time_embed_injective_on_grid():
    freqs = np.geomspace(0.5, 64.0, 32)
    grid = np.linspace(1e-5, 1.0, 1000)
    emb = time_embed(grid, freqs)
    assert emb.shape == (1000, 64)
    assert len(np.unique(emb, axis=0)) == 1000


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    net = _randomized_net(rng)
    net.trained = True
    path = tmp_path / "net.npz"
    save_checkpoint(net, path)
    other = load_checkpoint(path)
    assert other.block_dims == net.block_dims
    assert other.layer_dims == net.layer_dims
    assert other.trained
    assert np.array_equal(other.time_frequencies, net.time_frequencies)
    assert all(np.array_equal(a, b)
               for a, b in zip(net.parameters(), other.parameters()))


def test_checkpoint_version_is_enforced(tmp_path):
    path = tmp_path / "bad.npz"
    np.savez(path, format_version=np.array([99]), layer_dims=np.array([2, 1]))
    with pytest.raises(ValueError, match="version"):
        load_checkpoint(path)
    np.savez(path, layer_dims=np.array([2, 1]))
    with pytest.raises(ValueError, match="format version"):
        load_checkpoint(path)


def test_init_network_validates_dims():
    with pytest.raises(ValueError):
        init_network(0, 1, 1)
    with pytest.raises(ValueError):
        init_network(1, -1, 1)
