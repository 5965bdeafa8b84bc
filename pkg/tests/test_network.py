import numpy as np
import pytest

import posesynth as ps
from posesynth.errors import NonFiniteGradient, ShapeMismatch
from posesynth.network import (backward_cached, flatten_params, forward_cached,
                               set_flat_params, zero_grads)


def small_net(seed=0, width=16, joints=5):
    return ps.init_params(joints, width, np.random.default_rng(seed))


def test_init_is_seeded():
    a = small_net(seed=3)
    b = small_net(seed=3)
    for x, y in zip(a.arrays(), b.arrays()):
        assert np.array_equal(x, y)
    c = small_net(seed=4)
    assert not np.array_equal(a.w_in, c.w_in)


def test_init_bounds():
    p = small_net(width=64, joints=17)
    bound = 1.0 / np.sqrt(2 * 17)
    assert np.abs(p.w_in).max() <= bound
    assert np.abs(p.b_in).max() <= bound
    assert np.abs(p.blocks[0][0]).max() <= 1.0 / 8.0


def test_zero_weights_give_zero_output(rng):
    p = small_net()
    for a in p.arrays():
        a[...] = 0.0
    x = rng.normal(size=(4, 10))
    assert np.array_equal(ps.forward(p, x), np.zeros((4, 15)))


def test_forward_shapes(rng):
    p = small_net()
    x = rng.normal(size=10)
    y1 = ps.forward(p, x)
    assert y1.shape == (15,)
    y2 = ps.forward(p, x[None, :])
    assert y2.shape == (1, 15)
    assert np.array_equal(y1, y2[0])
    with pytest.raises(ShapeMismatch):
        ps.forward(p, rng.normal(size=(4, 11)))


def test_forward_is_deterministic(rng):
    p = small_net()
    x = rng.normal(size=(8, 10))
    assert np.array_equal(ps.forward(p, x), ps.forward(p, x))


def test_lipschitz_bound(rng):
    # leaky-rectifier slopes <= 1, so the operator norms of the affine maps
    # bound how far apart two outputs can drift
    p = small_net(width=32)
    bound = np.linalg.norm(p.w_in, 2)
    for w1, _, w2, _ in p.blocks:
        bound *= 1.0 + np.linalg.norm(w1, 2) * np.linalg.norm(w2, 2)
    bound *= np.linalg.norm(p.w_out, 2)
    for _ in range(50):
        x1 = rng.normal(size=10)
        x2 = rng.normal(size=10)
        lhs = np.linalg.norm(ps.forward(p, x1) - ps.forward(p, x2))
        assert lhs <= bound * np.linalg.norm(x1 - x2) * (1.0 + 1e-9)


def test_copy_is_deep(rng):
    p = small_net()
    q = p.copy()
    q.w_in[0, 0] += 1.0
    q.blocks[1][2][0, 0] += 1.0
    assert p.w_in[0, 0] != q.w_in[0, 0]
    assert p.blocks[1][2][0, 0] != q.blocks[1][2][0, 0]


def test_flat_roundtrip(rng):
    p = small_net()
    flat = flatten_params(p)
    q = small_net(seed=9)
    set_flat_params(q, flat)
    for a, b in zip(p.arrays(), q.arrays()):
        assert np.array_equal(a, b)
    with pytest.raises(ShapeMismatch):
        set_flat_params(q, flat[:-1])


def test_backward_rejects_nonfinite(rng):
    p = small_net()
    x = rng.normal(size=(2, 10))
    _, cache = forward_cached(p, x)
    gy = np.full((2, 15), np.inf)
    with np.errstate(invalid="ignore"), pytest.raises(NonFiniteGradient):
        backward_cached(p, cache, gy)


def test_adam_no_gradient_no_motion(rng):
    p = small_net()
    before = flatten_params(p).copy()
    state = ps.OptimizerState.for_params(p)
    ps.adam_step(p, zero_grads(p), state, lr=0.1)
    assert np.array_equal(flatten_params(p), before)
    assert state.step == 1


def test_adam_zero_lr_no_motion(rng):
    p = small_net()
    before = flatten_params(p).copy()
    state = ps.OptimizerState.for_params(p)
    grads = [np.ones_like(a) for a in p.arrays()]
    ps.adam_step(p, grads, state, lr=0.0)
    assert np.array_equal(flatten_params(p), before)


def test_adam_matches_scalar_recursion():
    p = small_net()
    state = ps.OptimizerState.for_params(p)
    g = 0.37
    grads = [np.full_like(a, g) for a in p.arrays()]
    w0 = float(p.w_in[0, 0])

    # reference: the textbook update unrolled by hand for one scalar weight
    m = v = 0.0
    w = w0
    lr, b1, b2, eps = 1e-2, 0.9, 0.999, 1e-8
    for t in range(1, 4):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        w -= lr * m_hat / (np.sqrt(v_hat) + eps)
        ps.adam_step(p, grads, state, lr=lr)
        assert np.isclose(p.w_in[0, 0], w, atol=1e-15)
    # a constant gradient with bias correction moves every step by ~lr
    assert np.isclose(w0 - p.w_in[0, 0], 3 * lr, rtol=1e-6)
