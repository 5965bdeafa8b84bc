"""The 2D-to-3D lifting network: a residual multilayer perceptron with
hand-written forward, backward and Adam updates (no autograd dependency).

Architecture: one in-layer (2J -> width), three residual blocks (two affine
layers each with leaky-rectifier activations, additive skip), one out-layer
(width -> 3J).  Inputs are flattened scaleless 2D keypoints, outputs flattened
3D joints.  All arrays are float64; weights act on row vectors (x @ W + b).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteGradient, ShapeMismatch

N_BLOCKS = 3


@dataclass
class LifterParams:
    joint_count: int
    width: int
    slope: float                       # leaky-rectifier negative slope
    w_in: np.ndarray
    b_in: np.ndarray
    blocks: list                       # [(w1, b1, w2, b2)] * N_BLOCKS
    w_out: np.ndarray
    b_out: np.ndarray

    def arrays(self):
        """All parameter arrays in a fixed order (shared with grads/optimizer)."""
        out = [self.w_in, self.b_in]
        for w1, b1, w2, b2 in self.blocks:
            out += [w1, b1, w2, b2]
        out += [self.w_out, self.b_out]
        return out

    def copy(self) -> "LifterParams":
        return LifterParams(
            joint_count=self.joint_count, width=self.width, slope=self.slope,
            w_in=self.w_in.copy(), b_in=self.b_in.copy(),
            blocks=[tuple(a.copy() for a in blk) for blk in self.blocks],
            w_out=self.w_out.copy(), b_out=self.b_out.copy(),
        )


def init_params(joint_count: int, width: int, rng, slope: float = 0.01) -> LifterParams:
    """Seeded uniform fan-in initialization, U(-1/sqrt(fan_in), +1/sqrt(fan_in))."""
    def layer(fan_in, fan_out):
        bound = 1.0 / np.sqrt(fan_in)
        return (rng.uniform(-bound, bound, size=(fan_in, fan_out)),
                rng.uniform(-bound, bound, size=fan_out))

    w_in, b_in = layer(2 * joint_count, width)
    blocks = []
    for _ in range(N_BLOCKS):
        w1, b1 = layer(width, width)
        w2, b2 = layer(width, width)
        blocks.append((w1, b1, w2, b2))
    w_out, b_out = layer(width, 3 * joint_count)
    return LifterParams(joint_count, width, slope, w_in, b_in, blocks, w_out, b_out)


def zero_grads(params: LifterParams):
    return [np.zeros_like(a) for a in params.arrays()]


def _lrelu(x, slope):
    return np.where(x > 0, x, slope * x)


def _lrelu_grad(x, slope):
    return np.where(x > 0, 1.0, slope)


def forward(params: LifterParams, x2d: np.ndarray) -> np.ndarray:
    """Predict flattened 3D joints from flattened normalized 2D keypoints.

    x2d: (batch, 2J) or (2J,).  Returns matching (batch, 3J) or (3J,).
    """
    y, _ = forward_cached(params, np.atleast_2d(np.asarray(x2d, dtype=np.float64)))
    return y[0] if np.asarray(x2d).ndim == 1 else y


def forward_cached(params: LifterParams, x: np.ndarray):
    """Forward pass keeping the intermediates needed by backward."""
    if x.ndim != 2 or x.shape[1] != 2 * params.joint_count:
        raise ShapeMismatch(
            f"input shape {x.shape}, expected (batch, {2 * params.joint_count})")
    s = params.slope
    cache = {"x": x}
    z_in = x @ params.w_in + params.b_in
    h = _lrelu(z_in, s)
    cache["z_in"] = z_in
    cache["block_io"] = []
    for w1, b1, w2, b2 in params.blocks:
        z1 = h @ w1 + b1
        a1 = _lrelu(z1, s)
        z2 = a1 @ w2 + b2
        a2 = _lrelu(z2, s)
        cache["block_io"].append((h, z1, a1, z2))
        h = h + a2
    y = h @ params.w_out + params.b_out
    cache["h_last"] = h
    return y, cache


def backward_cached(params: LifterParams, cache: dict, gy: np.ndarray):
    """Gradients of a scalar loss given d loss / d output.

    Returns (grads list matching params.arrays(), d loss / d input).
    """
    s = params.slope
    g_w_out = cache["h_last"].T @ gy
    g_b_out = gy.sum(axis=0)
    gh = gy @ params.w_out.T

    g_blocks = []
    for (w1, b1, w2, b2), (h_in, z1, a1, z2) in zip(
            reversed(params.blocks), reversed(cache["block_io"])):
        ga2 = gh  # skip connection passes gh through unchanged as well
        gz2 = ga2 * _lrelu_grad(z2, s)
        g_w2 = a1.T @ gz2
        g_b2 = gz2.sum(axis=0)
        ga1 = gz2 @ w2.T
        gz1 = ga1 * _lrelu_grad(z1, s)
        g_w1 = h_in.T @ gz1
        g_b1 = gz1.sum(axis=0)
        gh = gh + gz1 @ w1.T
        g_blocks.append([g_w1, g_b1, g_w2, g_b2])
    g_blocks.reverse()

    gz_in = gh * _lrelu_grad(cache["z_in"], s)
    g_w_in = cache["x"].T @ gz_in
    g_b_in = gz_in.sum(axis=0)
    gx = gz_in @ params.w_in.T

    grads = [g_w_in, g_b_in]
    for blk in g_blocks:
        grads += blk
    grads += [g_w_out, g_b_out]
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient("gradient contains NaN or inf")
    return grads, gx


@dataclass
class OptimizerState:
    """Adam moment accumulators, one (m, v) pair per parameter array."""

    m: list
    v: list
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: LifterParams) -> "OptimizerState":
        return cls(m=[np.zeros_like(a) for a in params.arrays()],
                   v=[np.zeros_like(a) for a in params.arrays()])


def adam_step(params: LifterParams, grads, state: OptimizerState, lr: float) -> None:
    """Standard bias-corrected Adam update, in place."""
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for a, g, m, v in zip(params.arrays(), grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        a -= lr * m_hat / (np.sqrt(v_hat) + state.eps)


def flatten_params(params: LifterParams) -> np.ndarray:
    return np.concatenate([a.ravel() for a in params.arrays()])


def set_flat_params(params: LifterParams, flat: np.ndarray) -> None:
    """Inverse of flatten_params; used by the finite-difference gradient oracle."""
    arrays = params.arrays()
    if flat.size != sum(a.size for a in arrays):
        raise ShapeMismatch("flat vector length does not match the parameter count")
    pos = 0
    for a in arrays:
        n = a.size
        a[...] = flat[pos:pos + n].reshape(a.shape)
        pos += n
