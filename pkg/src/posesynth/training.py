"""Scaleless losses and the synthetic training loop.

Each batch: draw poses from the histogram model, render N random views,
feed every view's normalized 2D keypoints to the network, and penalize
  - the l1 gap between the normalized predicted and true 3D pose per view,
  - the l1 cross-view reprojection gap over all N^2 view pairs.
After the optimizer step the histograms take one diffusion step whose
per-joint coefficient grows with that joint's batch-to-batch loss change, so
the pose distribution widens as training stabilizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import ViewSchedule, sample_rotation, view_sigma
from .config import TrainConfig
from .errors import DegeneratePose, ShapeMismatch
from .histograms import DiffusionSchedule, DistributionSet, diffuse, schedule_alpha
from .layouts import JointLayout
from .network import (LifterParams, OptimizerState, adam_step, backward_cached,
                      forward_cached, init_params)
from .sampling import EmpiricalTracker, generate_batch

_EPS = 1e-12


def _norms(a: np.ndarray) -> np.ndarray:
    """Frobenius norm over the trailing two axes, keeping batch dims."""
    return np.sqrt((a * a).sum(axis=(-2, -1)))


def _normalize_batch(a: np.ndarray):
    r = _norms(a)
    if np.any(r <= _EPS):
        raise DegeneratePose("zero-norm pose in batch")
    return a / r[..., None, None], r


def _norm_backprop(g: np.ndarray, normed: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Pull a gradient back through x -> x/||x||_F (batched)."""
    inner = (g * normed).sum(axis=(-2, -1))
    return (g - inner[..., None, None] * normed) / r[..., None, None]


def loss3d(pred, target) -> float:
    """Mean over views of the l1 gap between Frobenius-normalized 3D poses."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeMismatch(f"pred {p.shape} vs target {t.shape}")
    if p.ndim == 2:
        p, t = p[None], t[None]
    pn, _ = _normalize_batch(p)
    tn, _ = _normalize_batch(t)
    return float(np.abs(pn - tn).sum(axis=(-2, -1)).mean())


def loss2d(preds_3d, targets_2d, rotations) -> float:
    """Cross-view reprojection error averaged over all view pairs.

    preds_3d: (N, J, 3) per-view predictions; targets_2d: (N, J, 2) already
    normalized; rotations: (N, 3, 3).  Prediction i is carried into view j by
    R_j R_i^T, projected, and compared to view j's keypoints.
    """
    p = np.asarray(preds_3d, dtype=np.float64)
    t = np.asarray(targets_2d, dtype=np.float64)
    rs = np.asarray(rotations, dtype=np.float64)
    n = p.shape[0]
    if t.shape[0] != n or rs.shape != (n, 3, 3):
        raise ShapeMismatch("one prediction, target and rotation per view required")
    total = 0.0
    for i in range(n):
        for j in range(n):
            q = rs[j] @ rs[i].T
            moved = p[i] @ q.T
            flat, _ = _normalize_batch(moved[None, :, :2])
            total += float(np.abs(flat[0] - t[j]).sum())
    return total / (n * n)


def total_loss(l2d: float, l3d: float, lambda_3d: float) -> float:
    return l2d + lambda_3d * l3d


@dataclass
class BatchStep:
    l2d: float
    l3d: float
    total: float
    joint_losses: np.ndarray  # (J,) per-joint share of the 3D term
    grads: list


def batch_step_values(params: LifterParams, poses: np.ndarray,
                      rotations: np.ndarray, lambda_3d: float) -> BatchStep:
    """Losses and exact parameter gradients for one batch of root-centered poses."""
    poses = np.asarray(poses, dtype=np.float64)
    rotations = np.asarray(rotations, dtype=np.float64)
    B, J, _ = poses.shape
    N = rotations.shape[0]

    # per-view rotated targets and their normalized projections
    targets = np.einsum("bjk,nlk->nbjl", poses, rotations)     # (N, B, J, 3)
    t3n, _ = _normalize_batch(targets)
    t2n, _ = _normalize_batch(targets[..., :2])
    inputs = t2n.reshape(N, B, 2 * J)

    preds = np.empty((N, B, J, 3))
    caches = []
    for i in range(N):
        y, cache = forward_cached(params, inputs[i])
        caches.append(cache)
        preds[i] = y.reshape(B, J, 3)
    centered = preds - preds[:, :, :1, :]
    cn, cr = _normalize_batch(centered)

    # 3D term and its per-joint decomposition
    diff3 = cn - t3n
    l3d = float(np.abs(diff3).sum(axis=(-2, -1)).mean())
    joint_losses = np.abs(diff3).sum(axis=-1).mean(axis=(0, 1))

    g_centered = lambda_3d / (N * B) * _norm_backprop(np.sign(diff3), cn, cr)

    # 2D term: every prediction reprojected into every view
    l2d = 0.0
    w2 = 1.0 / (N * N * B)
    for i in range(N):
        acc = np.zeros((B, J, 3))
        for j in range(N):
            q = rotations[j] @ rotations[i].T
            moved = np.einsum("bjk,lk->bjl", centered[i], q)
            planar = moved[..., :2]
            dn, dr = _normalize_batch(planar)
            diff2 = dn - t2n[j]
            l2d += float(np.abs(diff2).sum())
            gd = _norm_backprop(np.sign(diff2), dn, dr)
            g3 = np.concatenate([gd, np.zeros((B, J, 1))], axis=-1)
            acc += g3 @ q
        g_centered[i] += w2 * acc
    l2d *= w2

    # centering adjoint, then back through the network per view
    grads = None
    for i in range(N):
        g = g_centered[i].copy()
        g[:, 0, :] -= g_centered[i].sum(axis=1)
        view_grads, _ = backward_cached(params, caches[i], g.reshape(B, 3 * J))
        if grads is None:
            grads = view_grads
        else:
            for total_g, vg in zip(grads, view_grads):
                total_g += vg
    return BatchStep(l2d=l2d, l3d=l3d, total=total_loss(l2d, l3d, lambda_3d),
                     joint_losses=joint_losses, grads=grads)


def backward(params: LifterParams, poses, rotations, lambda_3d: float):
    """Exact gradients of the total batch loss for every parameter array."""
    return batch_step_values(params, poses, rotations, lambda_3d).grads


def batch_losses(params: LifterParams, poses, rotations, lambda_3d: float):
    step = batch_step_values(params, poses, rotations, lambda_3d)
    return step.l2d, step.l3d, step.total


@dataclass
class TrainResult:
    params: LifterParams
    log: list
    distribution: DistributionSet
    tracker: EmpiricalTracker


def train(config: TrainConfig, dist: DistributionSet, layout: JointLayout,
          rng, log_hook=None) -> TrainResult:
    """Full training run; reproducible given (config, initial distribution, rng seed)."""
    config.validate()
    J = layout.joint_count
    params = init_params(J, config.width, rng, config.activation_slope)
    opt = OptimizerState.for_params(params)
    tracker = EmpiricalTracker.for_layout(layout)
    vsched = ViewSchedule(views=config.views,
                          sigma_azimuth0=config.sigma_azimuth0,
                          sigma_tilt0=config.sigma_tilt0,
                          azimuth_increment=config.azimuth_increment,
                          tilt_increment=config.tilt_increment)
    dsched = DiffusionSchedule(base=config.alpha_base, views=config.views)
    batches = config.samples_per_epoch // config.batch_size
    log = []
    step_index = 0
    for epoch in range(1, config.epochs + 1):
        for b in range(1, batches + 1):
            step_index += 1
            sig_a, sig_t = view_sigma(vsched, b)
            rotations = np.stack([sample_rotation(sig_a, sig_t, rng)
                                  for _ in range(config.views)])
            poses, _ = generate_batch(dist, tracker, layout, rng, config.batch_size)
            step = batch_step_values(params, poses, rotations, config.lambda_3d)
            adam_step(params, step.grads, opt, config.learning_rate)

            alphas = schedule_alpha(dsched, step.joint_losses)
            dist = diffuse(dist, np.repeat(alphas[1:, None], 3, axis=1))

            record = {"epoch": epoch, "batch": step_index,
                      "l2d": step.l2d, "l3d": step.l3d, "total": step.total,
                      "alpha_mean": float(alphas[1:].mean()),
                      "sigma_view": sig_t, "t": dist.t}
            log.append(record)
            if log_hook is not None:
                log_hook(record)
    return TrainResult(params=params, log=log, distribution=dist, tracker=tracker)


def predict_poses(params: LifterParams, poses_3d: np.ndarray) -> np.ndarray:
    """Lift the identity-view projection of each pose; returns root-centered preds."""
    poses = np.asarray(poses_3d, dtype=np.float64)
    x, _ = _normalize_batch(poses[..., :2])
    y, _ = forward_cached(params, x.reshape(len(poses), -1))
    y = y.reshape(len(poses), -1, 3)
    return y - y[:, :1, :]


def zero_depth_baseline(poses_3d: np.ndarray) -> np.ndarray:
    """Reference prediction that keeps the normalized 2D input and guesses z=0."""
    poses = np.asarray(poses_3d, dtype=np.float64)
    x, _ = _normalize_batch(poses[..., :2])
    return np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
