"""Evaluation metrics: position error, keypoint correctness, and the
nearest-neighbor-ball precision/recall overlap between two sample sets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .camera import normalize_2d
from .errors import DegeneratePose, SetTooSmall, ShapeMismatch

_EPS = 1e-12


def _root_align(pose: np.ndarray) -> np.ndarray:
    p = np.asarray(pose, dtype=np.float64)
    return p - p[0]


def mpjpe(pred, gt, rescale: bool = True) -> float:
    """Mean per-joint position error in millimeters (inputs in meters).

    Both poses are root-aligned; with rescale the prediction's Frobenius norm
    is matched to the ground truth's first, removing global scale.
    """
    p = _root_align(pred)
    g = _root_align(gt)
    if p.shape != g.shape:
        raise ShapeMismatch(f"pred {p.shape} vs gt {g.shape}")
    if rescale:
        pn = np.linalg.norm(p)
        if pn <= _EPS:
            raise DegeneratePose("cannot rescale a zero-norm prediction")
        p = p * (np.linalg.norm(g) / pn)
    return float(np.linalg.norm(p - g, axis=1).mean() * 1000.0)


def pck(pred, gt, head_length: float, rescale: bool = True) -> float:
    """Fraction of joints within half a head length of the ground truth."""
    p = _root_align(pred)
    g = _root_align(gt)
    if p.shape != g.shape:
        raise ShapeMismatch(f"pred {p.shape} vs gt {g.shape}")
    if rescale:
        pn = np.linalg.norm(p)
        if pn <= _EPS:
            raise DegeneratePose("cannot rescale a zero-norm prediction")
        p = p * (np.linalg.norm(g) / pn)
    err = np.linalg.norm(p - g, axis=1)
    return float((err <= head_length / 2.0).mean())


@dataclass
class EvalReport:
    mpjpe_mm: float
    pck: float
    count: int
    protocol: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"mpjpe_mm": self.mpjpe_mm, "pck": self.pck,
                "count": self.count, "protocol": self.protocol}


def evaluate_poses(preds, gts, head_length: float, rescale: bool = True) -> EvalReport:
    ms = [mpjpe(p, g, rescale) for p, g in zip(preds, gts)]
    ps = [pck(p, g, head_length, rescale) for p, g in zip(preds, gts)]
    return EvalReport(mpjpe_mm=float(np.mean(ms)), pck=float(np.mean(ps)),
                      count=len(ms),
                      protocol={"rescale": rescale, "head_length_m": head_length})


@dataclass
class PRReport:
    precision: float
    recall: float
    k: int
    real_count: int
    synth_count: int

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "k": self.k,
                "real_count": self.real_count, "synth_count": self.synth_count}


_BLOCK = 512


def _knn_radii(points: np.ndarray, k: int) -> np.ndarray:
    """Distance from each point to its k-th nearest neighbor (self excluded)."""
    n = len(points)
    radii = np.empty(n)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        d = cdist(points[start:stop], points)
        d[np.arange(stop - start), np.arange(start, stop)] = np.inf
        radii[start:stop] = np.partition(d, k - 1, axis=1)[:, k - 1]
    return radii


def _coverage(queries: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> float:
    """Fraction of query points inside at least one center's ball."""
    hits = 0
    for start in range(0, len(queries), _BLOCK):
        stop = min(start + _BLOCK, len(queries))
        d = cdist(queries[start:stop], centers)
        hits += int(np.any(d <= radii[None, :], axis=1).sum())
    return hits / len(queries)


def _flatten_normalized(poses) -> np.ndarray:
    return np.stack([normalize_2d(p).ravel() for p in poses])


def precision_recall(real, synth, k: int = 10) -> PRReport:
    """Manifold overlap between two 2D pose sets.

    A synthetic sample counts as precise if it falls inside some real sample's
    k-nearest-neighbor ball; recall swaps the roles.  Poses are normalized
    (root-centered, unit Frobenius norm) before any distance computation,
    which is a no-op on already-normalized input.
    """
    r = _flatten_normalized(real)
    s = _flatten_normalized(synth)
    if len(r) < k + 1 or len(s) < k + 1:
        raise SetTooSmall(f"need at least {k + 1} samples per set for k={k}")
    precision = _coverage(s, r, _knn_radii(r, k))
    recall = _coverage(r, s, _knn_radii(s, k))
    return PRReport(precision=precision, recall=recall, k=k,
                    real_count=len(r), synth_count=len(s))
