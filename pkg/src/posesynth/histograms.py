"""Histogram model of the pose distribution, plus its heat-diffusion widening.

Every non-root joint stores three 50x50 conditional histograms (one per local
component): rows index the conditioning joint's bin, columns the joint's own
bin.  Conditioning follows the layout's dependency tree.  The root level is a
trio of 1-D marginal histograms wired to the layout's anchor joint (the lowest
joint conditioned directly on the root); its sampled bin conditions every
pelvis-level child, keeping the histogram count at 3 marginals + 3*(J-1)
conditionals.

Bins outside a joint's limit interval form a validity mask and are pinned to
zero forever.  Diffusion is an explicit Laplacian step with reflecting
boundaries; mass pushed into masked bins is removed and each row renormalized.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .camera import normalize_2d
from .errors import EmptyInput, RangeViolation, ShapeMismatch, UnstableCoefficient
from .layouts import JointLayout, COMPONENT_NAMES, RHO
from .spherical import cart_to_spherical  # noqa: F401  (re-exported for pipelines)

BINS = 50
STABILITY_BOUND = 0.25
_MASK_MIN_OVERLAP = 1e-12
_EDGE_SNAP = 1e-9

SNAPSHOT_MAGIC = b"PGH1"


# ---------------------------------------------------------------------------
# axes and binning


def axis_bounds(layout: JointLayout) -> np.ndarray:
    """Histogram axis [lo, hi] per (non-root joint, component), shape (J-1, 3, 2).

    The length axis spans the joint's own limit interval; both angle axes span
    their full domain so that limit intervals become proper validity masks.
    """
    J = layout.joint_count
    bounds = np.zeros((J - 1, 3, 2))
    bounds[:, 0] = layout.range_limits[:, RHO]
    bounds[:, 1] = (0.0, np.pi)
    bounds[:, 2] = (-np.pi, np.pi)
    return bounds


def validity_masks(layout: JointLayout, bounds=None) -> np.ndarray:
    """Boolean (J-1, 3, 50) array; True where a bin overlaps the limit interval."""
    if bounds is None:
        bounds = axis_bounds(layout)
    J = layout.joint_count
    masks = np.zeros((J - 1, 3, BINS), dtype=bool)
    for j in range(J - 1):
        for k in range(3):
            lo, hi = bounds[j, k]
            edges = np.linspace(lo, hi, BINS + 1)
            llo, lhi = layout.range_limits[j, k]
            overlap = np.minimum(edges[1:], lhi) - np.maximum(edges[:-1], llo)
            masks[j, k] = overlap > _MASK_MIN_OVERLAP * (hi - lo)
    return masks


def locate_bin(value: float, lo: float, hi: float, mask: np.ndarray) -> int:
    """Bin index of a value on a 50-bin axis, honoring the validity mask.

    A value sitting exactly on the edge of an invalid bin is snapped into the
    adjacent valid bin, so closed limit intervals behave as closed.
    Raises ValueError if the value lies outside the axis or truly lands in
    masked territory.
    """
    width = (hi - lo) / BINS
    tol = _EDGE_SNAP * (hi - lo)
    if value < lo - tol or value > hi + tol:
        raise ValueError(f"value {value!r} outside axis [{lo!r}, {hi!r}]")
    idx = int(np.floor((value - lo) / width))
    idx = min(max(idx, 0), BINS - 1)
    if mask[idx]:
        return idx
    tol = _EDGE_SNAP * (hi - lo)
    if idx > 0 and mask[idx - 1] and abs(value - (lo + idx * width)) <= tol:
        return idx - 1
    if idx < BINS - 1 and mask[idx + 1] and abs(value - (lo + (idx + 1) * width)) <= tol:
        return idx + 1
    raise ValueError(f"value {value!r} falls in a masked bin")


def value_in_bin(idx: int, lo: float, hi: float, limit_lo: float, limit_hi: float, rng) -> float:
    """Uniform draw inside bin idx, clipped to the joint's limit interval."""
    width = (hi - lo) / BINS
    a = max(lo + idx * width, limit_lo)
    b = min(lo + (idx + 1) * width, limit_hi)
    return float(rng.uniform(a, b))


# ---------------------------------------------------------------------------
# the distribution


@dataclass
class DistributionSet:
    """The full histogram stack for one layout at diffusion step t.

    grids: (J-1, 3, 50, 50) conditionals, rows = conditioning bin.
    marginals: (3, 50) root-level marginals on the anchor joint's axes.
    """

    layout: JointLayout
    grids: np.ndarray
    marginals: np.ndarray
    t: int
    bounds: np.ndarray
    masks: np.ndarray

    @property
    def anchor(self) -> int:
        return self.layout.anchor_joint

    def parent_row_joint(self, joint: int) -> int:
        """Joint whose bin indexes the rows of `joint`'s conditionals."""
        p = int(self.layout.markov_parent[joint])
        return self.anchor if p == 0 else p

    def copy(self) -> "DistributionSet":
        return dataclasses.replace(self, grids=self.grids.copy(),
                                   marginals=self.marginals.copy())


def empty_distribution(layout: JointLayout) -> DistributionSet:
    J = layout.joint_count
    bounds = axis_bounds(layout)
    return DistributionSet(
        layout=layout,
        grids=np.zeros((J - 1, 3, BINS, BINS)),
        marginals=np.zeros((3, BINS)),
        t=0,
        bounds=bounds,
        masks=validity_masks(layout, bounds),
    )


def _seed_bins(dist: DistributionSet, params: np.ndarray) -> np.ndarray:
    """Bin indices (J, 3) for one parameter set; row 0 mirrors the anchor joint."""
    layout = dist.layout
    J = layout.joint_count
    bins = np.zeros((J, 3), dtype=np.int64)
    for c in range(1, J):
        for k in range(3):
            lo, hi = dist.bounds[c - 1, k]
            try:
                bins[c, k] = locate_bin(params[c - 1, k], lo, hi, dist.masks[c - 1, k])
            except ValueError:
                llo, lhi = layout.limits(c, k)
                raise RangeViolation(
                    f"seed {COMPONENT_NAMES[k]}={params[c - 1, k]:.6g} outside "
                    f"[{llo:.6g}, {lhi:.6g}] for joint {c}",
                    joint=c, component=k) from None
    bins[0] = bins[dist.anchor]
    return bins


def init_from_seeds(seeds, weights, layout: JointLayout) -> DistributionSet:
    """Populate all histograms from weighted seed parameter sets.

    seeds: iterable of (J-1, 3) spherical parameter arrays.
    weights: one non-negative weight per seed (None = uniform); each seed adds
    its weight to the (conditioning bin, own bin) cell it occupies, then the
    occupied rows are normalized.  t starts at 0.
    """
    seeds = [np.asarray(s, dtype=np.float64) for s in seeds]
    if not seeds:
        raise EmptyInput("need at least one seed")
    J = layout.joint_count
    for s in seeds:
        if s.shape != (J - 1, 3):
            raise ShapeMismatch(f"seed shape {s.shape}, expected {(J - 1, 3)}")
    if weights is None:
        weights = np.full(len(seeds), 1.0 / len(seeds))
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(seeds),):
        raise ShapeMismatch("one weight per seed required")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")

    dist = empty_distribution(layout)
    for s, w in zip(seeds, weights):
        bins = _seed_bins(dist, s)
        for k in range(3):
            dist.marginals[k, bins[0, k]] += w
        for c in range(1, J):
            pb = bins[dist.parent_row_joint(c)]
            for k in range(3):
                dist.grids[c - 1, k, pb[k], bins[c, k]] += w
    _renormalize(dist)
    return dist


def _renormalize(dist: DistributionSet) -> None:
    dist.grids *= dist.masks[:, :, None, :]
    sums = dist.grids.sum(axis=-1, keepdims=True)
    np.divide(dist.grids, sums, out=dist.grids, where=sums > 0)
    dist.marginals *= dist.masks[dist.anchor - 1]
    msums = dist.marginals.sum(axis=-1, keepdims=True)
    np.divide(dist.marginals, msums, out=dist.marginals, where=msums > 0)


# ---------------------------------------------------------------------------
# diffusion


def laplacian_step(grid: np.ndarray, alpha: float) -> np.ndarray:
    """One explicit heat step P + alpha * lap(P) with reflecting boundaries.

    Accepts a 1-D vector (3-point stencil) or a 2-D grid (5-point stencil);
    conserves total mass exactly.  No masking or renormalization here.
    """
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim == 1:
        p = np.pad(g, 1, mode="edge")
        lap = p[:-2] + p[2:] - 2.0 * g
    elif g.ndim == 2:
        p = np.pad(g, 1, mode="edge")
        lap = (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]) - 4.0 * g
    else:
        raise ShapeMismatch("laplacian_step handles 1-D or 2-D grids")
    return g + alpha * lap


def _lap2_stack(grids: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    p = np.pad(grids, [(0, 0)] * (grids.ndim - 2) + [(1, 1), (1, 1)], mode="edge")
    lap = (p[..., :-2, 1:-1] + p[..., 2:, 1:-1]
           + p[..., 1:-1, :-2] + p[..., 1:-1, 2:]) - 4.0 * grids
    return grids + alphas[..., None, None] * lap


def _lap1_stack(grids: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    p = np.pad(grids, [(0, 0)] * (grids.ndim - 1) + [(1, 1)], mode="edge")
    lap = p[..., :-2] + p[..., 2:] - 2.0 * grids
    return grids + alphas[..., None] * lap


def diffuse(dist: DistributionSet, alphas) -> DistributionSet:
    """One diffusion step over every histogram; returns a new set with t+1.

    alphas: scalar or (J-1, 3) array of per-joint/component coefficients in
    [0, 0.25).  The root-level marginals move with the anchor joint's
    coefficients.  After the step, masked bins are zeroed and each occupied
    row renormalized to sum 1.
    """
    J = dist.layout.joint_count
    a = np.broadcast_to(np.asarray(alphas, dtype=np.float64), (J - 1, 3)).copy()
    if np.any(a < 0):
        raise ValueError("diffusion coefficients must be non-negative")
    if np.any(a >= STABILITY_BOUND):
        raise UnstableCoefficient(
            f"alpha max {a.max():.4g} >= {STABILITY_BOUND} breaks the explicit scheme")
    out = dist.copy()
    out.grids = _lap2_stack(out.grids, a)
    out.marginals = _lap1_stack(out.marginals, a[dist.anchor - 1])
    _renormalize(out)
    out.t = dist.t + 1
    return out


@dataclass
class DiffusionSchedule:
    """Loss-driven coefficient schedule for training-time diffusion."""

    base: float = 1e-5
    clamp: float = 0.249
    views: int = 4
    prev_losses: np.ndarray | None = None


def alpha(schedule: DiffusionSchedule, joint_loss_now, joint_loss_prev, views=None):
    """Per-joint coefficient base * 10^(|dL| / (10 * views)), clamped for stability."""
    n = schedule.views if views is None else views
    delta = np.abs(np.asarray(joint_loss_now, dtype=np.float64)
                   - np.asarray(joint_loss_prev, dtype=np.float64))
    # cap the exponent first so huge loss swings saturate without overflowing
    exp = np.minimum(delta / (10.0 * n), np.log10(schedule.clamp / schedule.base))
    return np.minimum(schedule.base * 10.0 ** exp, schedule.clamp)


def schedule_alpha(schedule: DiffusionSchedule, joint_losses) -> np.ndarray:
    """Stateful wrapper: differences against the remembered last-batch losses."""
    now = np.asarray(joint_losses, dtype=np.float64)
    prev = now if schedule.prev_losses is None else schedule.prev_losses
    out = alpha(schedule, now, prev)
    schedule.prev_losses = now
    return out


# ---------------------------------------------------------------------------
# seed weighting


def seed_weights(real_2d, seeds_2d) -> np.ndarray:
    """Fraction of real keypoint sets whose nearest seed (after scaleless
    normalization) is each seed; ties go to the lower seed index."""
    seeds = [normalize_2d(s).ravel() for s in seeds_2d]
    reals = [normalize_2d(r).ravel() for r in real_2d]
    if not seeds or not reals:
        raise EmptyInput("both the real set and the seed list must be non-empty")
    d = cdist(np.stack(reals), np.stack(seeds))
    nearest = np.argmin(d, axis=1)  # argmin takes the first minimum: low index wins
    return np.bincount(nearest, minlength=len(seeds)) / float(len(reals))


# ---------------------------------------------------------------------------
# snapshot files


def save_snapshot(dist: DistributionSet, path, rng_seed=None) -> None:
    """Write the histogram stack as little-endian f64 plus a JSON manifest."""
    J = dist.layout.joint_count
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<II", J, BINS))
        fh.write(dist.marginals.astype("<f8").tobytes())
        fh.write(dist.grids.astype("<f8").tobytes())
    manifest = {
        "layout_id": dist.layout.layout_id,
        "layout_sha256": dist.layout.content_hash(),
        "t": int(dist.t),
        "bins": BINS,
        "rng_seed": rng_seed,
    }
    with open(str(path) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_snapshot(path, layout: JointLayout) -> DistributionSet:
    with open(str(path) + ".manifest.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest["layout_sha256"] != layout.content_hash():
        raise ValueError("snapshot was built for a different layout")
    J = layout.joint_count
    with open(path, "rb") as fh:
        if fh.read(4) != SNAPSHOT_MAGIC:
            raise ValueError("not a histogram snapshot file")
        j_file, bins = struct.unpack("<II", fh.read(8))
        if j_file != J or bins != BINS:
            raise ValueError(f"snapshot is for J={j_file}, bins={bins}")
        marginals = np.frombuffer(fh.read(3 * BINS * 8), dtype="<f8").reshape(3, BINS)
        grids = np.frombuffer(fh.read((J - 1) * 3 * BINS * BINS * 8),
                              dtype="<f8").reshape(J - 1, 3, BINS, BINS)
    dist = empty_distribution(layout)
    dist.marginals = marginals.astype(np.float64)
    dist.grids = grids.astype(np.float64)
    dist.t = int(manifest["t"])
    return dist


def snapshot_hash(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
