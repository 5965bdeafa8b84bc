"""Corrected sampling from the histogram stack.

Each draw compares the empirical frequency of a row's bins against the row's
true probabilities and excludes over-sampled bins, which keeps long sampling
runs from piling onto a few bins.  Over a full pose, joints are visited in
dependency-tree order, each conditioned on its parent's freshly drawn bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRow
from .histograms import BINS, DistributionSet, value_in_bin
from .layouts import JointLayout
from .spherical import spherical_to_cart


@dataclass
class EmpiricalTracker:
    """Integer draw counts mirroring every histogram row."""

    counts: np.ndarray          # (J-1, 3, 50, 50)
    row_totals: np.ndarray      # (J-1, 3, 50)
    marginal_counts: np.ndarray  # (3, 50)
    marginal_totals: np.ndarray  # (3,)

    @classmethod
    def for_layout(cls, layout: JointLayout) -> "EmpiricalTracker":
        J = layout.joint_count
        return cls(
            counts=np.zeros((J - 1, 3, BINS, BINS), dtype=np.int64),
            row_totals=np.zeros((J - 1, 3, BINS), dtype=np.int64),
            marginal_counts=np.zeros((3, BINS), dtype=np.int64),
            marginal_totals=np.zeros(3, dtype=np.int64),
        )


def sample_bin(row_true, row_counts, total, axis, rng, interval=None):
    """Draw (bin index, value) from one histogram row with over-sampling control.

    Admissible bins have positive true mass and empirical frequency
    count/max(total, 1) <= true mass; when every supported bin is
    over-sampled, fall back to the full support.  The draw is proportional to
    the true mass restricted to the admissible set — proportional, not
    uniform, or the row's weighting (seed weights, diffusion profile) would
    have no effect on what gets generated.  The value is uniform within the
    winning bin clipped to `interval` (defaults to the whole axis).

    Raises EmptyRow when the row has no positive bin at all.
    """
    row_true = np.asarray(row_true)
    support = row_true > 0.0
    if not support.any():
        raise EmptyRow("histogram row has no mass")
    freq = np.asarray(row_counts) / max(int(total), 1)
    candidates = np.flatnonzero(support & (freq <= row_true))
    if candidates.size == 0:
        candidates = np.flatnonzero(support)
    mass = row_true[candidates]
    cum = np.cumsum(mass)
    pick = min(np.searchsorted(cum, rng.random() * cum[-1], side="right"),
               candidates.size - 1)
    idx = int(candidates[pick])
    lo, hi = float(axis[0]), float(axis[1])
    llo, lhi = (lo, hi) if interval is None else (float(interval[0]), float(interval[1]))
    return idx, value_in_bin(idx, lo, hi, llo, lhi, rng)


def generate(dist: DistributionSet, tracker: EmpiricalTracker, layout: JointLayout, rng):
    """Sample one full pose; returns (pose (J,3), params (J-1,3)).

    Root-level components come from the marginals, every joint's components
    from its conditional row, and the tracker is bumped after each draw.
    """
    J = layout.joint_count
    anchor = dist.anchor
    a = anchor - 1
    bins = np.zeros((J, 3), dtype=np.int64)
    params = np.zeros((J - 1, 3))

    for k in range(3):
        try:
            b, _ = sample_bin(dist.marginals[k], tracker.marginal_counts[k],
                              tracker.marginal_totals[k], dist.bounds[a, k], rng,
                              interval=layout.range_limits[a, k])
        except EmptyRow:
            raise EmptyRow("root-level marginal is empty", joint=0, component=k) from None
        bins[0, k] = b
        tracker.marginal_counts[k, b] += 1
        tracker.marginal_totals[k] += 1

    for c in dist.layout.markov_order():
        # row 0 of `bins` holds the root-level draw, so pelvis-level joints
        # (markov parent 0) condition on it directly
        src = int(layout.markov_parent[c])
        for k in range(3):
            pb = int(bins[src, k])
            try:
                b, v = sample_bin(dist.grids[c - 1, k, pb],
                                  tracker.counts[c - 1, k, pb],
                                  tracker.row_totals[c - 1, k, pb],
                                  dist.bounds[c - 1, k], rng,
                                  interval=layout.range_limits[c - 1, k])
            except EmptyRow:
                raise EmptyRow(f"no mass in row {pb}", joint=c, component=k) from None
            bins[c, k] = b
            params[c - 1, k] = v
            tracker.counts[c - 1, k, pb, b] += 1
            tracker.row_totals[c - 1, k, pb] += 1

    return spherical_to_cart(params, layout), params


def generate_batch(dist, tracker, layout, rng, count):
    poses = np.zeros((count, layout.joint_count, 3))
    params = np.zeros((count, layout.joint_count - 1, 3))
    for i in range(count):
        poses[i], params[i] = generate(dist, tracker, layout, rng)
    return poses, params
