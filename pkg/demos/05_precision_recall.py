"""
What diffusion does to precision and recall
===========================================

Synthetic samples are compared to a "real" set with k-NN ball coverage:
precision is the share of synthetic samples inside some real sample's ball,
recall the reverse.  Starting from few seeds, diffusion buys recall (the
distribution spreads over the real modes) and pays with precision (mass also
spreads into implausible territory).
"""

import numpy as np

import posesynth as ps

lay = ps.get_layout("h36m17")
rng = np.random.default_rng(2024)

# ground truth: four tight pose clusters
lo, hi = lay.range_limits[..., 0], lay.range_limits[..., 1]
anchors = [ps.random_params(lay, rng) for _ in range(4)]
draws = [np.clip(anchors[i % 4] + rng.normal(0, 0.01, lo.shape) * (hi - lo),
                 lo, hi) for i in range(200)]
gt = ps.init_from_seeds(draws, None, lay)


def sample_2d(dist, n, seed):
    trk = ps.EmpiricalTracker.for_layout(lay)
    poses, _ = ps.generate_batch(dist, trk, lay, np.random.default_rng(seed), n)
    return np.stack([ps.project(p) for p in poses])


real = sample_2d(gt, 1000, 1)

# a 10-seed model of that ground truth
trk = ps.EmpiricalTracker.for_layout(lay)
_, seed_params = ps.generate_batch(gt, trk, lay, np.random.default_rng(7), 10)
model = ps.init_from_seeds(list(seed_params), None, lay)

print(f"{'t':>6} {'precision':>10} {'recall':>8}")
for target in (0, 50, 200, 1000):
    while model.t < target:
        model = ps.diffuse(model, 0.1)
    rep = ps.precision_recall(real, sample_2d(model, 1000, 3 + target), k=10)
    print(f"{model.t:>6} {rep.precision:>10.3f} {rep.recall:>8.3f}")
