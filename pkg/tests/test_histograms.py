import numpy as np
import pytest

import posesynth as ps
from posesynth.errors import (EmptyInput, RangeViolation, ShapeMismatch,
                              UnstableCoefficient)
from posesynth.histograms import (BINS, DiffusionSchedule, alpha, axis_bounds,
                                  empty_distribution, locate_bin,
                                  schedule_alpha, validity_masks, value_in_bin)


def test_axis_bounds(h36m):
    b = axis_bounds(h36m)
    assert b.shape == (16, 3, 2)
    assert np.array_equal(b[:, 0], h36m.range_limits[:, 0])
    assert np.all(b[:, 1] == (0.0, np.pi))
    assert np.all(b[:, 2] == (-np.pi, np.pi))


def test_validity_masks_match_direct_overlap(h36m):
    masks = validity_masks(h36m)
    bounds = axis_bounds(h36m)
    # rho axes equal the limit interval, so every bin is live
    assert masks[:, 0].all()
    for j in (0, 5, 12):
        for k in (1, 2):
            lo, hi = bounds[j, k]
            llo, lhi = h36m.range_limits[j, k]
            edges = np.linspace(lo, hi, BINS + 1)
            expect = (np.minimum(edges[1:], lhi)
                      - np.maximum(edges[:-1], llo)) > 1e-12 * (hi - lo)
            assert np.array_equal(masks[j, k], expect)
        assert masks[j].any(axis=-1).all()


def test_locate_bin_basics():
    mask = np.ones(BINS, dtype=bool)
    assert locate_bin(0.0, 0.0, 1.0, mask) == 0
    assert locate_bin(1.0, 0.0, 1.0, mask) == BINS - 1  # top edge clamps in
    assert locate_bin(0.5, 0.0, 1.0, mask) == 25
    mask[25] = False
    # sitting exactly on the edge of a dead bin snaps to the live neighbor
    assert locate_bin(0.5, 0.0, 1.0, mask) == 24
    with pytest.raises(ValueError):
        locate_bin(0.505, 0.0, 1.0, mask)
    # values off the axis never clamp silently into an edge bin
    with pytest.raises(ValueError):
        locate_bin(1.5, 0.0, 1.0, np.ones(BINS, dtype=bool))
    with pytest.raises(ValueError):
        locate_bin(-0.2, 0.0, 1.0, np.ones(BINS, dtype=bool))


def test_value_in_bin_respects_interval(rng):
    for _ in range(100):
        v = value_in_bin(10, 0.0, 1.0, 0.207, 0.9, rng)
        assert 0.207 <= v <= 0.22  # bin 10 is [0.20, 0.22), clipped at 0.207


def test_init_single_seed_is_one_hot(tiny, rng):
    p = ps.random_params(tiny, rng)
    dist = ps.init_from_seeds([p], None, tiny)
    assert dist.t == 0
    for k in range(3):
        assert np.isclose(dist.marginals[k].sum(), 1.0)
        assert (dist.marginals[k] > 0).sum() == 1
    # every joint contributes exactly one occupied row holding a single 1.0
    for c in range(1, tiny.joint_count):
        for k in range(3):
            grid = dist.grids[c - 1, k]
            assert np.isclose(grid.sum(), 1.0)
            assert (grid > 0).sum() == 1
            assert grid.max() == 1.0


def test_init_weights_split_rows(tiny, rng):
    a = ps.random_params(tiny, rng)
    b = a.copy()
    # same bins everywhere except the collar's phi
    lo, hi = -np.pi, np.pi
    width = (hi - lo) / BINS
    a[3, 2] = lo + 10.5 * width
    b[3, 2] = lo + 30.5 * width
    dist = ps.init_from_seeds([a, b], [0.3, 0.7], tiny)
    row_joint = dist.parent_row_joint(4)
    pb = locate_bin(a[row_joint - 1, 2], lo, hi, dist.masks[3, 2])
    row = dist.grids[3, 2, pb]
    assert np.isclose(row[10], 0.3)
    assert np.isclose(row[30], 0.7)
    # the shared joints collapse to a single fully-weighted cell
    assert dist.grids[0, 0].max() == 1.0


def test_init_input_checks(tiny, rng):
    with pytest.raises(EmptyInput):
        ps.init_from_seeds([], None, tiny)
    with pytest.raises(ShapeMismatch):
        ps.init_from_seeds([np.zeros((3, 3))], None, tiny)
    p = ps.random_params(tiny, rng)
    with pytest.raises(ShapeMismatch):
        ps.init_from_seeds([p], [0.5, 0.5], tiny)
    with pytest.raises(ValueError):
        ps.init_from_seeds([p], [-1.0], tiny)
    bad = p.copy()
    bad[1, 0] = 99.0
    with pytest.raises(RangeViolation) as exc:
        ps.init_from_seeds([bad], None, tiny)
    assert exc.value.joint == 2


def test_laplacian_step_interior_2d():
    g = np.zeros((BINS, BINS))
    g[20, 20] = 1.0
    out = ps.laplacian_step(g, 0.1)
    assert np.isclose(out[20, 20], 0.6)
    for r, c in ((19, 20), (21, 20), (20, 19), (20, 21)):
        assert np.isclose(out[r, c], 0.1)
    assert np.isclose(out.sum(), 1.0, atol=1e-12)


def test_laplacian_step_interior_1d():
    g = np.zeros(BINS)
    g[7] = 1.0
    out = ps.laplacian_step(g, 0.1)
    assert np.isclose(out[7], 0.8)
    assert np.isclose(out[6], 0.1) and np.isclose(out[8], 0.1)
    assert np.isclose(out.sum(), 1.0, atol=1e-12)


def test_laplacian_step_reflecting_boundary():
    g = np.zeros(BINS)
    g[0] = 1.0
    out = ps.laplacian_step(g, 0.1)
    # the edge neighbor reflects, so only one unit leaks right
    assert np.isclose(out[0], 0.9)
    assert np.isclose(out[1], 0.1)
    assert np.isclose(out.sum(), 1.0, atol=1e-12)


def test_laplacian_step_alpha_zero_is_identity(rng):
    g = rng.random((BINS, BINS))
    assert np.array_equal(ps.laplacian_step(g, 0.0), g)


def test_laplacian_step_conserves_mass(rng):
    g = rng.random((BINS, BINS))
    out = ps.laplacian_step(g, 0.2)
    assert np.isclose(out.sum(), g.sum(), atol=1e-9)
    v = rng.random(BINS)
    assert np.isclose(ps.laplacian_step(v, 0.24).sum(), v.sum(), atol=1e-12)


def test_diffuse_rows_stay_normalized(h36m):
    rng = np.random.default_rng(1)
    seeds = [ps.random_params(h36m, rng) for _ in range(5)]
    dist = ps.init_from_seeds(seeds, None, h36m)
    out = ps.diffuse(dist, 0.2)
    assert out.t == dist.t + 1
    sums = out.grids.sum(axis=-1)
    occupied = sums > 0
    assert np.allclose(sums[occupied], 1.0, atol=1e-9)
    assert np.allclose(out.marginals.sum(axis=-1), 1.0, atol=1e-9)
    # masked bins stay empty
    assert np.all(out.grids[~np.broadcast_to(out.masks[:, :, None, :],
                                             out.grids.shape)] == 0)
    # original untouched
    assert dist.t == 0 and np.isclose(dist.grids.max(), dist.grids.max())


def test_diffuse_supports_grow_monotonically(tiny, rng):
    dist = ps.init_from_seeds([ps.random_params(tiny, rng)], None, tiny)
    prev = None
    d = dist
    for step in range(3000):
        d = ps.diffuse(d, 0.2)
        if step % 250 == 0:
            support = int((d.grids > 0).sum()) + int((d.marginals > 0).sum())
            if prev is not None:
                assert support >= prev
            prev = support
    # long-run limit: occupied rows spread over the whole live axis
    row = d.grids[0, 1][d.grids[0, 1].sum(axis=-1) > 0][0]
    live = d.masks[0, 1]
    assert np.all(row[live] > 0)
    assert row.max() - row.min() < 0.01


def test_diffuse_rejects_unstable_alpha(tiny, rng):
    dist = ps.init_from_seeds([ps.random_params(tiny, rng)], None, tiny)
    with pytest.raises(UnstableCoefficient):
        ps.diffuse(dist, 0.25)
    with pytest.raises(ValueError):
        ps.diffuse(dist, -0.01)
    ps.diffuse(dist, 0.249)  # just inside the bound


def test_alpha_profile():
    sched = DiffusionSchedule(views=4)
    a = alpha(sched, np.zeros(5), np.zeros(5))
    assert np.allclose(a, 1e-5)
    a = alpha(sched, np.full(5, 40.0), np.zeros(5))  # |dL| = 10 * views
    assert np.allclose(a, 1e-4)
    a = alpha(sched, np.full(5, 1e6), np.zeros(5))
    assert np.allclose(a, 0.249)
    # sign of the change is irrelevant
    assert np.allclose(alpha(sched, np.zeros(5), np.full(5, 40.0)), 1e-4)


def test_schedule_alpha_remembers_last_losses():
    sched = DiffusionSchedule(views=2)
    first = schedule_alpha(sched, np.array([1.0, 2.0]))
    assert np.allclose(first, sched.base)  # no history yet
    second = schedule_alpha(sched, np.array([1.0, 22.0]))
    assert np.isclose(second[0], sched.base)
    assert np.isclose(second[1], sched.base * 10.0)


def test_snapshot_roundtrip(tmp_path, tiny, rng):
    seeds = [ps.random_params(tiny, rng) for _ in range(3)]
    dist = ps.init_from_seeds(seeds, [1.0, 2.0, 3.0], tiny)
    dist = ps.diffuse(dist, 0.1)
    path = tmp_path / "dist.pgh"
    ps.save_snapshot(dist, path, rng_seed=17)
    back = ps.load_snapshot(path, tiny)
    assert back.t == 1
    assert np.array_equal(back.grids, dist.grids)
    assert np.array_equal(back.marginals, dist.marginals)
    import json
    manifest = json.loads((tmp_path / "dist.pgh.manifest.json").read_text())
    assert manifest["layout_id"] == "tiny5"
    assert manifest["rng_seed"] == 17
    assert manifest["t"] == 1


def test_snapshot_rejects_wrong_layout(tmp_path, tiny, h36m, rng):
    dist = ps.init_from_seeds([ps.random_params(tiny, rng)], None, tiny)
    path = tmp_path / "dist.pgh"
    ps.save_snapshot(dist, path)
    with pytest.raises(ValueError):
        ps.load_snapshot(path, h36m)


def test_seed_weights_single_seed(rng):
    seeds = [rng.random((17, 2))]
    reals = [rng.random((17, 2)) for _ in range(25)]
    assert np.array_equal(ps.seed_weights(reals, seeds), [1.0])


def test_seed_weights_tie_goes_to_lower_index(rng):
    s = rng.random((17, 2))
    # identical seeds: every real is equidistant, index 0 collects everything
    w = ps.seed_weights([rng.random((17, 2)) for _ in range(10)], [s, s.copy()])
    assert np.array_equal(w, [1.0, 0.0])


def test_seed_weights_cluster_proportions(rng):
    s0 = rng.random((17, 2))
    s1 = s0 + 3.0 * rng.standard_normal((17, 2))
    reals = []
    for i in range(1000):
        base = s0 if i < 300 else s1
        reals.append(base + 0.01 * rng.standard_normal((17, 2)))
    w = ps.seed_weights(reals, [s0, s1])
    assert abs(w[0] - 0.3) <= 0.02
    assert abs(w[1] - 0.7) <= 0.02
    assert np.isclose(w.sum(), 1.0)


def test_seed_weights_scale_blind(rng):
    seeds = [rng.random((17, 2)) for _ in range(3)]
    reals = [rng.random((17, 2)) for _ in range(40)]
    w1 = ps.seed_weights(reals, seeds)
    w2 = ps.seed_weights([r * 250.0 for r in reals], [s * 3.0 for s in seeds])
    assert np.array_equal(w1, w2)


def test_seed_weights_empty_inputs(rng):
    with pytest.raises(EmptyInput):
        ps.seed_weights([], [rng.random((17, 2))])
    with pytest.raises(EmptyInput):
        ps.seed_weights([rng.random((17, 2))], [])
