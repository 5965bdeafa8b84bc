"""Command-line pipeline: seed selection, lifting, generation, training,
evaluation and the annotation service.  Every command is a thin wrapper over
the library so scripted runs and programmatic use stay equivalent."""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__
from .camera import project
from .config import config_hash, load_run_config
from .errors import PoseSynthError
from .histograms import (diffuse, init_from_seeds, load_snapshot,
                         save_snapshot, seed_weights)
from .layouts import builtin_layout_ids, resolve_layout
from .metrics import mpjpe, pck, precision_recall
from .poseio import (lift_result_bytes, read_poses, read_seed_file,
                     save_checkpoint, load_checkpoint, write_manifest,
                     write_poses, atomic_write)
from .sampling import EmpiricalTracker, generate_batch
from .seedlift import HeadTriangleSpec, lift, select_seed_sets
from .spherical import cart_to_spherical
from .training import predict_poses, train, zero_depth_baseline


def _fail(err) -> "click.ClickException":
    return click.ClickException(str(err))


@click.group()
@click.version_option(version=__version__, prog_name="posesynth")
def main():
    """Synthetic 3D pose generation and 2D-to-3D lifter training."""


@main.command("seeds-select")
@click.option("--dataset-2d", "dataset_path", required=True, type=click.Path(exists=True),
              help="Line-delimited JSON file of 2D poses.")
@click.option("--n-candidates", default=1000, show_default=True)
@click.option("--set-size", default=10, show_default=True)
@click.option("--keep", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_seeds_select(dataset_path, n_candidates, set_size, keep, seed, out_dir):
    """Pick high-variance candidate seed sets from a 2D pose collection."""
    try:
        ids, poses, layout_id = read_poses(dataset_path)
        sets = select_seed_sets(poses, n_candidates=n_candidates,
                                set_size=set_size, keep=keep,
                                rng=np.random.default_rng(seed))
    except (PoseSynthError, ValueError) as err:
        raise _fail(err)
    os.makedirs(out_dir, exist_ok=True)
    for rank, indices in enumerate(sets):
        path = os.path.join(out_dir, f"seedset_{rank:02d}.ldjson")
        write_poses(path, poses[indices], layout_id or "",
                    ids=[ids[i] for i in indices])
        click.echo(f"wrote {path} (poses {[int(i) for i in indices]})")


@main.command("lift")
@click.option("--seed-file", required=True, type=click.Path(exists=True))
@click.option("--layout", "layout_spec", default="h36m17", show_default=True)
@click.option("--alpha", default=1.0, show_default=True, help="bc/ab side ratio.")
@click.option("--beta", default=5.0 / 3.0, show_default=True, help="ac/ab side ratio.")
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_lift(seed_file, layout_spec, alpha, beta, out_path):
    """Lift every annotated entry of a seed file to 3D."""
    try:
        layout = resolve_layout(layout_spec)
        spec = HeadTriangleSpec.for_layout(layout, alpha=alpha, beta=beta)
        entries = read_seed_file(seed_file)
        results = [lift(e, layout, spec) for e in entries]
    except (PoseSynthError, ValueError) as err:
        raise _fail(err)
    blob = b"[" + b",".join(lift_result_bytes(r) for r in results) + b"]\n"
    atomic_write(out_path, blob)
    click.echo(f"lifted {len(results)} poses -> {out_path}")


def _seed_params(entries, layout, alpha, beta):
    spec = HeadTriangleSpec.for_layout(layout, alpha=alpha, beta=beta)
    params = []
    for e in entries:
        result = lift(e, layout, spec)
        p = cart_to_spherical(result.joints_3d, layout)
        # annotation noise can push a value just past its interval; clip so the
        # histograms stay inside biologic range
        params.append(np.clip(p, layout.range_limits[..., 0], layout.range_limits[..., 1]))
    return params


def _distribution_from_options(layout, seeds_path, snapshot_path, dataset_2d,
                               alpha, beta):
    if (seeds_path is None) == (snapshot_path is None):
        raise click.UsageError("provide exactly one of --seeds / --snapshot")
    if snapshot_path is not None:
        return load_snapshot(snapshot_path, layout)
    entries = read_seed_file(seeds_path)
    params = _seed_params(entries, layout, alpha, beta)
    weights = None
    if dataset_2d:
        _, real, _ = read_poses(dataset_2d)
        weights = seed_weights(real, [e.keypoints_px for e in entries])
    return init_from_seeds(params, weights, layout)


@main.command("gen")
@click.option("--layout", "layout_spec", default="h36m17", show_default=True)
@click.option("--seeds", "seeds_path", type=click.Path(exists=True),
              help="Annotated 2D seed file to initialize from.")
@click.option("--snapshot", "snapshot_path", type=click.Path(exists=True),
              help="Histogram snapshot to sample from instead of seeds.")
@click.option("--dataset-2d", type=click.Path(exists=True),
              help="Optional real 2D poses for seed weighting.")
@click.option("--alpha", default=1.0, show_default=True)
@click.option("--beta", default=5.0 / 3.0, show_default=True)
@click.option("--diffusion-steps", default=0, show_default=True)
@click.option("--diffusion-alpha", default=0.1, show_default=True)
@click.option("-n", "count", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_gen(layout_spec, seeds_path, snapshot_path, dataset_2d, alpha, beta,
            diffusion_steps, diffusion_alpha, count, seed, out_path):
    """Generate poses from seeds or a snapshot; deterministic per rng seed."""
    try:
        layout = resolve_layout(layout_spec)
        dist = _distribution_from_options(layout, seeds_path, snapshot_path,
                                          dataset_2d, alpha, beta)
        for _ in range(diffusion_steps):
            dist = diffuse(dist, diffusion_alpha)
        tracker = EmpiricalTracker.for_layout(layout)
        rng = np.random.default_rng(seed)
        poses, _ = generate_batch(dist, tracker, layout, rng, count)
    except (PoseSynthError, ValueError) as err:
        raise _fail(err)
    write_poses(out_path, poses, layout.layout_id)
    click.echo(f"generated {count} poses (t={dist.t}) -> {out_path}")


@main.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--layout", "layout_spec", default=None)
@click.option("--seeds", "seeds_path", default=None)
@click.option("--output-dir", default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--samples-per-epoch", type=int, default=None)
@click.option("--width", type=int, default=None)
@click.option("--seed", type=int, default=None)
def cmd_train(config_path, layout_spec, seeds_path, output_dir, epochs,
              samples_per_epoch, width, seed):
    """Train the lifter on synthetic data; writes checkpoint, log and snapshot."""
    overrides = {"layout": layout_spec, "seeds": seeds_path, "output_dir": output_dir,
                 "epochs": epochs, "samples_per_epoch": samples_per_epoch,
                 "width": width, "seed": seed}
    try:
        cfg = load_run_config(config_path, overrides=overrides)
        if cfg.seeds is None:
            raise click.UsageError("a seed file is required (config key 'seeds')")
        layout = resolve_layout(cfg.layout)
        entries = read_seed_file(cfg.seeds)
        params = _seed_params(entries, layout, 1.0, 5.0 / 3.0)
        weights = None
        if cfg.dataset_2d:
            _, real, _ = read_poses(cfg.dataset_2d)
            weights = seed_weights(real, [e.keypoints_px for e in entries])
        dist = init_from_seeds(params, weights, layout)

        os.makedirs(cfg.output_dir, exist_ok=True)
        log_path = os.path.join(cfg.output_dir, "training_log.ldjson")
        rng = np.random.default_rng(cfg.train.seed)
        with open(log_path, "w", encoding="utf-8") as log_fh:
            result = train(cfg.train, dist, layout, rng,
                           log_hook=lambda rec: log_fh.write(json.dumps(rec) + "\n"))
    except (PoseSynthError, ValueError) as err:
        raise _fail(err)

    ckpt = os.path.join(cfg.output_dir, "checkpoint.bin")
    save_checkpoint(ckpt, result.params)
    snap = os.path.join(cfg.output_dir, "distribution.pgh")
    save_snapshot(result.distribution, snap, rng_seed=cfg.train.seed)
    write_manifest(os.path.join(cfg.output_dir, "manifest.json"), {
        "config": cfg.to_dict(),
        "config_sha256": config_hash(cfg),
        "layout_sha256": layout.content_hash(),
        "rng_seed": cfg.train.seed,
        "versions": {"posesynth": __version__, "numpy": np.__version__},
        "final_loss": result.log[-1]["total"] if result.log else None,
        "diffusion_t": result.distribution.t,
    })
    click.echo(f"trained {len(result.log)} batches -> {ckpt}")


@main.command("eval")
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True))
@click.option("--poses", "poses_path", required=True, type=click.Path(exists=True),
              help="Ground-truth 3D poses (line-delimited JSON).")
@click.option("--poses-2d", "poses2d_path", type=click.Path(exists=True),
              help="Matching 2D inputs; derived by projection when omitted.")
@click.option("--layout", "layout_spec", default="h36m17", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def cmd_eval(ckpt_path, poses_path, poses2d_path, layout_spec, out_path):
    """Evaluate a checkpoint: position error and keypoint correctness."""
    try:
        layout = resolve_layout(layout_spec)
        params, _ = load_checkpoint(ckpt_path)
        _, gts, _ = read_poses(poses_path)
        gts = gts - gts[:, :1, :]
        if poses2d_path:
            _, inputs2d, _ = read_poses(poses2d_path)
            from .camera import normalize_2d
            x = np.stack([normalize_2d(p) for p in inputs2d])
            from .network import forward_cached
            y, _ = forward_cached(params, x.reshape(len(x), -1))
            preds = y.reshape(len(x), -1, 3)
            preds = preds - preds[:, :1, :]
        else:
            preds = predict_poses(params, gts)
        tri = layout.head_triangle
        errs, pcks, base = [], [], []
        baseline = zero_depth_baseline(gts)
        for pr, gt, b0 in zip(preds, gts, baseline):
            errs.append(mpjpe(pr, gt))
            head = float(np.linalg.norm(gt[tri["c"]] - gt[tri["a"]])) if tri else 0.2
            pcks.append(pck(pr, gt, head))
            base.append(mpjpe(b0, gt))
    except (PoseSynthError, ValueError) as err:
        raise _fail(err)
    report = {
        "mpjpe_mm": float(np.mean(errs)),
        "pck": float(np.mean(pcks)),
        "baseline_zero_depth_mpjpe_mm": float(np.mean(base)),
        "count": len(errs),
        "protocol": {"rescale": True, "pck_threshold": "half head length"},
    }
    atomic_write(out_path, (json.dumps(report, indent=2, sort_keys=True) + "\n").encode())
    click.echo(f"mpjpe {report['mpjpe_mm']:8.2f} mm   pck {report['pck']:.3f}   "
               f"zero-depth {report['baseline_zero_depth_mpjpe_mm']:8.2f} mm")


@main.command("pr")
@click.option("--real", "real_path", required=True, type=click.Path(exists=True))
@click.option("--synth", "synth_path", required=True, type=click.Path(exists=True))
@click.option("-k", default=10, show_default=True)
@click.option("--out", "out_path", type=click.Path())
def cmd_pr(real_path, synth_path, k, out_path):
    """Nearest-neighbor-ball precision/recall between two 2D pose files."""
    try:
        _, real, _ = read_poses(real_path)
        _, synth, _ = read_poses(synth_path)
        if real.shape[-1] == 3:
            real = np.stack([project(p - p[0]) for p in real])
        if synth.shape[-1] == 3:
            synth = np.stack([project(p - p[0]) for p in synth])
        report = precision_recall(real, synth, k=k)
    except (PoseSynthError, ValueError) as err:
        raise _fail(err)
    if out_path:
        atomic_write(out_path, (json.dumps(report.to_dict(), indent=2, sort_keys=True)
                                + "\n").encode())
    click.echo(f"{'':12s}{'precision':>10s}{'recall':>10s}")
    click.echo(f"{'k=' + str(report.k):12s}{report.precision:10.4f}{report.recall:10.4f}")
    click.echo(f"{'sizes':12s}{report.real_count:10d}{report.synth_count:10d}")


@main.command("layouts")
def cmd_layouts():
    """List the built-in skeleton layouts."""
    for layout_id in builtin_layout_ids():
        layout = resolve_layout(layout_id)
        click.echo(f"{layout_id}: {layout.joint_count} joints")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--seed-store", default="seed_store", show_default=True,
              help="Directory for persisted seed annotations.")
@click.option("--ui-dir", default=None, type=click.Path(),
              help="Built annotator UI to host statically (optional).")
def cmd_serve(host, port, seed_store, ui_dir):
    """Run the HTTP service backing the annotation UI."""
    import uvicorn

    from .service import create_app
    app = create_app(seed_store=seed_store, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main(prog_name="posesynth")
