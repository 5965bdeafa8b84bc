"""File formats: line-delimited pose files, seed annotation files, network
checkpoints, and the canonical JSON used for lift results and manifests.

Pose files hold one JSON object per line: {"id", "joints", "layout_id"} where
joints is a JxD list (D = 2 or 3).  Canonical JSON (sorted keys, no spaces)
makes equal values serialize to equal bytes, which the service and CLI rely
on for reproducibility checks.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .errors import ShapeMismatch
from .network import N_BLOCKS, LifterParams, OptimizerState
from .seedlift import AnnotatedPose2D, LiftResult

CHECKPOINT_MAGIC = b"PLN1"
CHECKPOINT_VERSION = 1


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def atomic_write(path, data: bytes) -> None:
    """Write-temp-rename so readers never observe a partial file."""
    path = str(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               prefix=os.path.basename(path) + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# pose files


def write_poses(path, poses, layout_id: str, ids=None) -> None:
    poses = np.asarray(poses, dtype=np.float64)
    if poses.ndim != 3 or poses.shape[2] not in (2, 3):
        raise ShapeMismatch("poses must have shape (count, J, 2 or 3)")
    lines = []
    for i, pose in enumerate(poses):
        rec = {"id": int(i) if ids is None else ids[i],
               "joints": [[float(v) for v in row] for row in pose],
               "layout_id": layout_id}
        lines.append(canonical_json(rec))
    atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_poses(path):
    """Returns (ids list, poses array (count, J, D), layout_id)."""
    ids, joints, layout_id = [], [], None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            ids.append(rec["id"])
            joints.append(rec["joints"])
            layout_id = rec.get("layout_id", layout_id)
    if not joints:
        raise ValueError(f"{path} contains no poses")
    return ids, np.asarray(joints, dtype=np.float64), layout_id


# ---------------------------------------------------------------------------
# seed annotation files


def seed_entry_to_dict(entry: AnnotatedPose2D) -> dict:
    return {
        "image_ref": entry.image_ref,
        "keypoints_px": [[float(x), float(y)] for x, y in entry.keypoints_px],
        "signs": [int(s) for s in entry.signs],
        "layout_id": entry.layout_id,
    }


def seed_entry_from_dict(data: dict) -> AnnotatedPose2D:
    return AnnotatedPose2D(
        keypoints_px=np.asarray(data["keypoints_px"], dtype=np.float64),
        signs=np.asarray(data["signs"], dtype=np.int64),
        image_ref=str(data.get("image_ref", "")),
        layout_id=str(data.get("layout_id", "")),
    )


def write_seed_file(path, entries) -> None:
    payload = [seed_entry_to_dict(e) for e in entries]
    atomic_write(path, (json.dumps(payload, indent=2) + "\n").encode("utf-8"))


def read_seed_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("seed file must be a JSON array")
    return [seed_entry_from_dict(d) for d in data]


def lift_result_to_dict(result: LiftResult) -> dict:
    return {
        "lambda_prop": float(result.lambda_prop),
        "joints_3d": [[float(v) for v in row] for row in result.joints_3d],
        "clamp_flags": [bool(f) for f in result.clamp_flags],
    }


def lift_result_bytes(result: LiftResult) -> bytes:
    """Canonical wire/disk form; byte-identical across the CLI and service."""
    return canonical_json(lift_result_to_dict(result)).encode("utf-8")


# ---------------------------------------------------------------------------
# checkpoints


def _write_array(fh, a: np.ndarray) -> None:
    fh.write(a.astype("<f8").tobytes())


def _read_array(fh, shape) -> np.ndarray:
    n = int(np.prod(shape))
    return np.frombuffer(fh.read(n * 8), dtype="<f8").reshape(shape).astype(np.float64)


def save_checkpoint(path, params: LifterParams, state: OptimizerState | None = None) -> None:
    """Binary little-endian dump: versioned header, weights, optional optimizer."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<IIIId", CHECKPOINT_VERSION, params.joint_count,
                             params.width, 1 if state is not None else 0,
                             params.slope))
        for a in params.arrays():
            _write_array(fh, a)
        if state is not None:
            fh.write(struct.pack("<Qddd", state.step, state.beta1, state.beta2,
                                 state.eps))
            for m in state.m:
                _write_array(fh, m)
            for v in state.v:
                _write_array(fh, v)


def load_checkpoint(path):
    """Returns (LifterParams, OptimizerState or None)."""
    with open(path, "rb") as fh:
        if fh.read(4) != CHECKPOINT_MAGIC:
            raise ValueError("not a checkpoint file")
        version, joints, width, has_opt, slope = struct.unpack("<IIIId", fh.read(24))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        w_in = _read_array(fh, (2 * joints, width))
        b_in = _read_array(fh, (width,))
        blocks = []
        for _ in range(N_BLOCKS):
            blocks.append(tuple(
                _read_array(fh, shape) for shape in
                [(width, width), (width,), (width, width), (width,)]))
        w_out = _read_array(fh, (width, 3 * joints))
        b_out = _read_array(fh, (3 * joints,))
        params = LifterParams(joints, width, slope, w_in, b_in, blocks, w_out, b_out)
        state = None
        if has_opt:
            step, beta1, beta2, eps = struct.unpack("<Qddd", fh.read(32))
            shapes = [a.shape for a in params.arrays()]
            m = [_read_array(fh, s) for s in shapes]
            v = [_read_array(fh, s) for s in shapes]
            state = OptimizerState(m=m, v=v, step=int(step), beta1=beta1,
                                   beta2=beta2, eps=eps)
    return params, state


def write_manifest(path, payload: dict) -> None:
    atomic_write(path, (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode("utf-8"))
