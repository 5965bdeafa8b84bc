"""Skeleton layouts: joint naming, kinematic and dependency trees, bone lengths
and per-joint limit intervals.

A layout carries two trees over the same joints.  The kinematic tree is the
anatomical parent-child connectivity used to place joints geometrically.  The
dependency tree states which joint's local values each joint is conditioned on
when sampling; it usually follows the kinematic tree but may reroute a few
joints (e.g. a shoulder conditioned on the same-side hip).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import LayoutError

LAYOUT_FORMAT_VERSION = 1

# Component order used for every per-joint value triple in the package.
RHO, THETA, PHI = 0, 1, 2
COMPONENT_NAMES = ("rho", "theta", "phi")


@dataclass(frozen=True)
class JointLayout:
    """Immutable skeleton description.

    Parameters
    ----------
    layout_id: short identifier, e.g. ``"h36m17"``.
    joint_names: length-J list, joint 0 is the pelvis/root.
    kinematic_parent: length-J int array, -1 for the root.
    markov_parent: length-J int array, -1 for the root; the conditioning tree.
    bone_lengths: length J-1, meters, entry i is the bone ending at joint i+1.
    range_limits: (J-1, 3, 2) array of closed [lo, hi] intervals per non-root
        joint for (rho, theta, phi).
    head_triangle: indices (a, b, c) of the rigid head triple used for scale
        recovery; b must be the kinematic child of a.
    """

    layout_id: str
    joint_names: tuple
    kinematic_parent: np.ndarray
    markov_parent: np.ndarray
    bone_lengths: np.ndarray
    range_limits: np.ndarray
    head_triangle: dict = field(default_factory=dict)

    @property
    def joint_count(self) -> int:
        return len(self.joint_names)

    @property
    def anchor_joint(self) -> int:
        """Lowest-index joint conditioned directly on the root level."""
        children = np.flatnonzero(self.markov_parent == 0)
        return int(children[0])

    def kinematic_order(self):
        """Non-root joint indices ordered so parents precede children."""
        return _topological_order(self.kinematic_parent)

    def markov_order(self):
        return _topological_order(self.markov_parent)

    def bone_length(self, joint: int) -> float:
        return float(self.bone_lengths[joint - 1])

    def limits(self, joint: int, component: int) -> tuple:
        lo, hi = self.range_limits[joint - 1, component]
        return float(lo), float(hi)

    def to_dict(self) -> dict:
        return {
            "format_version": LAYOUT_FORMAT_VERSION,
            "layout_id": self.layout_id,
            "joint_names": list(self.joint_names),
            "kinematic_parent": [int(p) for p in self.kinematic_parent],
            "markov_parent": [int(p) for p in self.markov_parent],
            "bone_lengths": [float(b) for b in self.bone_lengths],
            "range_limits": [
                {
                    COMPONENT_NAMES[k]: [float(lo), float(hi)]
                    for k, (lo, hi) in enumerate(self.range_limits[j])
                }
                for j in range(self.joint_count - 1)
            ],
            "head_triangle": {k: int(v) for k, v in self.head_triangle.items()},
        }

    def content_hash(self) -> str:
        """sha256 over the canonical serialized form; ties snapshots to layouts."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _topological_order(parents: np.ndarray):
    order = []
    placed = {0}
    pending = [j for j in range(1, len(parents))]
    while pending:
        progressed = False
        rest = []
        for j in pending:
            if int(parents[j]) in placed:
                order.append(j)
                placed.add(j)
                progressed = True
            else:
                rest.append(j)
        pending = rest
        if not progressed:
            raise LayoutError("parent array is not a tree rooted at joint 0")
    return order


def validate_layout(layout: JointLayout) -> JointLayout:
    """Check all structural invariants, raising LayoutError on the first failure.

    Returns the layout unchanged so calls can be inlined.
    """
    J = layout.joint_count
    if J < 3:
        raise LayoutError("need at least 3 joints")
    for name, parents in (("kinematic", layout.kinematic_parent),
                          ("markov", layout.markov_parent)):
        if len(parents) != J:
            raise LayoutError(f"{name}_parent has {len(parents)} entries, expected {J}")
        if parents[0] != -1:
            raise LayoutError(f"{name}_parent of joint 0 must be -1")
        for j in range(1, J):
            p = int(parents[j])
            if not 0 <= p < J:
                raise LayoutError(f"{name}_parent[{j}]={p} out of range")
        _topological_order(parents)  # raises on cycles / unreachable joints

    if len(layout.bone_lengths) != J - 1:
        raise LayoutError("bone_lengths must have J-1 entries")
    if np.any(layout.bone_lengths <= 0):
        raise LayoutError("all bone lengths must be positive")

    if layout.range_limits.shape != (J - 1, 3, 2):
        raise LayoutError("range_limits must have shape (J-1, 3, 2)")
    lo = layout.range_limits[..., 0]
    hi = layout.range_limits[..., 1]
    if np.any(hi <= lo):
        raise LayoutError("every limit interval must be non-empty")
    if np.any(lo[:, RHO] < 0):
        raise LayoutError("rho limits must be non-negative")
    if np.any(lo[:, THETA] < 0) or np.any(hi[:, THETA] > np.pi + 1e-12):
        raise LayoutError("theta limits must lie inside [0, pi]")
    if np.any(lo[:, PHI] < -np.pi - 1e-12) or np.any(hi[:, PHI] > np.pi + 1e-12):
        raise LayoutError("phi limits must lie inside [-pi, pi]")

    tri = layout.head_triangle
    if tri:
        for key in ("a", "b", "c"):
            if key not in tri or not 0 <= int(tri[key]) < J:
                raise LayoutError(f"head_triangle.{key} missing or out of range")
        if len({int(tri["a"]), int(tri["b"]), int(tri["c"])}) != 3:
            raise LayoutError("head_triangle joints must be distinct")
    return layout


def layout_from_dict(data: dict) -> JointLayout:
    if data.get("format_version") != LAYOUT_FORMAT_VERSION:
        raise LayoutError(f"unsupported layout format_version {data.get('format_version')!r}")
    names = tuple(data["joint_names"])
    J = len(names)
    limits = np.zeros((J - 1, 3, 2))
    for j, entry in enumerate(data["range_limits"]):
        for k, comp in enumerate(COMPONENT_NAMES):
            limits[j, k] = entry[comp]
    layout = JointLayout(
        layout_id=str(data["layout_id"]),
        joint_names=names,
        kinematic_parent=np.asarray(data["kinematic_parent"], dtype=np.int64),
        markov_parent=np.asarray(data["markov_parent"], dtype=np.int64),
        bone_lengths=np.asarray(data["bone_lengths"], dtype=np.float64),
        range_limits=limits,
        head_triangle={k: int(v) for k, v in data.get("head_triangle", {}).items()},
    )
    return validate_layout(layout)


def load_layout_file(path) -> JointLayout:
    with open(path, "r", encoding="utf-8") as fh:
        return layout_from_dict(json.load(fh))


def save_layout_file(layout: JointLayout, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(layout.to_dict(), fh, indent=2)
        fh.write("\n")


_BUILTIN_IDS = ("h36m17", "smpl24")
_cache: dict = {}


def builtin_layout_ids():
    return list(_BUILTIN_IDS)


def get_layout(layout_id: str) -> JointLayout:
    """Load a built-in layout by id (cached)."""
    if layout_id not in _cache:
        if layout_id not in _BUILTIN_IDS:
            raise LayoutError(f"unknown layout {layout_id!r}; built-ins: {_BUILTIN_IDS}")
        ref = resources.files("posesynth").joinpath("data", f"{layout_id}.json")
        _cache[layout_id] = layout_from_dict(json.loads(ref.read_text(encoding="utf-8")))
    return _cache[layout_id]


def resolve_layout(spec: str) -> JointLayout:
    """Accept either a built-in id or a path to a layout file."""
    if spec in _BUILTIN_IDS:
        return get_layout(spec)
    if not os.path.exists(spec):
        raise ValueError(
            f"unknown layout {spec!r}: not a built-in id "
            f"({', '.join(sorted(_BUILTIN_IDS))}) and no such file")
    return load_layout_file(spec)
