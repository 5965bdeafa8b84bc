"""Bidirectional conversion between global Cartesian joints and per-joint
local spherical values.

Each non-root joint c stores (rho, theta, phi) expressed in a frame anchored
at its kinematic parent: the frame's z axis points from the grandparent to the
parent, x is the world-up vector orthogonalized against z, and y = z cross x.
Bones leaving the root have no grandparent and use the fixed global frame, so
their angles double as the pose's global orientation.

Conventions (documented, not configurable):
  world up      = +y
  fallback axis = +x, used when a bone is parallel to world up
  offset        = rho * (sin(theta)cos(phi) x + sin(theta)sin(phi) y + cos(theta) z)
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateFrame, RangeViolation, ShapeMismatch
from .layouts import JointLayout, COMPONENT_NAMES

WORLD_UP = np.array([0.0, 1.0, 0.0])
FALLBACK_AXIS = np.array([1.0, 0.0, 0.0])

# Identity frame used for bones whose parent is the root joint.
GLOBAL_FRAME = np.eye(3)

_MIN_BONE = 1e-12
_PARALLEL_TOL = 1e-6  # radians
_RANGE_SLACK = 1e-9


def local_frame(parent_pos, grandparent_pos, reference_up=WORLD_UP) -> np.ndarray:
    """Right-handed orthonormal frame for the grandparent->parent branch.

    Returns a (3, 3) array whose rows are the x, y, z axes.  z points from the
    grandparent to the parent; x is reference_up orthogonalized against z.

    Raises DegenerateFrame when the branch is shorter than 1e-12 or the
    reference axis is parallel to it within 1e-6 rad; the conversion routines
    catch the latter and retry with the fallback axis.
    """
    d = np.asarray(parent_pos, dtype=np.float64) - np.asarray(grandparent_pos, dtype=np.float64)
    n = np.linalg.norm(d)
    if n < _MIN_BONE:
        raise DegenerateFrame("parent and grandparent coincide")
    z = d / n
    up = np.asarray(reference_up, dtype=np.float64)
    rej = up - np.dot(up, z) * z
    rn = np.linalg.norm(rej)
    if rn <= _PARALLEL_TOL * np.linalg.norm(up):
        raise DegenerateFrame("reference axis parallel to the branch")
    x = rej / rn
    y = np.cross(z, x)
    return np.stack([x, y, z])


def _branch_frame(parent_pos, grandparent_pos, joint=None) -> np.ndarray:
    try:
        return local_frame(parent_pos, grandparent_pos)
    except DegenerateFrame as err:
        if "coincide" in str(err):
            raise DegenerateFrame(str(err), joint=joint) from None
        return local_frame(parent_pos, grandparent_pos, FALLBACK_AXIS)


def _check_range(layout: JointLayout, joint: int, component: int, value: float):
    lo, hi = layout.limits(joint, component)
    slack = _RANGE_SLACK * max(1.0, abs(lo), abs(hi))
    if value < lo - slack or value > hi + slack:
        raise RangeViolation(
            f"{COMPONENT_NAMES[component]}={value:.6g} outside [{lo:.6g}, {hi:.6g}] "
            f"for joint {joint} ({layout.joint_names[joint]})",
            joint=joint,
            component=component,
        )


def spherical_to_cart(params: np.ndarray, layout: JointLayout, validate: bool = True) -> np.ndarray:
    """Place all joints from local spherical values.

    params has shape (J-1, 3), one (rho, theta, phi) row per non-root joint.
    Returns a (J, 3) pose with the root at the origin.  Raises RangeViolation
    if a value lies outside the layout's limit interval (1e-9 slack).
    """
    params = np.asarray(params, dtype=np.float64)
    J = layout.joint_count
    if params.shape != (J - 1, 3):
        raise ShapeMismatch(f"params shape {params.shape}, expected {(J - 1, 3)}")
    if validate:
        for j in range(1, J):
            for k in range(3):
                _check_range(layout, j, k, params[j - 1, k])

    pose = np.zeros((J, 3))
    parents = layout.kinematic_parent
    for c in layout.kinematic_order():
        p = int(parents[c])
        if p == 0:
            frame = GLOBAL_FRAME
        else:
            g = int(parents[p])
            frame = _branch_frame(pose[p], pose[g], joint=c)
        rho, theta, phi = params[c - 1]
        st = np.sin(theta)
        offset = rho * (st * np.cos(phi) * frame[0]
                        + st * np.sin(phi) * frame[1]
                        + np.cos(theta) * frame[2])
        pose[c] = pose[p] + offset
    return pose


def cart_to_spherical(pose: np.ndarray, layout: JointLayout) -> np.ndarray:
    """Inverse of spherical_to_cart; reads per-joint local values off a pose.

    The pose may sit anywhere in space (only relative positions are used).
    Raises DegenerateFrame with the joint index when a bone collapses.
    """
    pose = np.asarray(pose, dtype=np.float64)
    J = layout.joint_count
    if pose.shape != (J, 3):
        raise ShapeMismatch(f"pose shape {pose.shape}, expected {(J, 3)}")

    params = np.zeros((J - 1, 3))
    parents = layout.kinematic_parent
    for c in range(1, J):
        p = int(parents[c])
        if p == 0:
            frame = GLOBAL_FRAME
        else:
            g = int(parents[p])
            frame = _branch_frame(pose[p], pose[g], joint=c)
        v = pose[c] - pose[p]
        rho = np.linalg.norm(v)
        if rho < _MIN_BONE:
            raise DegenerateFrame(f"joint {c} coincides with its parent", joint=c)
        vx, vy, vz = frame @ v
        theta = np.arctan2(np.hypot(vx, vy), vz)
        phi = np.arctan2(vy, vx)
        params[c - 1] = (rho, theta, phi)
    return params


def template_params(layout: JointLayout) -> np.ndarray:
    """Nominal parameters: every rho at its bone length, both angles zero."""
    p = np.zeros((layout.joint_count - 1, 3))
    p[:, 0] = layout.bone_lengths
    return p


def random_params(layout: JointLayout, rng, count=None) -> np.ndarray:
    """Uniform draws inside the limit intervals; handy for tests and demos."""
    lo = layout.range_limits[..., 0]
    hi = layout.range_limits[..., 1]
    if count is None:
        return rng.uniform(lo, hi)
    return rng.uniform(lo, hi, size=(count,) + lo.shape)


def angle_delta(a, b):
    """Signed difference a-b wrapped to (-pi, pi]; compares angles on the circle."""
    return (np.asarray(a) - np.asarray(b) + np.pi) % (2.0 * np.pi) - np.pi
