"""Random view rotations and the scaleless orthographic projection.

The virtual camera looks down the global z axis: projecting drops the z
coordinate, then divides by the Frobenius norm so every projected pose has
unit scale.  Views are built as yaw about the vertical axis with small tilt
noise, and the tilt noise grows over a training epoch (annealed schedule).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePose

_EPS = 1e-12


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def sample_rotation(sigma_azimuth, sigma_tilt, rng) -> np.ndarray:
    """One random view: R = Ry(yaw) @ Rx(tilt) @ Rz(roll).

    yaw ~ N(0, sigma_azimuth^2); tilt and roll ~ N(0, sigma_tilt^2).
    Orthonormal by construction.  Draw order (yaw, tilt, roll) is fixed so a
    seeded rng reproduces the stream.
    """
    yaw = rng.normal(0.0, sigma_azimuth) if sigma_azimuth > 0 else 0.0
    tilt = rng.normal(0.0, sigma_tilt) if sigma_tilt > 0 else 0.0
    roll = rng.normal(0.0, sigma_tilt) if sigma_tilt > 0 else 0.0
    return rot_y(yaw) @ rot_x(tilt) @ rot_z(roll)


def euler_yxz(rotation: np.ndarray):
    """Recover (yaw, tilt, roll) from a Ry@Rx@Rz product; test oracle."""
    r = np.asarray(rotation)
    tilt = math.asin(max(-1.0, min(1.0, -r[1, 2])))
    yaw = math.atan2(r[0, 2], r[2, 2])
    roll = math.atan2(r[1, 0], r[1, 1])
    return yaw, tilt, roll


def rotate_pose(pose: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """Apply a rotation to a (J, 3) pose stored with joints as rows."""
    return pose @ rotation.T


def project(pose: np.ndarray) -> np.ndarray:
    """Scaleless orthographic projection of a root-centered (J, 3) pose.

    Drops z and divides by the Frobenius norm of the (J, 2) result, so the
    output is invariant to uniform scaling of the input.
    """
    xy = np.asarray(pose, dtype=np.float64)[:, :2]
    n = np.linalg.norm(xy)
    if n <= _EPS:
        raise DegeneratePose("pose projects to a single point")
    return xy / n


def normalize_2d(points: np.ndarray) -> np.ndarray:
    """Root-center a (J, 2) keypoint set and scale to unit Frobenius norm.

    Idempotent; used to put dataset keypoints and projections on the same
    footing before any distance computation.
    """
    p = np.asarray(points, dtype=np.float64)
    p = p - p[0]
    n = np.linalg.norm(p)
    if n <= _EPS:
        raise DegeneratePose("keypoints collapse to a single point")
    return p / n


def normalize_3d(pose: np.ndarray) -> np.ndarray:
    """Root-center a (J, 3) pose and scale to unit Frobenius norm."""
    p = np.asarray(pose, dtype=np.float64)
    p = p - p[0]
    n = np.linalg.norm(p)
    if n <= _EPS:
        raise DegeneratePose("pose collapses to a single point")
    return p / n


@dataclass
class ViewSchedule:
    """Per-epoch annealing of the view-noise standard deviations.

    sigma(b) = sigma0 + increment * sum_{k=1}^{b-1} 1/(2k) for batch b >= 1,
    i.e. batch 1 uses sigma0 and the deviation grows by increment/(2b) after
    batch b.  The counter resets every epoch.
    """

    views: int = 4
    sigma_azimuth0: float = math.pi
    sigma_tilt0: float = 0.05
    azimuth_increment: float = 0.0
    tilt_increment: float = 0.05


def _harmonic_half(b: int) -> float:
    return sum(1.0 / (2.0 * k) for k in range(1, b))


def view_sigma(schedule: ViewSchedule, batch_index: int):
    """Noise deviations (sigma_azimuth, sigma_tilt) for a 1-based batch index."""
    if batch_index < 1:
        raise ValueError("batch_index is 1-based")
    h = _harmonic_half(batch_index)
    return (schedule.sigma_azimuth0 + schedule.azimuth_increment * h,
            schedule.sigma_tilt0 + schedule.tilt_increment * h)
