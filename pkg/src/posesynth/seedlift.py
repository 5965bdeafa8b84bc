"""Semi-automatic lifting of annotated 2D keypoints to 3D seed poses.

The image scale (pixels per unit length) is recovered from a rigid head
triangle whose side ratios are known, then joint depths follow from the
Pythagorean relation between each bone's true length and its foreshortened
2D length, walking the kinematic tree.  The human contributes one bit per
joint: whether it sits in front of or behind its parent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .camera import normalize_2d
from .errors import (DatasetTooSmall, MissingSign, NoRealSolution, ShapeMismatch)
from .layouts import JointLayout


@dataclass(frozen=True)
class HeadTriangleSpec:
    """Rigid triple (a, b, c) with side ratios bc/ab and ac/ab.

    ab_meters converts the recovered scale into pixels per meter; when None it
    is read from the layout (requires a to be b's kinematic parent).
    """

    a: int
    b: int
    c: int
    alpha: float = 1.0
    beta: float = 5.0 / 3.0
    ab_meters: float | None = None

    @classmethod
    def for_layout(cls, layout: JointLayout, alpha: float = 1.0,
                   beta: float = 5.0 / 3.0) -> "HeadTriangleSpec":
        tri = layout.head_triangle
        if not tri:
            raise ValueError(f"layout {layout.layout_id} declares no head triangle")
        return cls(a=tri["a"], b=tri["b"], c=tri["c"], alpha=alpha, beta=beta)


@dataclass
class AnnotatedPose2D:
    """2D keypoints plus the per-joint front(+1)/behind(-1) annotations.

    signs has one entry per joint; the root entry is ignored and may be 0.
    """

    keypoints_px: np.ndarray
    signs: np.ndarray
    image_ref: str = ""
    layout_id: str = ""


@dataclass
class LiftResult:
    lambda_prop: float                 # pixels per ab-unit from the scale solve
    d_b: float                         # |depth of b - depth of a|, ab units
    d_c: float
    same_sign: bool                    # do the two triangle depths share a sign
    joints_3d: np.ndarray              # (J, 3) meters, root-centered
    clamp_flags: np.ndarray            # (J,) bool, True where a depth step clamped
    px_per_meter: float
    alternate_lambda: float | None = None  # second feasible scale, if any


@dataclass
class ScaleSolve:
    lambda_prop: float
    d_b: float
    d_c: float
    same_sign: bool
    alternate_lambda: float | None = None
    residuals: tuple = field(default_factory=tuple)


def triangle_residuals(lam, d_b, d_c, same_sign, ab_px, ac_px, bc_px,
                       spec: HeadTriangleSpec):
    """Signed residuals of the three squared-length relations for a candidate
    solution; all three vanish for an exact scale recovery."""
    u = 1.0 / (lam * lam)
    dc = d_c if same_sign else -d_c
    return (d_b * d_b - (1.0 - ab_px * ab_px * u),
            d_c * d_c - (spec.beta ** 2 - ac_px * ac_px * u),
            (d_b - dc) ** 2 - (spec.alpha ** 2 - bc_px * bc_px * u))


def solve_scale(ab_px: float, ac_px: float, bc_px: float,
                spec: HeadTriangleSpec) -> ScaleSolve:
    """Recover the image scale from the three projected triangle sides.

    With ab the unit side, the squared depth differences satisfy
        d_b^2 = 1 - (ab/l)^2,  d_c^2 = beta^2 - (ac/l)^2,
        (d_b - d_c)^2 = alpha^2 - (bc/l)^2,
    which reduce to a quadratic in u = 1/l^2.  Only roots giving real
    non-negative squared depths and positive scale are kept; with two feasible
    roots the larger scale (smaller depths) wins and the runner-up is recorded.
    """
    if min(ab_px, ac_px, bc_px) < 0:
        raise ValueError("pixel distances must be non-negative")
    if max(ab_px, ac_px, bc_px) <= 0:
        raise NoRealSolution("all three projected sides are zero; scale is undefined")
    a2, c2, b2 = ab_px * ab_px, ac_px * ac_px, bc_px * bc_px
    alpha, beta = spec.alpha, spec.beta
    S = 1.0 + beta * beta - alpha * alpha
    T = b2 - a2 - c2
    qa = 4.0 * a2 * c2 - T * T
    qb = -4.0 * (c2 + beta * beta * a2) - 2.0 * S * T
    qc = 4.0 * beta * beta - S * S

    roots = []
    if abs(qa) < 1e-12 * max(abs(qb), abs(qc), 1.0):
        if qb != 0.0:
            roots = [-qc / qb]
        elif abs(qc) < 1e-12:
            # all three coefficients vanish: collinear triangle, any scale fits
            raise NoRealSolution(
                "projected triangle is degenerate (collinear); scale is undetermined")
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0 and disc > -1e-12 * qb * qb:
            disc = 0.0
        if disc >= 0:
            # cancellation-free form: q/qa and qc/q are the two roots
            q = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
            roots = [q / qa]
            if q != 0.0:
                roots.append(qc / q)

    feasible = []
    # wide enough to absorb double-root conditioning (~sqrt(eps)) when the
    # true depths are exactly zero; genuine infeasibility violates by O(0.1+)
    slack = 1e-6 * max(1.0, beta * beta)
    for u in roots:
        if not math.isfinite(u) or u <= 0:
            continue
        if 1.0 - a2 * u < -slack or beta * beta - c2 * u < -slack:
            continue
        feasible.append(u)
    if not feasible:
        raise NoRealSolution(
            "triangle measurements admit no scale with real depths",
            residuals=[(u, 1.0 - a2 * u, beta * beta - c2 * u) for u in roots])

    feasible.sort()  # smallest u = largest scale first
    u = feasible[0]
    lam = 1.0 / math.sqrt(u)
    d_b = math.sqrt(max(1.0 - a2 * u, 0.0))
    d_c = math.sqrt(max(beta * beta - c2 * u, 0.0))
    prod = 0.5 * (S + T * u)
    alt = 1.0 / math.sqrt(feasible[1]) if len(feasible) > 1 else None
    same = prod >= 0.0 or min(d_b, d_c) == 0.0
    return ScaleSolve(
        lambda_prop=lam, d_b=d_b, d_c=d_c, same_sign=same,
        alternate_lambda=alt,
        residuals=triangle_residuals(lam, d_b, d_c, same, ab_px, ac_px, bc_px, spec),
    )


def _resolve_ab_meters(spec: HeadTriangleSpec, layout: JointLayout) -> float:
    if spec.ab_meters is not None:
        return float(spec.ab_meters)
    if int(layout.kinematic_parent[spec.b]) != spec.a:
        raise ValueError(
            "ab_meters required: triangle side a-b is not a bone of the layout")
    return layout.bone_length(spec.b)


def lift(pose: AnnotatedPose2D, layout: JointLayout,
         spec: HeadTriangleSpec | None = None) -> LiftResult:
    """Lift annotated keypoints to a root-centered metric 3D pose.

    After the triangle scale solve fixes pixels-per-meter, in-plane
    coordinates come straight from the pixels and each joint's depth is its
    parent's depth plus sign * sqrt(bone^2 - planar^2).  A negative
    discriminant (2D bone longer than the bone itself allows) clamps the step
    to zero and flags the joint.
    """
    if spec is None:
        spec = HeadTriangleSpec.for_layout(layout)
    J = layout.joint_count
    px = np.asarray(pose.keypoints_px, dtype=np.float64)
    if px.shape != (J, 2):
        raise ShapeMismatch(f"keypoints shape {px.shape}, expected {(J, 2)}")
    signs = np.asarray(pose.signs, dtype=np.int64)
    if signs.shape != (J,):
        raise MissingSign(f"signs shape {signs.shape}, expected ({J},)")
    for c in range(1, J):
        if signs[c] not in (-1, 1):
            raise MissingSign(f"joint {c} ({layout.joint_names[c]}) lacks a +1/-1 sign",
                              joint=c)

    ab = float(np.linalg.norm(px[spec.b] - px[spec.a]))
    ac = float(np.linalg.norm(px[spec.c] - px[spec.a]))
    bc = float(np.linalg.norm(px[spec.c] - px[spec.b]))
    sol = solve_scale(ab, ac, bc, spec)
    px_per_m = sol.lambda_prop / _resolve_ab_meters(spec, layout)

    joints = np.zeros((J, 3))
    joints[:, :2] = (px - px[0]) / px_per_m
    clamp = np.zeros(J, dtype=bool)
    parents = layout.kinematic_parent
    for c in layout.kinematic_order():
        p = int(parents[c])
        planar = np.linalg.norm(px[c] - px[p]) / px_per_m
        bone = layout.bone_length(c)
        disc = bone * bone - planar * planar
        if disc < 0.0:
            disc = 0.0
            clamp[c] = True
        joints[c, 2] = joints[p, 2] + signs[c] * math.sqrt(disc)

    return LiftResult(
        lambda_prop=sol.lambda_prop, d_b=sol.d_b, d_c=sol.d_c,
        same_sign=sol.same_sign, joints_3d=joints, clamp_flags=clamp,
        px_per_meter=px_per_m, alternate_lambda=sol.alternate_lambda,
    )


def signs_from_pose(pose3d: np.ndarray, layout: JointLayout) -> np.ndarray:
    """Ground-truth annotation bits for a known 3D pose (larger z = in front)."""
    signs = np.zeros(layout.joint_count, dtype=np.int64)
    for c in range(1, layout.joint_count):
        p = int(layout.kinematic_parent[c])
        signs[c] = 1 if pose3d[c, 2] >= pose3d[p, 2] else -1
    return signs


def select_seed_sets(dataset_2d, n_candidates: int = 1000, set_size: int = 10,
                     keep: int = 10, rng=None):
    """Pick high-variance candidate seed sets from a 2D pose collection.

    Draws n_candidates random subsets of set_size poses, scores each by total
    per-dimension variance of the normalized keypoints, and returns up to
    `keep` index arrays sorted by descending variance (duplicate subsets
    collapse to one).
    """
    if rng is None:
        rng = np.random.default_rng()
    poses = [normalize_2d(p) for p in dataset_2d]
    m = len(poses)
    if m < set_size:
        raise DatasetTooSmall(f"need at least {set_size} poses, got {m}")
    flat = np.stack([p.ravel() for p in poses])

    seen = {}
    for _ in range(n_candidates):
        idx = np.sort(rng.choice(m, size=set_size, replace=False))
        key = tuple(int(i) for i in idx)
        if key not in seen:
            seen[key] = float(flat[idx].var(axis=0).sum())
    ranked = sorted(seen.items(), key=lambda kv: (-kv[1], kv[0]))
    return [np.asarray(key, dtype=np.int64) for key, _ in ranked[:keep]]


def set_variance(dataset_2d, indices) -> float:
    """Scoring helper matching select_seed_sets; exposed for tests and demos."""
    flat = np.stack([normalize_2d(dataset_2d[i]).ravel() for i in indices])
    return float(flat.var(axis=0).sum())
