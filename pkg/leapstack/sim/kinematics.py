"""
Analytic kinematics of the 3-DoF leg (abduction, hip pitch, knee).

Positions are in the hip frame: body-aligned, origin at the leg's hip
offset. Joint convention:
- q = 0 puts the leg straight down with the foot at
  (0, s·abduction_offset, -(thigh + calf)), s = +1 left, -1 right
- positive hip pitch swings the foot backward (-x)
- the knee bends backward, so knee angles lie in [-π, 0]

Only the knee-backward IK branch is returned.

Example:
    >>> geo = LegGeometry()
    >>> forward(np.zeros(3), geo, side=1.0).round(3).tolist()
    [0.0, 0.08, -0.426]
"""

from __future__ import annotations

import logging
import math

import numpy as np

from leapstack.constants import SIDE_SIGNS, RobotConstants
from leapstack.exceptions import OutOfReachError, SingularJacobianError
from leapstack.models.state import FloatArray, LegGeometry, RigidBodyState, RobotModel

logger = logging.getLogger(__name__)

_REACH_TOLERANCE = 1e-12
_CLIP_MARGIN = 1e-9


def forward(q: FloatArray, geo: LegGeometry, side: float) -> FloatArray:
    """
    Foot position in the hip frame.

    Args:
        q: Joint angles (abduction, hip, knee) in rad.
        geo: Leg geometry.
        side: +1 for left legs, -1 for right legs.

    Returns:
        3-vector foot position.
    """
    a, h, k = (float(v) for v in q)
    l1, l2 = geo.thigh_length, geo.calf_length
    y0 = side * geo.abduction_offset
    x = -l1 * math.sin(h) - l2 * math.sin(h + k)
    z_leg = -l1 * math.cos(h) - l2 * math.cos(h + k)
    ca, sa = math.cos(a), math.sin(a)
    return np.array([x, ca * y0 - sa * z_leg, sa * y0 + ca * z_leg])


def jacobian(q: FloatArray, geo: LegGeometry, side: float) -> FloatArray:
    """
    Analytic Jacobian d(foot)/dq of forward().

    Returns:
        3x3 matrix; rows are x, y, z and columns abduction, hip, knee.
    """
    a, h, k = (float(v) for v in q)
    l1, l2 = geo.thigh_length, geo.calf_length
    y0 = side * geo.abduction_offset
    z_leg = -l1 * math.cos(h) - l2 * math.cos(h + k)
    dz_dh = l1 * math.sin(h) + l2 * math.sin(h + k)
    dz_dk = l2 * math.sin(h + k)
    ca, sa = math.cos(a), math.sin(a)
    return np.array(
        [
            [0.0, -l1 * math.cos(h) - l2 * math.cos(h + k), -l2 * math.cos(h + k)],
            [-sa * y0 - ca * z_leg, -sa * dz_dh, -sa * dz_dk],
            [ca * y0 - sa * z_leg, ca * dz_dh, ca * dz_dk],
        ]
    )


def is_singular(jac: FloatArray) -> bool:
    """True when |det(J)| is below the singularity threshold."""
    return abs(float(np.linalg.det(jac))) < RobotConstants.SINGULAR_DET


def _leg_plane(p: FloatArray, geo: LegGeometry, side: float) -> tuple[float, float, float]:
    """Split a hip-frame point into (in-plane z, y0, squared yz radius)."""
    y0 = side * geo.abduction_offset
    r_yz_sq = float(p[1] ** 2 + p[2] ** 2)
    z_leg = -math.sqrt(max(r_yz_sq - y0 * y0, 0.0))
    return z_leg, y0, r_yz_sq


def inverse(p: FloatArray, geo: LegGeometry, side: float) -> FloatArray:
    """
    Joint angles placing the foot at p (knee-backward branch).

    Args:
        p: Foot position in the hip frame.
        geo: Leg geometry.
        side: +1 for left legs, -1 for right legs.

    Returns:
        Joint angles (abduction, hip, knee).

    Raises:
        OutOfReachError: If p is outside the reachable annulus.
    """
    x, y, z = (float(v) for v in p)
    l1, l2 = geo.thigh_length, geo.calf_length
    z_leg, y0, r_yz_sq = _leg_plane(p, geo, side)
    if r_yz_sq < y0 * y0 - _REACH_TOLERANCE:
        raise OutOfReachError(
            "Foot target inside the abduction offset",
            distance=math.sqrt(r_yz_sq),
            min_reach=abs(y0),
            max_reach=geo.max_reach,
        )

    r = math.hypot(x, z_leg)
    if r > geo.max_reach + _REACH_TOLERANCE or r < geo.min_reach - _REACH_TOLERANCE:
        raise OutOfReachError(distance=r, min_reach=geo.min_reach, max_reach=geo.max_reach)

    abduction = math.atan2(z, y) - math.atan2(z_leg, y0)
    abduction = math.atan2(math.sin(abduction), math.cos(abduction))

    cos_knee = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    knee = -math.acos(min(1.0, max(-1.0, cos_knee)))
    a_coef = l1 + l2 * math.cos(knee)
    b_coef = l2 * math.sin(knee)
    hip = math.atan2(-x, -z_leg) - math.atan2(b_coef, a_coef)
    return np.array([abduction, hip, knee])


def clip_to_workspace(
    p: FloatArray, geo: LegGeometry, side: float, margin: float = _CLIP_MARGIN
) -> tuple[FloatArray, bool]:
    """
    Project a hip-frame target onto the reachable workspace.

    The in-plane (x, z) vector is rescaled along its own direction; the
    abduction plane is kept.

    Returns:
        (clipped point, whether clipping was needed)
    """
    point = np.asarray(p, dtype=np.float64)
    z_leg, y0, r_yz_sq = _leg_plane(point, geo, side)
    r = math.hypot(float(point[0]), z_leg)
    lower = geo.min_reach + margin
    upper = geo.max_reach - margin
    if lower <= r <= upper and r_yz_sq >= y0 * y0:
        return point, False

    abduction = math.atan2(float(point[2]), float(point[1])) - math.atan2(z_leg, y0)
    target_r = min(max(r, lower), upper)
    if r > 0.0:
        x_new = float(point[0]) * target_r / r
        z_new = z_leg * target_r / r
    else:
        x_new, z_new = 0.0, -target_r
    ca, sa = math.cos(abduction), math.sin(abduction)
    clipped = np.array([x_new, ca * y0 - sa * z_new, sa * y0 + ca * z_new])
    logger.debug("Clipped foot target %s -> %s", point, clipped)
    return clipped, True


def foot_in_hip_frame(
    foot_world: FloatArray,
    base_position: FloatArray,
    rotation_matrix: FloatArray,
    hip_offset: FloatArray,
) -> FloatArray:
    """Express a world-frame foot position in a leg's hip frame."""
    return np.asarray(rotation_matrix.T @ (foot_world - base_position) - hip_offset)


def joint_angles(state: RigidBodyState, model: RobotModel) -> FloatArray:
    """
    Recover all joint angles from the base pose and foot positions.

    Feet outside the workspace are clipped before solving.

    Returns:
        4x3 array of joint angles.
    """
    rot = state.rotation_matrix
    q = np.zeros((4, 3))
    for leg, side in enumerate(SIDE_SIGNS):
        p_hip = foot_in_hip_frame(
            state.foot_positions[leg], state.position, rot, model.hip_offsets[leg]
        )
        p_hip, _ = clip_to_workspace(p_hip, model.geometry, side)
        q[leg] = inverse(p_hip, model.geometry, side)
    return q


def leg_jacobians(q: FloatArray, model: RobotModel) -> FloatArray:
    """Stack of the four leg Jacobians, shape (4, 3, 3)."""
    return np.stack(
        [jacobian(q[leg], model.geometry, side) for leg, side in enumerate(SIDE_SIGNS)]
    )


def require_nonsingular(jac: FloatArray, leg: int) -> None:
    """
    Raise if a leg Jacobian is singular.

    Raises:
        SingularJacobianError: If |det(J)| < 1e-8.
    """
    det = float(np.linalg.det(jac))
    if abs(det) < RobotConstants.SINGULAR_DET:
        raise SingularJacobianError(leg=leg, determinant=det)
