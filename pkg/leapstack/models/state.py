"""
Physical state and robot description types.

These are immutable value objects: every simulator and controller call
takes a state and returns a new one. Arrays are numpy float64; quaternions
are stored scalar-last (x, y, z, w) to match scipy's Rotation.

Frames:
- world: z up, gravity along -z, ground plane z = 0
- body: attached to the base CoM; angular velocity is expressed here
- hip: body-aligned frame at each leg's hip offset
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from leapstack.constants import SIDE_SIGNS, RobotConstants

FloatArray = NDArray[np.float64]
BoolArray = NDArray[np.bool_]


def _vec(values: object, shape: tuple[int, ...]) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    if array.shape != shape:
        raise ValueError(f"expected shape {shape}, got {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LegGeometry:
    """
    Link dimensions of a 3-DoF (abduction, hip, knee) leg.

    The abduction offset is unsigned here; kinematics applies the per-leg
    side sign.
    """

    abduction_offset: float = 0.08
    thigh_length: float = 0.213
    calf_length: float = 0.213

    def __post_init__(self) -> None:
        if self.thigh_length <= 0.0 or self.calf_length <= 0.0:
            raise ValueError("thigh_length and calf_length must be > 0")

    @property
    def max_reach(self) -> float:
        """Largest in-plane hip-to-foot distance (straight knee)."""
        return self.thigh_length + self.calf_length

    @property
    def min_reach(self) -> float:
        """Smallest in-plane hip-to-foot distance (fully folded knee)."""
        return abs(self.thigh_length - self.calf_length)


@dataclass(frozen=True, eq=False)
class RobotModel:
    """
    Single-rigid-body robot description with massless legs.

    Attributes:
        mass: Base mass in kg.
        inertia: 3x3 body-frame inertia in kg·m².
        hip_offsets: 4x3 hip positions in the body frame.
        geometry: Leg link dimensions shared by all legs.
        friction_coefficient: Pyramid friction coefficient μ.
        max_normal_force: Per-foot normal force cap in N.
        gravity: Gravitational acceleration magnitude.
    """

    mass: float
    inertia: FloatArray
    hip_offsets: FloatArray
    geometry: LegGeometry
    friction_coefficient: float = 0.6
    max_normal_force: float = 500.0
    gravity: float = RobotConstants.GRAVITY
    nominal_height: float = 0.27
    inertia_inv: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        inertia = _vec(self.inertia, (3, 3))
        if self.mass <= 0.0:
            raise ValueError("mass must be > 0")
        if self.friction_coefficient <= 0.0:
            raise ValueError("friction_coefficient must be > 0")
        if not np.allclose(inertia, inertia.T) or np.min(np.linalg.eigvalsh(inertia)) <= 0.0:
            raise ValueError("inertia must be symmetric positive definite")
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "hip_offsets", _vec(self.hip_offsets, (4, 3)))
        object.__setattr__(self, "inertia_inv", _vec(np.linalg.inv(inertia), (3, 3)))

    @property
    def gravity_vector(self) -> FloatArray:
        """World-frame gravitational acceleration (0, 0, -g)."""
        return np.array([0.0, 0.0, -self.gravity])

    @property
    def weight(self) -> float:
        """m·g in N."""
        return self.mass * self.gravity

    def abduction_points(self) -> FloatArray:
        """
        Body-frame points directly above each foot in the neutral stance.

        Returns:
            4x3 array: hip offset shifted laterally by the signed
            abduction offset.
        """
        points = np.array(self.hip_offsets, dtype=np.float64)
        points[:, 1] += np.asarray(SIDE_SIGNS) * self.geometry.abduction_offset
        return points


@dataclass(frozen=True, eq=False)
class RigidBodyState:
    """
    Base pose and twist plus world-frame foot positions.

    Attributes:
        position: CoM position, world frame (m).
        orientation: Unit quaternion world<-body, (x, y, z, w).
        linear_velocity: CoM velocity, world frame (m/s).
        angular_velocity: Base angular velocity, body frame (rad/s).
        foot_positions: 4x3 foot positions, world frame (m).
        foot_in_contact: Actual contact flags c_i.
        time: Simulation time (s).
        foot_velocities: 4x3 world-frame foot velocities from the last step.

    Example:
        >>> model = default_robot_model()
        >>> state = RigidBodyState.nominal_stand(model)
        >>> round(float(state.position[2]), 2)
        0.27
    """

    position: FloatArray
    orientation: FloatArray
    linear_velocity: FloatArray
    angular_velocity: FloatArray
    foot_positions: FloatArray
    foot_in_contact: BoolArray
    time: float = 0.0
    foot_velocities: FloatArray = field(default_factory=lambda: np.zeros((4, 3)))

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", _vec(self.position, (3,)))
        object.__setattr__(self, "orientation", _vec(self.orientation, (4,)))
        object.__setattr__(self, "linear_velocity", _vec(self.linear_velocity, (3,)))
        object.__setattr__(self, "angular_velocity", _vec(self.angular_velocity, (3,)))
        object.__setattr__(self, "foot_positions", _vec(self.foot_positions, (4, 3)))
        object.__setattr__(self, "foot_velocities", _vec(self.foot_velocities, (4, 3)))
        contact = np.array(self.foot_in_contact, dtype=np.bool_)
        if contact.shape != (4,):
            raise ValueError(f"expected 4 contact flags, got shape {contact.shape}")
        contact.setflags(write=False)
        object.__setattr__(self, "foot_in_contact", contact)

    @classmethod
    def nominal_stand(
        cls, model: RobotModel, height: float | None = None, yaw: float = 0.0
    ) -> RigidBodyState:
        """
        Standing state: level base, zero velocity, feet pinned under the hips.

        Args:
            model: Robot description.
            height: Base height; defaults to the model's nominal height.
            yaw: Initial heading in rad.
        """
        z = model.nominal_height if height is None else height
        rotation = Rotation.from_euler("z", yaw)
        position = np.array([0.0, 0.0, z])
        feet = position + rotation.apply(model.abduction_points())
        feet[:, 2] = 0.0
        return cls(
            position=position,
            orientation=rotation.as_quat(),
            linear_velocity=np.zeros(3),
            angular_velocity=np.zeros(3),
            foot_positions=feet,
            foot_in_contact=np.ones(4, dtype=bool),
        )

    @property
    def rotation(self) -> Rotation:
        """Orientation as a scipy Rotation (world<-body)."""
        return Rotation.from_quat(self.orientation)

    @property
    def rotation_matrix(self) -> FloatArray:
        """3x3 world<-body rotation matrix."""
        return np.asarray(self.rotation.as_matrix())

    @property
    def rpy(self) -> FloatArray:
        """Roll, pitch, yaw (extrinsic x-y-z) in rad."""
        return np.asarray(self.rotation.as_euler("xyz"))

    @property
    def yaw(self) -> float:
        return float(self.rpy[2])

    @property
    def up_vector(self) -> FloatArray:
        """Body z axis expressed in the world frame."""
        return self.rotation_matrix[:, 2]

    @property
    def angular_velocity_world(self) -> FloatArray:
        return self.rotation_matrix @ self.angular_velocity

    def feet_relative(self) -> FloatArray:
        """Foot positions relative to the CoM, world frame."""
        return self.foot_positions - self.position

    def feet_in_body(self) -> FloatArray:
        """Foot positions relative to the CoM, body frame."""
        return self.feet_relative() @ self.rotation_matrix

    def replace(self, **changes: object) -> RigidBodyState:
        """Copy with fields replaced."""
        return replace(self, **changes)  # type: ignore[arg-type]

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.position))
            and np.all(np.isfinite(self.orientation))
            and np.all(np.isfinite(self.linear_velocity))
            and np.all(np.isfinite(self.angular_velocity))
            and np.all(np.isfinite(self.foot_positions))
        )


@dataclass(frozen=True, eq=False)
class FootForces:
    """
    Per-foot ground reaction forces in the world frame.

    Attributes:
        forces: 4x3 array, zero rows for swing feet.
        singular: Legs whose Jacobian was singular (force zeroed).
    """

    forces: FloatArray
    singular: BoolArray = field(default_factory=lambda: np.zeros(4, dtype=bool))

    def __post_init__(self) -> None:
        object.__setattr__(self, "forces", _vec(self.forces, (4, 3)))
        singular = np.array(self.singular, dtype=np.bool_)
        singular.setflags(write=False)
        object.__setattr__(self, "singular", singular)

    @classmethod
    def zeros(cls) -> FootForces:
        return cls(forces=np.zeros((4, 3)))

    @property
    def total(self) -> FloatArray:
        """Sum of all foot forces."""
        return np.asarray(self.forces.sum(axis=0))

    @property
    def any_singular(self) -> bool:
        return bool(np.any(self.singular))


def default_robot_model() -> RobotModel:
    """Robot model with the default 15 kg configuration."""
    return RobotModel(
        mass=15.0,
        inertia=np.diag([0.08, 0.22, 0.26]),
        hip_offsets=np.array(
            [
                [0.1881, -0.04675, 0.0],
                [0.1881, 0.04675, 0.0],
                [-0.1881, -0.04675, 0.0],
                [-0.1881, 0.04675, 0.0],
            ]
        ),
        geometry=LegGeometry(),
    )
