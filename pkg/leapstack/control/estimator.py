"""
Kalman filter for base position and linear velocity.

State x = [p, v] (world). Prediction uses the accelerometer as a control
input with the same semi-implicit update as the simulator:

    v' = v + a·dt,   p' = p + v'·dt

Each stance foot gives a base-position pseudo-measurement
anchor − R·r, where the anchor is the foot's world position latched at
touchdown and r is the CoM-to-foot vector from leg kinematics (body frame
rotated to world). Orientation and angular velocity are taken from the
simulated IMU directly.

The filter's noise model (accelerometer and foot σ) is always active;
injecting actual sensor noise is a separate switch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from filterpy.common import Q_discrete_white_noise
from filterpy.kalman.kalman_filter import predict as kf_predict
from filterpy.kalman.kalman_filter import update as kf_update
from scipy.spatial.transform import Rotation

from leapstack.config import EstimatorConfig
from leapstack.constants import RobotConstants
from leapstack.models.state import BoolArray, FloatArray, RigidBodyState

logger = logging.getLogger(__name__)

_MIN_STD = 1e-4


@dataclass(frozen=True, eq=False)
class EstimatorState:
    """Filter mean [p, v] and 6x6 covariance."""

    mean: FloatArray
    covariance: FloatArray

    @property
    def position(self) -> FloatArray:
        return self.mean[:3]

    @property
    def velocity(self) -> FloatArray:
        return self.mean[3:]

    @classmethod
    def from_truth(cls, state: RigidBodyState, initial_std: float) -> EstimatorState:
        return cls(
            mean=np.concatenate([state.position, state.linear_velocity]),
            covariance=np.eye(6) * initial_std**2,
        )


def transition(dt: float) -> tuple[FloatArray, FloatArray]:
    """State transition F and control matrix B for step dt."""
    f = np.eye(6)
    f[:3, 3:] = dt * np.eye(3)
    b = np.vstack([dt * dt * np.eye(3), dt * np.eye(3)])
    return f, b


def process_noise(dt: float, accel_std: float) -> FloatArray:
    """White-noise-acceleration Q ordered [p, v]."""
    return np.asarray(
        Q_discrete_white_noise(
            dim=2, dt=dt, var=accel_std**2, block_size=3, order_by_dim=False
        )
    )


def _symmetrize(p: FloatArray) -> FloatArray:
    return np.asarray(0.5 * (p + p.T))


def predict(
    est: EstimatorState, accel_meas: FloatArray, dt: float, q: FloatArray
) -> EstimatorState:
    """
    Propagate with a measured world-frame acceleration.

    Args:
        est: Current estimate.
        accel_meas: Coordinate acceleration (gravity included), world frame.
        dt: Step (s), > 0.
        q: 6x6 process noise.

    Returns:
        Predicted estimate; covariance F P Fᵀ + Q, symmetrized.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    f, b = transition(dt)
    mean, cov = kf_predict(
        est.mean, est.covariance, F=f, Q=q, u=np.asarray(accel_meas, dtype=np.float64), B=b
    )
    return EstimatorState(mean=np.asarray(mean, dtype=np.float64), covariance=_symmetrize(cov))


def update(
    est: EstimatorState,
    base_positions: FloatArray,
    contacts: BoolArray,
    r: float | FloatArray,
) -> EstimatorState:
    """
    Correct with per-foot base-position measurements.

    Args:
        est: Predicted estimate.
        base_positions: 4x3 base positions implied by each foot.
        contacts: Feet whose measurement is valid.
        r: Per-axis measurement variance, scalar or 3x3.

    Returns:
        Corrected estimate, or est unchanged when no foot is in contact.
    """
    legs = [leg for leg in range(4) if contacts[leg]]
    if not legs:
        return est
    z = np.concatenate([np.asarray(base_positions[leg], dtype=np.float64) for leg in legs])
    h = np.vstack([np.hstack([np.eye(3), np.zeros((3, 3))]) for _ in legs])
    block = np.eye(3) * r if np.isscalar(r) else np.asarray(r)
    r_full = np.kron(np.eye(len(legs)), block)
    mean, cov = kf_update(est.mean, est.covariance, z, r_full, H=h)
    return EstimatorState(mean=np.asarray(mean, dtype=np.float64), covariance=_symmetrize(cov))


class BaseStateEstimator:
    """
    Per-rollout estimator: owns the filter state and stance-foot anchors.

    Args:
        config: Noise settings.
        dt: Filter step (s).
        seed: Seed of the injected sensor noise.
    """

    def __init__(
        self, config: EstimatorConfig, dt: float = RobotConstants.CONTROL_DT, seed: int = 0
    ) -> None:
        self._config = config
        self._dt = dt
        self._rng = np.random.default_rng(seed)
        self._q = process_noise(dt, max(config.accel_std, _MIN_STD))
        self._r = max(config.foot_std, _MIN_STD) ** 2
        self._est: EstimatorState | None = None
        self._anchors = np.zeros((4, 3))
        self._anchored = np.zeros(4, dtype=bool)

    @property
    def estimate(self) -> EstimatorState:
        if self._est is None:
            raise RuntimeError("Estimator not reset")
        return self._est

    def reset(self, state: RigidBodyState, seed: int | None = None) -> RigidBodyState:
        """Initialize at the true state; anchors at the true stance feet."""
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        self._est = EstimatorState.from_truth(state, self._config.initial_std)
        self._anchors = np.array(state.foot_positions)
        self._anchored = np.array(state.foot_in_contact, dtype=bool)
        return state

    def _noise(self, std: float, size: int = 3) -> FloatArray:
        if not self._config.inject_noise or std <= 0.0:
            return np.zeros(size)
        return np.asarray(self._rng.normal(0.0, std, size))

    def step(self, truth: RigidBodyState, acceleration: FloatArray) -> RigidBodyState:
        """
        Run one predict/update cycle and return the estimated state.

        Args:
            truth: Simulator state after the step.
            acceleration: True CoM acceleration during the step.

        Returns:
            truth with position, velocity, orientation and angular velocity
            replaced by their estimates; foot positions are shifted to keep
            their kinematic offsets from the estimated base.
        """
        cfg = self._config
        est = predict(self.estimate, acceleration + self._noise(cfg.accel_std), self._dt, self._q)

        rotation = truth.rotation
        if cfg.inject_noise and cfg.orientation_std > 0.0:
            rotation = rotation * Rotation.from_rotvec(self._noise(cfg.orientation_std))
        omega = truth.angular_velocity + self._noise(cfg.gyro_std)
        rot = rotation.as_matrix()

        offsets_body = truth.feet_relative() @ truth.rotation_matrix
        contacts = np.array(truth.foot_in_contact, dtype=bool)
        new_contact = contacts & ~self._anchored
        measurements = np.zeros((4, 3))
        for leg in range(4):
            measured = rot @ (offsets_body[leg] + self._noise(cfg.foot_std))
            if new_contact[leg]:
                self._anchors[leg] = est.position + measured
            measurements[leg] = self._anchors[leg] - measured
        self._anchored = contacts
        est = update(est, measurements, contacts, self._r)
        self._est = est

        feet = est.position + truth.feet_relative()
        return truth.replace(
            position=est.position.copy(),
            linear_velocity=est.velocity.copy(),
            orientation=rotation.as_quat(),
            angular_velocity=omega,
            foot_positions=feet,
        )

    def errors(self, truth: RigidBodyState) -> tuple[float, float]:
        """Position and velocity estimation errors (m, m/s)."""
        est = self.estimate
        return (
            float(np.linalg.norm(est.position - truth.position)),
            float(np.linalg.norm(est.velocity - truth.linear_velocity)),
        )
