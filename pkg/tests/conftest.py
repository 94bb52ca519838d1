"""Shared fixtures."""

import numpy as np
import pytest

from leapstack.config import LeapConfig, parse_config_text, robot_model
from leapstack.constants import SIDE_SIGNS
from leapstack.models.state import RigidBodyState, RobotModel, default_robot_model
from leapstack.sim import kinematics


@pytest.fixture
def model() -> RobotModel:
    """Default 15 kg robot."""
    return default_robot_model()


@pytest.fixture
def stand(model: RobotModel) -> RigidBodyState:
    """Nominal standing state at the origin."""
    return RigidBodyState.nominal_stand(model)


@pytest.fixture
def config() -> LeapConfig:
    """Default configuration."""
    return LeapConfig()


@pytest.fixture
def short_config() -> LeapConfig:
    """Two-jump episode with a small policy network."""
    return parse_config_text(
        "[policy]\nhidden_size = 4\n"
        "[env]\njump_sequence = [[0.0, 0.0, 0.0], [0.3, 0.0, 0.0]]\n"
    )


@pytest.fixture
def config_model(config: LeapConfig) -> RobotModel:
    """Robot model built from the default config."""
    return robot_model(config.robot)


@pytest.fixture
def hover_torques():
    """Joint torques holding each foot at m·g/4 of vertical force."""

    def torques(state: RigidBodyState, model: RobotModel) -> np.ndarray:
        q = kinematics.joint_angles(state, model)
        force_on_foot = np.array([0.0, 0.0, -model.weight / 4])
        return np.stack(
            [
                kinematics.jacobian(q[leg], model.geometry, side).T @ force_on_foot
                for leg, side in enumerate(SIDE_SIGNS)
            ]
        )

    return torques
