"""Tests for task presets."""

import math

import pytest

from leapstack.exceptions import ConfigError
from leapstack.learning.presets import BASIC_JUMPS, parse_task

DEFAULT = ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))


class TestParseTask:
    """Tests for preset expansion."""

    def test_default(self):
        """Test the configured sequence is passed through."""
        assert parse_task("default", DEFAULT) == DEFAULT

    @pytest.mark.parametrize("name", sorted(BASIC_JUMPS))
    def test_basic(self, name):
        """Test each named single jump."""
        assert parse_task(name, DEFAULT) == (BASIC_JUMPS[name],)

    def test_repeat(self):
        """Test xN repetition of a named jump."""
        assert parse_task("forwardx3", DEFAULT) == ((1.0, 0.0, 0.0),) * 3

    def test_turns(self):
        """Test five 90 degree turns in place."""
        jumps = parse_task("jump_turn:90deg×5", DEFAULT)
        assert len(jumps) == 5
        for px, py, yaw in jumps:
            assert (px, py) == (0.0, 0.0)
            assert yaw == pytest.approx(math.pi / 2)

    def test_turn_ascii_repeat(self):
        """Test x works as the repetition marker."""
        assert parse_task("jump_turn:-45x2", DEFAULT) == ((0.0, 0.0, math.radians(-45.0)),) * 2

    def test_direction(self):
        """Test a jump along a heading."""
        ((px, py, yaw),) = parse_task("direction:90:0.4", DEFAULT)
        assert px == pytest.approx(0.0, abs=1e-12)
        assert py == pytest.approx(0.4)
        assert yaw == 0.0

    def test_sequence(self):
        """Test an explicit list with yaw in degrees."""
        jumps = parse_task("sequence:0.5,0,0; 0,0.2,180", DEFAULT)
        assert jumps == ((0.5, 0.0, 0.0), (0.0, 0.2, math.pi))

    @pytest.mark.parametrize(
        "preset",
        [
            "sideways",
            "forwardx0",
            "jump_turn:left",
            "direction:90",
            "sequence:",
            "sequence:1,2",
            "sequence:1,2,nan",
        ],
    )
    def test_invalid(self, preset):
        """Test malformed presets are config errors on the task field."""
        with pytest.raises(ConfigError) as exc_info:
            parse_task(preset, DEFAULT)
        assert exc_info.value.field == "task"
