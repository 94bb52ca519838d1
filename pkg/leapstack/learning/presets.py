"""
Named jump sequences for rollouts and evaluation.

Grammar:
    default                      the configured sequence
    in_place | forward | backward | left | right [xN]
    jump_turn:<deg>[deg][xN]     N jumps turning <deg> each
    direction:<deg>:<dist>       one jump of <dist> m at heading <deg>
    sequence:px,py,yawdeg;...    explicit list

"×" is accepted in place of "x" for repetition counts.
"""

from __future__ import annotations

import math
import re
from typing import Final

from leapstack.exceptions import ConfigError

Jump = tuple[float, float, float]

BASIC_JUMPS: Final[dict[str, Jump]] = {
    "in_place": (0.0, 0.0, 0.0),
    "forward": (1.0, 0.0, 0.0),
    "backward": (-0.5, 0.0, 0.0),
    "left": (0.0, 0.2, 0.0),
    "right": (0.0, -0.2, 0.0),
}

_REPEAT = re.compile(r"^(?P<body>.*?)(?:[x×](?P<count>\d+))?$")


def _number(text: str, preset: str) -> float:
    try:
        value = float(text.strip().removesuffix("deg"))
    except ValueError:
        raise ConfigError(f"Invalid number {text!r} in task {preset!r}", field="task") from None
    if not math.isfinite(value):
        raise ConfigError(f"Non-finite number in task {preset!r}", field="task")
    return value


def parse_task(preset: str, default: tuple[Jump, ...]) -> tuple[Jump, ...]:
    """
    Expand a task preset into a jump sequence.

    Args:
        preset: Preset string (see module docstring).
        default: Sequence used for "default".

    Returns:
        Non-empty tuple of (p_x, p_y, p_yaw) jumps, yaw in radians.

    Raises:
        ConfigError: If the preset cannot be parsed.

    Example:
        >>> parse_task("jump_turn:90deg×2", ())
        ((0.0, 0.0, 1.5707963267948966), (0.0, 0.0, 1.5707963267948966))
    """
    text = preset.strip()
    kind, _, args = text.partition(":")

    if kind == "sequence":
        jumps = []
        for item in filter(None, (part.strip() for part in args.split(";"))):
            values = item.split(",")
            if len(values) != 3:
                raise ConfigError(f"Jump {item!r} needs px,py,yawdeg", field="task")
            px, py, yaw = (_number(v, preset) for v in values)
            jumps.append((px, py, math.radians(yaw)))
        if not jumps:
            raise ConfigError("Empty jump sequence", field="task")
        return tuple(jumps)

    if kind == "direction":
        parts = args.split(":")
        if len(parts) != 2:
            raise ConfigError(f"Task {preset!r} needs direction:<deg>:<dist>", field="task")
        heading = math.radians(_number(parts[0], preset))
        distance = _number(parts[1], preset)
        return ((distance * math.cos(heading), distance * math.sin(heading), 0.0),)

    match = _REPEAT.match(args if kind == "jump_turn" else text)
    assert match is not None
    body = match.group("body")
    count = int(match.group("count") or 1)
    if count < 1:
        raise ConfigError(f"Repetition count must be >= 1 in {preset!r}", field="task")

    if kind == "jump_turn":
        return ((0.0, 0.0, math.radians(_number(body, preset))),) * count
    if body == "default":
        return tuple(default) * count
    if body in BASIC_JUMPS:
        return (BASIC_JUMPS[body],) * count
    raise ConfigError(f"Unknown task preset {preset!r}", field="task")
