"""Heading-error computation and the fuzzy steering command."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fuzzy import FuzzyController
from .kinematics import BodyTwist, Pose, wrap_angle
from .path import Path


@dataclass(frozen=True)
class ControllerConfig:
    """Commanded speed and lookahead settings.

    The lookahead distance is ``max(lookahead_base, lookahead_gain * v_ref)``.
    """

    v_ref: float = 0.6
    lookahead_base: float = 0.3
    lookahead_gain: float = 0.75
    omega_limit: float = 5.0

    def __post_init__(self):
        for name in ("v_ref", "lookahead_base", "omega_limit"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0, got {value!r}")
        if not (math.isfinite(self.lookahead_gain) and self.lookahead_gain >= 0):
            raise ValueError(f"lookahead_gain must be >= 0, got {self.lookahead_gain!r}")

    @property
    def lookahead(self) -> float:
        return max(self.lookahead_base, self.lookahead_gain * self.v_ref)


def track(pose: Pose, path: Path, cfg: ControllerConfig) -> tuple[float, float]:
    """Return ``(epsilon, s_closest)`` for the current pose.

    ``epsilon`` is the robot heading minus the bearing to the lookahead
    point, so a robot pointing left of the target has a positive error.
    """
    s_closest = path.closest_arc_length((pose.x, pose.y))
    s_target = min(s_closest + cfg.lookahead, path.total_length)
    tx, ty = path.point_at(s_target)
    dx, dy = tx - pose.x, ty - pose.y
    if dx == 0.0 and dy == 0.0:
        bearing = path.heading_at(s_target)
    else:
        bearing = math.atan2(dy, dx)
    return wrap_angle(pose.theta - bearing), s_closest


def heading_error(pose: Pose, path: Path, cfg: ControllerConfig) -> float:
    return track(pose, path, cfg)[0]


def command_from_error(epsilon: float, cfg: ControllerConfig, fz: FuzzyController) -> BodyTwist:
    # Fuzzy output is right-turn positive; world omega is counterclockwise positive.
    omega = 0.0 - fz.evaluate(epsilon, cfg.v_ref)
    omega = min(max(omega, -cfg.omega_limit), cfg.omega_limit)
    return BodyTwist(cfg.v_ref, omega)


def compute_command(pose: Pose, path: Path, cfg: ControllerConfig, fz: FuzzyController) -> BodyTwist:
    """Body twist that holds ``v_ref`` and steers toward the lookahead point."""
    return command_from_error(heading_error(pose, path, cfg), cfg, fz)
