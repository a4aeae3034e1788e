"""Fuzzy-logic trajectory tracking for a differential-drive mobile robot."""

__version__ = "0.1.0"

from .controller import ControllerConfig, compute_command, heading_error
from .fuzzy import FuzzyController, build_controller, default_controller
from .kinematics import (
    BodyTwist,
    Pose,
    RobotParams,
    WheelSpeeds,
    body_to_wheel,
    integrate_pose,
    saturate_wheels,
    wheel_to_body,
    wrap_angle,
)
from .metrics import ErrorReport, aggregate, evaluate_trace, rmse
from .path import Arc, Line, Path, build_paper_course
from .simulation import NoiseModel, SimConfig, Trace, run, run_trials

__all__ = [
    "Arc",
    "BodyTwist",
    "ControllerConfig",
    "ErrorReport",
    "FuzzyController",
    "Line",
    "NoiseModel",
    "Path",
    "Pose",
    "RobotParams",
    "SimConfig",
    "Trace",
    "WheelSpeeds",
    "aggregate",
    "body_to_wheel",
    "build_controller",
    "build_paper_course",
    "compute_command",
    "default_controller",
    "evaluate_trace",
    "heading_error",
    "integrate_pose",
    "rmse",
    "run",
    "run_trials",
    "saturate_wheels",
    "wheel_to_body",
    "wrap_angle",
]
