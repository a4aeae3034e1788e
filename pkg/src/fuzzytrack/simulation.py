"""Closed-loop simulation: controller, inverse kinematics, plant, integration.

One control update per integration step. With noise disabled the plant is
ideal and realizes the saturated wheel commands exactly; with noise enabled
each wheel speed gets Gaussian noise with a relative and an absolute part.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np

from .controller import ControllerConfig, command_from_error, track
from .fuzzy import FuzzyController, default_controller
from .kinematics import (
    BodyTwist,
    Pose,
    RobotParams,
    WheelSpeeds,
    body_to_wheel,
    integrate_pose,
    saturate_twist,
    saturate_wheels,
    wheel_to_body,
)
from .path import Path, build_paper_course

logger = logging.getLogger(__name__)


class IncompleteRunError(RuntimeError):
    """A run stopped at max_steps before reaching the end of the path."""


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian wheel-speed disturbance for emulating experimental runs.

    Each wheel gets ``wheel_noise_rel * |commanded| * n1 + wheel_noise_abs * n2``
    where n1, n2 are unit-variance processes. With ``correlation_time`` > 0
    they are first-order Gauss-Markov (AR(1)) sequences with that time
    constant; with 0 they are white.
    """

    enabled: bool = False
    wheel_noise_rel: float = 0.02
    wheel_noise_abs: float = 0.01
    correlation_time: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("wheel_noise_rel", "wheel_noise_abs", "correlation_time"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be >= 0, got {value!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    def make_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))

    def initial_state(self, rng: np.random.Generator) -> tuple[float, ...]:
        # Stationary start: (rel_r, rel_l, abs_r, abs_l).
        return tuple(float(z) for z in rng.standard_normal(4))

    def advance(self, state: tuple[float, ...], dt: float, rng: np.random.Generator) -> tuple[float, ...]:
        if self.correlation_time == 0:
            return tuple(float(z) for z in rng.standard_normal(4))
        a = math.exp(-dt / self.correlation_time)
        k = math.sqrt(1.0 - a * a)
        z = rng.standard_normal(4)
        return tuple(a * x + k * float(zi) for x, zi in zip(state, z))

    def apply(self, w: WheelSpeeds, state: tuple[float, ...]) -> WheelSpeeds:
        if not self.enabled:
            return w
        rel_r, rel_l, abs_r, abs_l = state
        return WheelSpeeds(
            w.omega_r + self.wheel_noise_rel * abs(w.omega_r) * rel_r + self.wheel_noise_abs * abs_r,
            w.omega_l + self.wheel_noise_rel * abs(w.omega_l) * rel_l + self.wheel_noise_abs * abs_l,
        )


def apply_noise(w: WheelSpeeds, noise: NoiseModel, state: tuple[float, ...]) -> WheelSpeeds:
    return noise.apply(w, state)


@dataclass(frozen=True)
class SimConfig:
    path: Path = field(default_factory=build_paper_course)
    robot: RobotParams = field(default_factory=RobotParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    fuzzy: FuzzyController = field(default_factory=default_controller)
    dt: float = 0.01
    initial_pose: Optional[Pose] = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    completion_threshold: float = 0.05
    max_steps: int = 100_000

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not self.max_steps > 0:
            raise ValueError(f"max_steps must be > 0, got {self.max_steps!r}")
        if not self.completion_threshold >= 0:
            raise ValueError("completion_threshold must be >= 0")
        if self.initial_pose is None:
            x, y = self.path.point_at(0.0)
            object.__setattr__(self, "initial_pose", Pose(x, y, self.path.heading_at(0.0)))


@dataclass(frozen=True)
class SimState:
    pose: Pose
    time: float = 0.0
    index: int = 0
    noise: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class TraceRecord:
    """Signals of one control step, all taken at ``time`` (before integrating)."""

    time: float
    pose: Pose
    s_ref: float
    ref_point: tuple[float, float]
    ref_heading: float
    epsilon: float
    cmd: BodyTwist
    real: BodyTwist
    wheels_cmd: WheelSpeeds
    wheels_real: WheelSpeeds


@dataclass
class Trace:
    records: list[TraceRecord]
    completed: bool
    final_pose: Pose
    v_ref: float
    dt: float
    seed: int = 0

    def __len__(self):
        return len(self.records)

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    @property
    def duration(self) -> float:
        return len(self.records) * self.dt

    def column(self, name: str) -> np.ndarray:
        """One trace signal as an array, e.g. ``x``, ``v_real``, ``wr_cmd``."""
        return np.array([_FIELDS[name](r) for r in self.records], dtype=float)


_FIELDS = {
    "t": lambda r: r.time,
    "x": lambda r: r.pose.x,
    "y": lambda r: r.pose.y,
    "theta": lambda r: r.pose.theta,
    "s_ref": lambda r: r.s_ref,
    "ref_x": lambda r: r.ref_point[0],
    "ref_y": lambda r: r.ref_point[1],
    "ref_heading": lambda r: r.ref_heading,
    "epsilon": lambda r: r.epsilon,
    "v_cmd": lambda r: r.cmd.v,
    "omega_cmd": lambda r: r.cmd.omega,
    "v_real": lambda r: r.real.v,
    "omega_real": lambda r: r.real.omega,
    "wr_cmd": lambda r: r.wheels_cmd.omega_r,
    "wl_cmd": lambda r: r.wheels_cmd.omega_l,
    "wr_real": lambda r: r.wheels_real.omega_r,
    "wl_real": lambda r: r.wheels_real.omega_l,
}


def step(
    state: SimState,
    config: SimConfig,
    rng: Optional[np.random.Generator] = None,
) -> tuple[SimState, TraceRecord]:
    """Run one control cycle and integrate the pose over ``dt``.

    ``rng`` is required only when noise is enabled; the noise process state
    travels in ``state.noise``.
    """
    pose = state.pose
    epsilon, s_ref = track(pose, config.path, config.controller)
    cmd = saturate_twist(command_from_error(epsilon, config.controller, config.fuzzy), config.robot)
    wheels_cmd = saturate_wheels(body_to_wheel(cmd, config.robot), config.robot)
    noise_state = state.noise
    if config.noise.enabled:
        if rng is None:
            raise ValueError("noise is enabled but no random generator was given")
        if noise_state is None:
            noise_state = config.noise.initial_state(rng)
        wheels_real = config.noise.apply(wheels_cmd, noise_state)
        noise_state = config.noise.advance(noise_state, config.dt, rng)
    else:
        wheels_real = wheels_cmd
    real = wheel_to_body(wheels_real, config.robot)
    record = TraceRecord(
        time=state.time,
        pose=pose,
        s_ref=s_ref,
        ref_point=config.path.point_at(s_ref),
        ref_heading=config.path.heading_at(s_ref),
        epsilon=epsilon,
        cmd=cmd,
        real=real,
        wheels_cmd=wheels_cmd,
        wheels_real=wheels_real,
    )
    index = state.index + 1
    next_state = SimState(integrate_pose(pose, real, config.dt), index * config.dt, index, noise_state)
    return next_state, record


def _finished(pose: Pose, config: SimConfig) -> bool:
    s = config.path.closest_arc_length((pose.x, pose.y))
    return s >= config.path.total_length - config.completion_threshold


def run(config: SimConfig, strict: bool = False) -> Trace:
    """Step until the robot is within the completion threshold of the path end.

    A run that exhausts ``max_steps`` returns a trace with
    ``completed=False``, or raises :class:`IncompleteRunError` when
    ``strict`` is set.
    """
    rng = config.noise.make_rng() if config.noise.enabled else None
    state = SimState(config.initial_pose)
    records = []
    completed = False
    while True:
        if _finished(state.pose, config):
            completed = True
            break
        if state.index >= config.max_steps:
            break
        state, record = step(state, config, rng)
        records.append(record)
    trace = Trace(
        records, completed, state.pose, config.controller.v_ref, config.dt, config.noise.seed
    )
    if not completed:
        msg = f"run at v_ref={config.controller.v_ref} hit max_steps={config.max_steps}"
        if strict:
            raise IncompleteRunError(msg)
        logger.warning(msg)
    return trace


def trial_config(config: SimConfig, trial: int) -> SimConfig:
    """Config for trial ``trial``: base seed plus trial index."""
    seed = (config.noise.seed + trial) % 2**64
    return replace(config, noise=replace(config.noise, seed=seed))


def run_trials(config: SimConfig, n_trials: int, strict: bool = False, workers: int = 1) -> list[Trace]:
    """Run ``n_trials`` independent, reproducible trials.

    Trials may run in a process pool (``workers > 1``); results are returned
    in trial order either way and do not depend on ``workers``.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials!r}")
    configs = [trial_config(config, i) for i in range(n_trials)]
    if workers > 1 and n_trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(run, configs))
    else:
        traces = [run(c) for c in configs]
    if strict:
        for i, trace in enumerate(traces):
            if not trace.completed:
                raise IncompleteRunError(f"trial {i} did not complete")
    return traces
