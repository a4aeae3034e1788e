"""Scenario files: YAML documents describing a batch of simulations.

A scenario fixes the robot, controller, fuzzy rule base, reference path,
noise model and integration settings, plus the list of commanded speeds and
the number of noisy trials per speed. Every section is optional and falls
back to the library defaults. See ``scenarios/paper_course.scenario`` for
an annotated example.

Angles may be written as numbers or as simple multiples of pi
(``pi``, ``-pi/12``, ``3*pi/4``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path as FsPath
from typing import Any, Optional

import yaml

from . import fuzzy
from .controller import ControllerConfig
from .kinematics import Pose, RobotParams
from .path import Arc, Line, Path, build_paper_course
from .simulation import NoiseModel, SimConfig


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` is the dotted location of the problem."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class ScenarioParseError(ScenarioError):
    """The file could not be read as YAML."""


@dataclass(frozen=True)
class Scenario:
    name: str
    speeds: tuple[float, ...]
    trials: int
    output_dir: FsPath
    path: Path
    robot: RobotParams = field(default_factory=RobotParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    fuzzy: fuzzy.FuzzyController = field(default_factory=fuzzy.default_controller)
    noise: NoiseModel = field(default_factory=NoiseModel)
    dt: float = 0.01
    completion_threshold: float = 0.05
    max_steps: int = 100_000
    initial_pose: Optional[Pose] = None
    trace_stride: int = 1

    def sim_config(self, v_ref: float, noisy: bool) -> SimConfig:
        return SimConfig(
            path=self.path,
            robot=self.robot,
            controller=replace(self.controller, v_ref=v_ref),
            fuzzy=self.fuzzy,
            dt=self.dt,
            initial_pose=self.initial_pose,
            noise=replace(self.noise, enabled=noisy),
            completion_threshold=self.completion_threshold,
            max_steps=self.max_steps,
        )


def shipped_scenario(name: str = "paper_course") -> FsPath:
    """Filesystem path of a scenario bundled with the package."""
    return FsPath(str(resources.files("fuzzytrack") / "scenarios" / f"{name}.scenario"))


_ANGLE = re.compile(r"^\s*([+-])?\s*(?:(\d+(?:\.\d*)?)\s*\*\s*)?pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(value: Any, where: str) -> float:
    if isinstance(value, bool):
        raise ScenarioError(where, f"expected a number or pi expression, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _ANGLE.match(value)
        if m:
            sign, factor, divisor = m.groups()
            a = math.pi
            if factor:
                a = float(factor) * a
            if divisor:
                a = a / float(divisor)
            return -a if sign == "-" else a
    raise ScenarioError(where, f"expected a number or pi expression, got {value!r}")


class _Section:
    """Typed access to one mapping of the scenario document."""

    def __init__(self, data: Any, where: str):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ScenarioError(where or "<root>", f"expected a mapping, got {type(data).__name__}")
        self.data = data
        self.where = where
        self.used: set[str] = set()

    def loc(self, key: str) -> str:
        return f"{self.where}.{key}" if self.where else key

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default: Any = None) -> Any:
        self.used.add(key)
        return self.data.get(key, default)

    def number(self, key: str, default: Optional[float] = None) -> float:
        value = self.raw(key, default)
        if value is None:
            raise ScenarioError(self.loc(key), "required")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(self.loc(key), f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ScenarioError(self.loc(key), "must be finite")
        return float(value)

    def integer(self, key: str, default: Optional[int] = None) -> int:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(self.loc(key), f"expected an integer, got {value!r}")
        return value

    def flag(self, key: str, default: bool = False) -> bool:
        value = self.raw(key, default)
        if not isinstance(value, bool):
            raise ScenarioError(self.loc(key), f"expected true/false, got {value!r}")
        return value

    def angle(self, key: str, default: Optional[float] = None) -> float:
        value = self.raw(key, default)
        if value is None:
            raise ScenarioError(self.loc(key), "required")
        return parse_angle(value, self.loc(key))

    def section(self, key: str) -> "_Section":
        return _Section(self.raw(key), self.loc(key))

    def finish(self) -> None:
        unknown = sorted(set(self.data) - self.used)
        if unknown:
            raise ScenarioError(self.loc(unknown[0]), "unknown key")


def _build(where: str, factory, **kwargs):
    """Construct a domain object, attributing its ValueError to the right field."""
    try:
        return factory(**kwargs)
    except ScenarioError:
        raise
    except ValueError as exc:
        msg = str(exc)
        for name in kwargs:
            if msg.startswith(name + " ") or msg.startswith(name + ":"):
                raise ScenarioError(f"{where}.{name}" if where else name, msg) from None
        raise ScenarioError(where, msg) from None


def _point(value: Any, where: str) -> tuple[float, float]:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ScenarioError(where, f"expected [x, y], got {value!r}")
    out = []
    for i, c in enumerate(value):
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
            raise ScenarioError(f"{where}[{i}]", f"expected a finite number, got {c!r}")
        out.append(float(c))
    return (out[0], out[1])


def _number_list(value: Any, where: str, angles: bool = False) -> list[float]:
    if not isinstance(value, list):
        raise ScenarioError(where, f"expected a list, got {value!r}")
    if angles:
        return [parse_angle(v, f"{where}[{i}]") for i, v in enumerate(value)]
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ScenarioError(f"{where}[{i}]", f"expected a finite number, got {v!r}")
        out.append(float(v))
    return out


def _load_path(sec: _Section) -> Path:
    if sec.has("segments"):
        if sec.has("course"):
            raise ScenarioError(sec.loc("course"), "give either course or segments, not both")
        raw = sec.raw("segments")
        if not isinstance(raw, list) or not raw:
            raise ScenarioError(sec.loc("segments"), "expected a non-empty list of segments")
        segments = []
        for i, item in enumerate(raw):
            seg = _Section(item, f"{sec.loc('segments')}[{i}]")
            kind = seg.raw("type")
            if kind == "line":
                segments.append(
                    _build(seg.where, Line, start=_point(seg.raw("start"), seg.loc("start")),
                           end=_point(seg.raw("end"), seg.loc("end")))
                )
            elif kind == "arc":
                segments.append(
                    _build(seg.where, Arc, center=_point(seg.raw("center"), seg.loc("center")),
                           radius=seg.number("radius"), start_angle=seg.angle("start_angle"),
                           sweep=seg.angle("sweep"))
                )
            else:
                raise ScenarioError(seg.loc("type"), f"expected 'line' or 'arc', got {kind!r}")
            seg.finish()
        path = _build(sec.loc("segments"), Path, segments=segments)
    else:
        course = sec.raw("course", "paper")
        if course != "paper":
            raise ScenarioError(sec.loc("course"), f"unknown course {course!r}")
        path = _build(sec.where, build_paper_course, scale=sec.number("scale", 60.0))
    sec.finish()
    return path


def _load_fuzzy(sec: _Section, paper_exact_rules: bool) -> fuzzy.FuzzyController:
    exact = sec.flag("paper_exact_rules", False) or paper_exact_rules
    rules = sec.raw("rules")
    if rules is not None:
        if exact:
            raise ScenarioError(sec.loc("paper_exact_rules"), "conflicts with an explicit rules grid")
        n_rows, n_cols = len(fuzzy.ERROR_LABELS), len(fuzzy.SPEED_LABELS)
        if not isinstance(rules, list) or any(not isinstance(r, list) for r in rules):
            raise ScenarioError(sec.loc("rules"), f"expected {n_rows} rows of {n_cols} labels")
        cells = sum(len(r) for r in rules)
        if len(rules) != n_rows or any(len(r) != n_cols for r in rules):
            raise ScenarioError(
                sec.loc("rules"),
                f"rule table must be {n_rows}x{n_cols} ({n_rows * n_cols} cells), got {cells} cells",
            )
    kwargs: dict[str, Any] = {"paper_exact_rules": exact, "rules": rules}
    if sec.has("error_peaks"):
        kwargs["error_peaks"] = _number_list(sec.raw("error_peaks"), sec.loc("error_peaks"), angles=True)
    if sec.has("error_universe"):
        kwargs["error_universe"] = tuple(
            _number_list(sec.raw("error_universe"), sec.loc("error_universe"), angles=True)
        )
    if sec.has("speed_peaks"):
        kwargs["speed_peaks"] = _number_list(sec.raw("speed_peaks"), sec.loc("speed_peaks"))
    if sec.has("speed_universe"):
        kwargs["speed_universe"] = tuple(_number_list(sec.raw("speed_universe"), sec.loc("speed_universe")))
    if sec.has("outputs"):
        outputs = sec.raw("outputs")
        if not isinstance(outputs, dict):
            raise ScenarioError(sec.loc("outputs"), "expected a mapping of label to value")
        kwargs["outputs"] = outputs
    sec.finish()
    try:
        return fuzzy.build_controller(**kwargs)
    except ValueError as exc:
        msg = str(exc)
        if msg.startswith("rule table"):
            where = sec.loc("rules")
        elif msg.startswith("heading_error"):
            where = sec.loc("error_peaks")
        elif msg.startswith("speed"):
            where = sec.loc("speed_peaks")
        elif msg.startswith("output"):
            where = sec.loc("outputs")
        else:
            where = sec.where
        raise ScenarioError(where, msg) from None


def parse_scenario(doc: Any, base_name: str = "scenario", paper_exact_rules: bool = False) -> Scenario:
    """Validate a parsed YAML document and build a :class:`Scenario`."""
    root = _Section(doc, "")
    name = root.raw("name", base_name)
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", "expected a non-empty string")

    speeds = _number_list(root.raw("speeds", [0.3, 0.6, 1.2]), "speeds")
    if not speeds:
        raise ScenarioError("speeds", "must not be empty")
    for i, v in enumerate(speeds):
        if not v > 0:
            raise ScenarioError(f"speeds[{i}]", f"must be > 0, got {v}")
    trials = root.integer("trials", 30)
    if trials < 1:
        raise ScenarioError("trials", f"must be >= 1, got {trials}")
    output_dir = root.raw("output_dir", f"out/{name}")
    if not isinstance(output_dir, str):
        raise ScenarioError("output_dir", "expected a path string")

    sec = root.section("robot")
    robot = _build("robot", RobotParams,
                   wheel_radius=sec.number("wheel_radius", 0.1),
                   wheel_separation=sec.number("wheel_separation", 0.4),
                   max_wheel_speed=sec.number("max_wheel_speed", 20.0),
                   max_body_omega=sec.number("max_body_omega", 5.0))
    sec.finish()

    sec = root.section("controller")
    # v_ref is set per speed; the placeholder only has to pass validation.
    controller = _build("controller", ControllerConfig,
                        v_ref=speeds[0],
                        lookahead_base=sec.number("lookahead_base", 0.3),
                        lookahead_gain=sec.number("lookahead_gain", 0.75),
                        omega_limit=sec.number("omega_limit", 5.0))
    sec.finish()

    fz = _load_fuzzy(root.section("fuzzy"), paper_exact_rules)
    path = _load_path(root.section("path"))

    sec = root.section("noise")
    seed = sec.integer("seed", 0)
    noise = _build("noise", NoiseModel,
                   enabled=False,
                   wheel_noise_rel=sec.number("wheel_noise_rel", 0.02),
                   wheel_noise_abs=sec.number("wheel_noise_abs", 0.01),
                   correlation_time=sec.number("correlation_time", 0.5),
                   seed=seed)
    sec.finish()

    sec = root.section("sim")
    dt = sec.number("dt", 0.01)
    if not dt > 0:
        raise ScenarioError("sim.dt", f"must be > 0, got {dt}")
    threshold = sec.number("completion_threshold", 0.05)
    if threshold < 0:
        raise ScenarioError("sim.completion_threshold", "must be >= 0")
    max_steps = sec.integer("max_steps", 100_000)
    if max_steps < 1:
        raise ScenarioError("sim.max_steps", "must be > 0")
    trace_stride = sec.integer("trace_stride", 1)
    if trace_stride < 1:
        raise ScenarioError("sim.trace_stride", "must be >= 1")
    initial_pose = None
    if sec.has("initial_pose"):
        raw = sec.raw("initial_pose")
        where = sec.loc("initial_pose")
        if not (isinstance(raw, list) and len(raw) == 3):
            raise ScenarioError(where, "expected [x, y, theta]")
        x, y = _point(raw[:2], where)
        initial_pose = Pose(x, y, parse_angle(raw[2], f"{where}[2]"))
    sec.finish()
    root.finish()

    return Scenario(
        name=name,
        speeds=tuple(speeds),
        trials=trials,
        output_dir=FsPath(output_dir),
        path=path,
        robot=robot,
        controller=controller,
        fuzzy=fz,
        noise=noise,
        dt=dt,
        completion_threshold=threshold,
        max_steps=max_steps,
        initial_pose=initial_pose,
        trace_stride=trace_stride,
    )


def load_scenario(file, paper_exact_rules: bool = False) -> Scenario:
    """Read and validate a scenario file.

    Raises:
        ScenarioParseError: the file is not valid YAML.
        ScenarioError: a value violates a constraint; ``err.field`` names it.
        OSError: the file cannot be read.
    """
    file = FsPath(file)
    text = file.read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(str(file), f"malformed scenario file: {exc}") from None
    return parse_scenario(doc, base_name=file.stem, paper_exact_rules=paper_exact_rules)
