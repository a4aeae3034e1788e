"""Reference paths built from line and arc segments, parameterized by arc length."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

from .kinematics import wrap_angle

Point = tuple[float, float]

JOIN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Line:
    start: Point
    end: Point

    def __post_init__(self):
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", (float(self.end[0]), float(self.end[1])))
        if self.start == self.end:
            raise ValueError("line start and end coincide")

    @cached_property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def end_point(self) -> Point:
        return self.end

    def point(self, s: float) -> Point:
        f = s / self.length
        (x0, y0), (x1, y1) = self.start, self.end
        return (x0 + f * (x1 - x0), y0 + f * (y1 - y0))

    def heading(self, s: float) -> float:
        return math.atan2(self.end[1] - self.start[1], self.end[0] - self.start[0])

    def curvature(self, s: float) -> float:
        return 0.0

    def closest(self, p: Point) -> float:
        (x0, y0), (x1, y1) = self.start, self.end
        dx, dy = x1 - x0, y1 - y0
        length = self.length
        t = ((p[0] - x0) * dx + (p[1] - y0) * dy) / length
        return min(max(t, 0.0), length)


@dataclass(frozen=True)
class Arc:
    """Circular arc; ``sweep`` is signed, positive counterclockwise."""

    center: Point
    radius: float
    start_angle: float
    sweep: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.radius > 0:
            raise ValueError(f"arc radius must be > 0, got {self.radius!r}")
        if self.sweep == 0:
            raise ValueError("arc sweep must be non-zero")

    @property
    def direction(self) -> float:
        return 1.0 if self.sweep > 0 else -1.0

    @cached_property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def end_point(self) -> Point:
        return self.point(self.length)

    def _angle(self, s: float) -> float:
        return self.start_angle + self.direction * s / self.radius

    def point(self, s: float) -> Point:
        a = self._angle(s)
        return (self.center[0] + self.radius * math.cos(a), self.center[1] + self.radius * math.sin(a))

    def heading(self, s: float) -> float:
        return wrap_angle(self._angle(s) + self.direction * math.pi / 2)

    def curvature(self, s: float) -> float:
        return self.direction / self.radius

    def closest(self, p: Point) -> float:
        dx, dy = p[0] - self.center[0], p[1] - self.center[1]
        if dx == 0.0 and dy == 0.0:
            return 0.0
        # Angle travelled from the start, measured in the sweep direction, in [0, 2pi).
        travelled = (self.direction * (math.atan2(dy, dx) - self.start_angle)) % (2 * math.pi)
        if travelled <= abs(self.sweep):
            return self.radius * travelled
        # Outside the swept range: the nearer endpoint wins.
        length = self.length
        d_start = _dist(p, self.point(0.0))
        d_end = _dist(p, self.point(length))
        return 0.0 if d_start <= d_end else length


Segment = Union[Line, Arc]


def _dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


class Path:
    """Connected sequence of segments with a unit-speed arc-length parameter.

    Queries clamp ``s`` to ``[0, total_length]``.
    """

    def __init__(self, segments: Sequence[Segment]):
        segments = tuple(segments)
        if not segments:
            raise ValueError("path needs at least one segment")
        for i, (a, b) in enumerate(zip(segments, segments[1:])):
            gap = _dist(a.end_point, b.point(0.0))
            if gap > JOIN_TOLERANCE:
                raise ValueError(f"segments {i} and {i + 1} are not connected (gap {gap:.3g} m)")
        self.segments = segments
        cumulative = [0.0]
        for seg in segments:
            cumulative.append(cumulative[-1] + seg.length)
        self.cumulative_lengths = tuple(cumulative)

    def __repr__(self):
        return f"Path({list(self.segments)!r})"

    @property
    def total_length(self) -> float:
        return self.cumulative_lengths[-1]

    def _locate(self, s: float) -> tuple[Segment, float]:
        s = min(max(s, 0.0), self.total_length)
        i = bisect.bisect_left(self.cumulative_lengths, s, 1, len(self.segments))
        return self.segments[i - 1], s - self.cumulative_lengths[i - 1]

    def point_at(self, s: float) -> Point:
        seg, local = self._locate(s)
        return seg.point(local)

    def heading_at(self, s: float) -> float:
        seg, local = self._locate(s)
        return seg.heading(local)

    def curvature_at(self, s: float) -> float:
        """Signed curvature (1/m), positive when the path turns counterclockwise."""
        seg, local = self._locate(s)
        return seg.curvature(local)

    def closest_arc_length(self, p: Point) -> float:
        """Arc length of the path point nearest ``p``; ties go to the smaller ``s``."""
        best_s = 0.0
        best_d = math.inf
        for offset, seg in zip(self.cumulative_lengths, self.segments):
            local = seg.closest(p)
            d = _dist(p, seg.point(local))
            if d < best_d:
                best_d, best_s = d, offset + local
        return best_s

    def lookahead_point(self, p: Point, lookahead: float) -> Point:
        if not lookahead > 0:
            raise ValueError(f"lookahead must be > 0, got {lookahead!r}")
        s = self.closest_arc_length(p)
        return self.point_at(min(s + lookahead, self.total_length))


def point_at(path: Path, s: float) -> Point:
    return path.point_at(s)


def heading_at(path: Path, s: float) -> float:
    return path.heading_at(s)


def closest_arc_length(path: Path, p: Point) -> float:
    return path.closest_arc_length(p)


def lookahead_point(path: Path, p: Point, lookahead: float) -> Point:
    return path.lookahead_point(p, lookahead)


def build_paper_course(scale: float = 60.0) -> Path:
    """Axis-aligned line, CCW half circle, then a 135 degree bias line.

    At ``scale=60`` the pieces are 20 m, 10*pi m and the remainder of 60 m;
    other scales shrink or grow every coordinate proportionally.
    """
    if not scale > 0:
        raise ValueError(f"scale must be > 0, got {scale!r}")
    k = scale / 60.0
    line = Line((0.0, 0.0), (20.0 * k, 0.0))
    arc = Arc(center=(20.0 * k, 10.0 * k), radius=10.0 * k, start_angle=-math.pi / 2, sweep=math.pi)
    bias_length = (60.0 - 20.0 - 10.0 * math.pi) * k
    x0, y0 = arc.end_point
    bias_heading = 3 * math.pi / 4
    bias = Line(
        (x0, y0),
        (x0 + bias_length * math.cos(bias_heading), y0 + bias_length * math.sin(bias_heading)),
    )
    return Path([line, arc, bias])
