"""Differential-drive kinematics and unicycle pose integration.

Wheel speeds are angular (rad/s); body twists are (v, omega) with omega
positive counterclockwise. Angles are kept in the half-open interval
(-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]; -pi maps to +pi."""
    r = math.remainder(a, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Pose:
    """Robot position (m) and heading (rad) in the global frame.

    The heading is wrapped on construction, so every Pose satisfies
    ``-pi < theta <= pi``.
    """

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        _check_finite(x=self.x, y=self.y, theta=self.theta)
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class RobotParams:
    wheel_radius: float = 0.1
    wheel_separation: float = 0.4
    max_wheel_speed: float = 20.0
    max_body_omega: float = 5.0

    def __post_init__(self):
        for name in ("wheel_radius", "wheel_separation", "max_wheel_speed", "max_body_omega"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class BodyTwist:
    v: float
    omega: float

    def __post_init__(self):
        _check_finite(v=self.v, omega=self.omega)


@dataclass(frozen=True)
class WheelSpeeds:
    omega_r: float
    omega_l: float

    def __post_init__(self):
        _check_finite(omega_r=self.omega_r, omega_l=self.omega_l)


def _forward(omega_r: float, omega_l: float, p: RobotParams) -> tuple[float, float]:
    r = p.wheel_radius
    return (omega_r + omega_l) * r / 2.0, (omega_r - omega_l) * r / p.wheel_separation


def wheel_to_body(w: WheelSpeeds, p: RobotParams) -> BodyTwist:
    """Forward kinematics: v = (wr + wl) R / 2, omega = (wr - wl) R / b."""
    v, omega = _forward(w.omega_r, w.omega_l, p)
    return BodyTwist(v, omega)


def _neighbours(x: float, k: int) -> list[float]:
    """``x`` and its ``k`` float neighbours on each side, indexed by offset + k."""
    below, above = [], []
    lo = hi = x
    for _ in range(k):
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
        below.append(lo)
        above.append(hi)
    return below[::-1] + [x] + above


_ULP_RADIUS = 3
# Offsets (in ulps) tried when refining the inverse, nearest first.
_ULP_OFFSETS = sorted(
    ((i, j) for i in range(-_ULP_RADIUS, _ULP_RADIUS + 1) for j in range(-_ULP_RADIUS, _ULP_RADIUS + 1)),
    key=lambda ij: (abs(ij[0]) + abs(ij[1]), ij),
)


def body_to_wheel(t: BodyTwist, p: RobotParams) -> WheelSpeeds:
    """Inverse kinematics, the exact algebraic inverse of :func:`wheel_to_body`.

    Uses ``wr = (v + b*omega/2) / R`` and ``wl = (v - b*omega/2) / R``.
    Plain floating-point evaluation usually loses the last bit of ``v`` on
    the way back through :func:`wheel_to_body`, so the result is refined
    within a few ulps: the returned pair reproduces ``v`` bitwise whenever
    such a pair exists nearby, and among those the one closest in ``omega``.
    """
    r, b = p.wheel_radius, p.wheel_separation
    v, omega = t.v, t.omega
    half = b * omega / 2.0
    wr0 = (v + half) / r
    wl0 = (v - half) / r
    if (wr0 + wl0) * r / 2.0 == v and (wr0 - wl0) * r / b == omega:
        return WheelSpeeds(wr0, wl0)

    wrs = _neighbours(wr0, _ULP_RADIUS)
    wls = _neighbours(wl0, _ULP_RADIUS)
    best = (wr0, wl0)
    best_err = math.inf
    fallback = None
    fallback_err = math.inf
    for i, j in _ULP_OFFSETS:
        wr = wrs[i + _ULP_RADIUS]
        wl = wls[j + _ULP_RADIUS]
        err = abs((wr - wl) * r / b - omega)
        if (wr + wl) * r / 2.0 == v:
            if err < best_err:
                best, best_err = (wr, wl), err
                if err == 0.0:
                    break
        elif best_err == math.inf and err < fallback_err:
            fallback, fallback_err = (wr, wl), err
    if best_err == math.inf and fallback is not None:
        best = fallback
    return WheelSpeeds(*best)


def saturate_wheels(w: WheelSpeeds, p: RobotParams) -> WheelSpeeds:
    """Clamp each wheel to [-max_wheel_speed, max_wheel_speed]."""
    m = p.max_wheel_speed
    return WheelSpeeds(min(max(w.omega_r, -m), m), min(max(w.omega_l, -m), m))


def saturate_twist(t: BodyTwist, p: RobotParams) -> BodyTwist:
    """Clamp the body angular velocity to +-max_body_omega."""
    m = p.max_body_omega
    if -m <= t.omega <= m:
        return t
    return BodyTwist(t.v, min(max(t.omega, -m), m))


def integrate_pose(pose: Pose, t: BodyTwist, dt: float) -> Pose:
    """Advance the pose by one forward-Euler step of the unicycle model."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    return Pose(
        pose.x + t.v * math.cos(pose.theta) * dt,
        pose.y + t.v * math.sin(pose.theta) * dt,
        pose.theta + t.omega * dt,
    )
