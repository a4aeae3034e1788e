"""RMSE evaluation of simulated traces against the reference path."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .path import Path

REPORT_COLUMNS = ("v_ref", "mode", "rmse_x", "rmse_y", "rmse_v", "rmse_omega", "n_trials", "n_samples")


@dataclass(frozen=True)
class ErrorReport:
    rmse_x: float
    rmse_y: float
    rmse_v: float
    rmse_omega: float
    n_samples: int
    n_trials: int = 1

    def __post_init__(self):
        for name in ("rmse_x", "rmse_y", "rmse_v", "rmse_omega"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_samples <= 0:
            raise ValueError("n_samples must be > 0")

    def values(self) -> tuple[float, float, float, float]:
        return (self.rmse_x, self.rmse_y, self.rmse_v, self.rmse_omega)

    def csv_row(self, v_ref: float, mode: str) -> list:
        return [v_ref, mode, *self.values(), self.n_trials, self.n_samples]


def rmse(series: Sequence[float]) -> float:
    """Root mean square of ``series``."""
    a = np.asarray(series, dtype=float)
    if a.size == 0:
        raise ValueError("rmse of an empty series")
    return math.sqrt(float(np.mean(a * a)))


def trace_errors(trace, path: Path, v_ref: float) -> dict[str, np.ndarray]:
    """Per-sample error series of a trace.

    Position errors are taken against the closest path point. The angular
    reference is the path curvature at that point times ``v_ref``.
    """
    if len(trace) == 0:
        raise ValueError("cannot evaluate an empty trace")
    n = len(trace)
    ex = np.empty(n)
    ey = np.empty(n)
    ev = np.empty(n)
    ew = np.empty(n)
    for i, r in enumerate(trace):
        p = (r.pose.x, r.pose.y)
        s = path.closest_arc_length(p)
        rx, ry = path.point_at(s)
        ex[i] = p[0] - rx
        ey[i] = p[1] - ry
        ev[i] = r.real.v - v_ref
        ew[i] = r.real.omega - path.curvature_at(s) * v_ref
    return {"x": ex, "y": ey, "v": ev, "omega": ew}


def evaluate_trace(trace, path: Path, v_ref: float) -> ErrorReport:
    e = trace_errors(trace, path, v_ref)
    return ErrorReport(
        rmse(e["x"]), rmse(e["y"]), rmse(e["v"]), rmse(e["omega"]), n_samples=len(trace)
    )


def aggregate(reports: Sequence[ErrorReport]) -> ErrorReport:
    """Pool trials: square root of the mean of the per-trial mean squared errors."""
    if not reports:
        raise ValueError("cannot aggregate an empty list of reports")

    def pooled(values):
        return math.sqrt(math.fsum(v * v for v in values) / len(values))

    return ErrorReport(
        pooled([r.rmse_x for r in reports]),
        pooled([r.rmse_y for r in reports]),
        pooled([r.rmse_v for r in reports]),
        pooled([r.rmse_omega for r in reports]),
        n_samples=sum(r.n_samples for r in reports),
        n_trials=sum(r.n_trials for r in reports),
    )
