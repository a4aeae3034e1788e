"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS`` or ``FAIL`` line; the lines are also
repeated in the terminal summary. Criteria 6, 7 and 9 share two full runs
of the shipped scenario through the command-line entry point (about two
minutes each on one core).
"""

import csv
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fuzzytrack.controller import ControllerConfig
from fuzzytrack.fuzzy import default_controller, evaluate
from fuzzytrack.kinematics import BodyTwist, Pose, RobotParams, body_to_wheel, wheel_to_body
from fuzzytrack.metrics import evaluate_trace
from fuzzytrack.path import Line, Path, build_paper_course
from fuzzytrack.scenario import shipped_scenario
from fuzzytrack.simulation import NoiseModel, SimConfig, run

from oracles import brute_force_output

SPEEDS = (0.3, 0.6, 1.2)
ROBOT = RobotParams(wheel_radius=0.1, wheel_separation=0.4, max_wheel_speed=20.0, max_body_omega=5.0)
FZ = default_controller()
E_GRID = np.linspace(-math.pi, math.pi, 201)
S_GRID = np.linspace(0.0, 1.5, 101)


def verdict(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def noiseless_config(v):
    return SimConfig(
        path=build_paper_course(60.0),
        robot=ROBOT,
        controller=ControllerConfig(v_ref=v, lookahead_base=0.3, lookahead_gain=0.75, omega_limit=5.0),
        fuzzy=FZ,
        dt=0.01,
        noise=NoiseModel(enabled=False),
        completion_threshold=0.05,
        max_steps=100_000,
    )


@pytest.fixture(scope="module")
def noiseless_runs():
    out = {}
    for v in SPEEDS:
        cfg = noiseless_config(v)
        t0 = time.perf_counter()
        trace = run(cfg)
        elapsed = time.perf_counter() - t0
        out[v] = (trace, evaluate_trace(trace, cfg.path, v), elapsed)
    return out


@pytest.fixture(scope="module")
def shipped_runs(tmp_path_factory):
    dirs = []
    for name in ("first", "second"):
        out = tmp_path_factory.mktemp(name)
        proc = subprocess.run(
            [sys.executable, "-m", "fuzzytrack.cli", str(shipped_scenario()), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        dirs.append(out)
    return dirs


def read_report(out_dir):
    with open(out_dir / "report.csv", newline="") as fh:
        return {(float(r["v_ref"]), r["mode"]): r for r in csv.DictReader(fh)}


def test_criterion_01_kinematics_round_trip():
    rng = np.random.default_rng(1)
    twists = rng.uniform(-10, 10, size=(10_000, 2))
    radii = rng.uniform(0.01, 1.0, 10_000)
    seps = rng.uniform(0.05, 2.0, 10_000)
    params = [RobotParams(wheel_radius=r, wheel_separation=b) for r, b in zip(radii, seps)]
    worst = 0.0
    t0 = time.perf_counter()
    for (v, w), p in zip(twists.tolist(), params):
        back = wheel_to_body(body_to_wheel(BodyTwist(v, w), p), p)
        scale = max(abs(v), abs(w))
        worst = max(worst, abs(back.v - v) / scale, abs(back.omega - w) / scale)
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-12 and elapsed < 1.0,
            f"max relative error {worst:.2e} (<= 1e-12), {elapsed:.3f} s (< 1 s)")


def test_criterion_02_fuzzy_oracle_equivalence():
    worst, bound = 0.0, 0.0
    t0 = time.perf_counter()
    for e in E_GRID.tolist():
        for s in S_GRID.tolist():
            out = evaluate(FZ, e, s)
            worst = max(worst, abs(out - brute_force_output(e, s)))
            bound = max(bound, abs(out))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-12 and bound <= 5.0 and elapsed < 5.0,
            f"201x101 grid max deviation {worst:.2e} (<= 1e-12), max |u| {bound} (<= 5), {elapsed:.2f} s (< 5 s)")


def test_criterion_03_zero_fixed_point_and_odd_symmetry():
    zero = all(evaluate(FZ, 0.0, s) == 0.0 for s in S_GRID.tolist())
    odd = all(
        evaluate(FZ, -e, s) == -evaluate(FZ, e, s)
        for e in E_GRID.tolist() for s in S_GRID.tolist()
    )
    verdict(3, zero and odd, f"evaluate(0, s) == 0 exactly: {zero}; odd symmetry exact on grid: {odd}")


def test_criterion_04_noiseless_speed_error_is_zero(noiseless_runs):
    vals = {v: (rep.rmse_v, el) for v, (_, rep, el) in noiseless_runs.items()}
    ok = all(r == 0.0 and el < 10.0 for r, el in vals.values())
    detail = ", ".join(f"v={v}: rmse_v={r!r} in {el:.2f} s" for v, (r, el) in vals.items())
    verdict(4, ok, detail + " (== 0, < 10 s)")


def test_criterion_05_tracking_quality(noiseless_runs):
    limits = {0.6: 0.05, 1.2: 0.10}
    ok = True
    parts = []
    for v, limit in limits.items():
        rep = noiseless_runs[v][1]
        ok &= rep.rmse_x <= limit and rep.rmse_y <= limit
        parts.append(f"v={v}: rmse_x={rep.rmse_x:.4f} rmse_y={rep.rmse_y:.4f} (<= {limit})")
    verdict(5, ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_06_monotone_degradation(shipped_runs):
    report = read_report(shipped_runs[0])
    ok = True
    parts = []
    for mode in ("noiseless", "noisy"):
        for col in ("rmse_x", "rmse_y", "rmse_omega"):
            seq = [float(report[(v, mode)][col]) for v in SPEEDS]
            ok &= seq[0] <= seq[1] <= seq[2]
            parts.append(f"{mode} {col} " + " <= ".join(f"{x:.5f}" for x in seq))
    verdict(6, ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_07_noisy_not_below_noiseless(shipped_runs):
    report = read_report(shipped_runs[0])
    ok = True
    parts = []
    for v in SPEEDS:
        clean, noisy = report[(v, "noiseless")], report[(v, "noisy")]
        assert int(noisy["n_trials"]) == 30
        for col in ("rmse_x", "rmse_y", "rmse_v", "rmse_omega"):
            a, b = float(clean[col]), float(noisy[col])
            ok &= b >= a
            parts.append(f"v={v} {col} {b:.5f}>={a:.5f}")
    verdict(7, ok, "; ".join(parts))


def test_criterion_08_regulation():
    cfg = SimConfig(
        path=Path([Line((0.0, 0.0), (40.0, 0.0))]),
        robot=ROBOT,
        controller=ControllerConfig(v_ref=0.6, lookahead_base=0.3, lookahead_gain=0.75, omega_limit=5.0),
        fuzzy=FZ,
        dt=0.01,
        initial_pose=Pose(0.0, 0.3, 0.0),
    )
    trace = run(cfg)
    t, y = trace.column("t"), np.abs(trace.column("y"))
    settled = y[t >= 10.0]
    ok = trace.completed and t[-1] >= 60.0 and settled.max() < 0.02
    verdict(8, ok, f"max |y| after 10 s = {settled.max():.2e} m (< 0.02) over {t[-1]:.1f} s (>= 60 s)")


@pytest.mark.slow
def test_criterion_09_determinism(shipped_runs):
    a, b = shipped_runs
    files = sorted(p.relative_to(a) for p in a.rglob("*.csv"))
    same = all((a / rel).read_bytes() == (b / rel).read_bytes() for rel in files)
    missing = [rel for rel in files if not (b / rel).exists()]
    verdict(9, same and not missing and len(files) > 1,
            f"{len(files)} CSV files byte-identical across two runs of the shipped scenario: {same}")


def test_criterion_10_completion(noiseless_runs):
    parts = [f"v={v}: completed={tr.completed} in {tr.duration:.1f} s" for v, (tr, _, _) in noiseless_runs.items()]
    verdict(10, all(tr.completed for tr, _, _ in noiseless_runs.values()), "; ".join(parts))
