import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuzzytrack.controller import ControllerConfig, compute_command, heading_error
from fuzzytrack.fuzzy import default_controller
from fuzzytrack.kinematics import Pose
from fuzzytrack.path import Line, Path
from fuzzytrack.simulation import SimConfig, run

FZ = default_controller()
LINE = Path([Line((0, 0), (100, 0))])
HALF_M = ControllerConfig(v_ref=0.6, lookahead_base=0.5, lookahead_gain=0.0)


class TestHeadingError:
    def test_on_path_and_aligned(self):
        assert heading_error(Pose(3, 0, 0), LINE, HALF_M) == 0.0

    def test_left_of_path(self):
        assert heading_error(Pose(3, 0.5, 0), LINE, HALF_M) == pytest.approx(math.pi / 4, abs=1e-15)

    def test_right_of_path(self):
        assert heading_error(Pose(3, -0.5, 0), LINE, HALF_M) == pytest.approx(-math.pi / 4, abs=1e-15)

    def test_wrapped(self):
        e = heading_error(Pose(3, 0, math.pi), LINE, HALF_M)
        assert e == math.pi

    @given(x=st.floats(0, 90), y=st.floats(-5, 5), th=st.floats(-10, 10))
    def test_in_range(self, x, y, th):
        assert -math.pi < heading_error(Pose(x, y, th), LINE, HALF_M) <= math.pi

    def test_lookahead_grows_with_speed(self):
        assert ControllerConfig(v_ref=0.3).lookahead == 0.3
        assert ControllerConfig(v_ref=1.2).lookahead == pytest.approx(0.9)


class TestComputeCommand:
    def test_turns_right_when_left_of_target(self):
        cfg = ControllerConfig(v_ref=0.3, lookahead_base=0.5, lookahead_gain=0.0)
        cmd = compute_command(Pose(3, 0.5, 0), LINE, cfg, FZ)
        assert cmd.v == 0.3
        assert cmd.omega == pytest.approx(-1.75, abs=1e-12)

    def test_mirror(self):
        cfg = ControllerConfig(v_ref=0.3, lookahead_base=0.5, lookahead_gain=0.0)
        cmd = compute_command(Pose(3, -0.5, 0), LINE, cfg, FZ)
        assert cmd.omega == pytest.approx(1.75, abs=1e-12)

    def test_zero_error_gives_zero_omega(self):
        cmd = compute_command(Pose(3, 0, 0), LINE, HALF_M, FZ)
        assert cmd.omega == 0.0
        assert not math.copysign(1.0, cmd.omega) < 0

    @given(y=st.floats(-3, 3).filter(lambda y: abs(y) > 1e-6), v=st.sampled_from([0.3, 0.6, 1.2]))
    def test_corrective_sign(self, y, v):
        cmd = compute_command(Pose(5, y, 0), LINE, ControllerConfig(v_ref=v), FZ)
        assert cmd.v == v
        assert math.copysign(1, cmd.omega) == -math.copysign(1, y)

    def test_omega_clamped(self):
        cfg = ControllerConfig(v_ref=1.2, omega_limit=2.0)
        cmd = compute_command(Pose(5, 0, math.pi), LINE, cfg, FZ)
        assert abs(cmd.omega) == 2.0

    def test_invalid_config(self):
        with pytest.raises(ValueError, match="v_ref"):
            ControllerConfig(v_ref=0.0)
        with pytest.raises(ValueError, match="lookahead_gain"):
            ControllerConfig(lookahead_gain=-1.0)


def test_regulates_lateral_offset():
    cfg = SimConfig(
        path=Path([Line((0, 0), (40, 0))]),
        controller=ControllerConfig(v_ref=0.6),
        initial_pose=Pose(0.0, 0.3, 0.0),
    )
    trace = run(cfg)
    y = trace.column("y")
    t = trace.column("t")
    assert trace.completed
    assert all(abs(v) < 0.02 for v in y[t >= 10.0])
    assert max(abs(v) for v in y) <= 0.3 + 1e-12
