import math

import numpy as np
import pytest

from common.core_types import (CentralInput, CentralState, ControlInput,
                               DockingInterface, RobotState, docking_heading,
                               docking_point, map_to_0_pi, wrap_to_2pi,
                               wrap_to_pm_pi)

PI = math.pi

class TestWrap:

    @pytest.mark.parametrize("angle, expected", [
        (0.0, 0.0),
        (-PI / 2, 3 * PI / 2),
        (5 * PI, PI),
        (2 * PI, 0.0),
    ])
    def test_wrap_to_2pi(self, angle, expected):
        assert wrap_to_2pi(angle) == pytest.approx(expected, abs=1e-12)

    def test_wrap_to_2pi_never_returns_two_pi(self):
        assert wrap_to_2pi(-1e-300) < 2 * PI
        assert wrap_to_2pi(-1e-17) < 2 * PI

    @pytest.mark.parametrize("angle, expected", [
        (0.0, 0.0),
        (3 * PI / 2, -PI / 2),
        (-PI, -PI),
        (PI, -PI),
    ])
    def test_wrap_to_pm_pi(self, angle, expected):
        assert wrap_to_pm_pi(angle) == pytest.approx(expected, abs=1e-12)

    def test_wrap_to_pm_pi_odd_multiple(self):
        assert abs(wrap_to_pm_pi(-3 * PI)) == pytest.approx(PI, abs=1e-12)

    @pytest.mark.parametrize("angle, expected", [
        (PI, PI),
        (-PI / 2, PI / 2),
        (2 * PI, 0.0),
    ])
    def test_map_to_0_pi(self, angle, expected):
        assert map_to_0_pi(angle) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(ValueError):
            wrap_to_2pi(bad)

    def test_random_angles_land_in_range(self):
        rng = np.random.default_rng(3)
        for a in rng.uniform(-100.0, 100.0, 1000):
            w = wrap_to_2pi(a)
            assert 0.0 <= w < 2 * PI
            assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-9)
            assert -PI <= wrap_to_pm_pi(a) < PI

class TestDockingGeometry:

    @pytest.mark.parametrize("theta, delta_phi, expected", [
        (0.0, PI / 2, PI / 2),
        (0.0, -PI / 2, 3 * PI / 2),
        (PI, PI / 2, 3 * PI / 2),
    ])
    def test_docking_heading(self, theta, delta_phi, expected):
        heading = docking_heading(RobotState(0.0, 0.0, theta), DockingInterface(delta_phi, 0.1))
        assert heading == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("pose, delta_phi, expected", [
        ((0.0, 0.0, 0.0), 0.0, (0.1, 0.0)),
        ((0.0, 0.0, 0.0), PI / 2, (0.0, 0.1)),
        ((1.0, 2.0, PI / 2), -PI / 2, (1.1, 2.0)),
    ])
    def test_docking_point(self, pose, delta_phi, expected):
        point = docking_point(RobotState(*pose), DockingInterface(delta_phi, 0.1))
        np.testing.assert_allclose(point, expected, atol=1e-12)

    def test_docking_point_on_disk_margin(self):
        s = RobotState(0.3, -1.2, 2.0)
        px, py = docking_point(s, DockingInterface(1.0, 0.1))
        assert math.hypot(px - s.px, py - s.py) == pytest.approx(0.1)

    @pytest.mark.parametrize("delta_phi, radius", [(PI, 0.1), (0.0, 0.0), (0.0, -1.0)])
    def test_invalid_interface(self, delta_phi, radius):
        with pytest.raises(ValueError):
            DockingInterface(delta_phi, radius)

class TestStates:

    def test_heading_wrapped_on_construction(self):
        assert RobotState(0.0, 0.0, -PI / 2).theta == pytest.approx(3 * PI / 2)

    def test_non_finite_position_rejected(self):
        with pytest.raises(ValueError):
            RobotState(math.nan, 0.0, 0.0)
        with pytest.raises(ValueError):
            ControlInput(0.0, math.inf, 0.0)

    def test_central_state_array_layout(self):
        z = CentralState(RobotState(0.0, -2.0, 0.0), RobotState(0.0, 2.0, 1.0))
        np.testing.assert_array_equal(z.to_array(), [0.0, -2.0, 0.0, 0.0, 2.0, 1.0])
        assert CentralState.from_array(z.to_array()) == z
        assert z.distance == pytest.approx(4.0)

    def test_central_input_layout(self):
        nu = CentralInput.from_array([1, 2, 3, 4, 5, 6])
        assert nu.robot2.vy == 5.0
        np.testing.assert_array_equal(CentralInput.zero().to_array(), np.zeros(6))
