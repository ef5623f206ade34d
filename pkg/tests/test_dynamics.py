import math

import numpy as np
import pytest

from common.core_types import (CentralInput, CentralState, ControlInput,
                               RobotState, wrap_to_2pi)
from planning.dynamics import TimeStep, rollout, step_central, step_single

DT = TimeStep(0.25)

@pytest.mark.parametrize("x, u, expected", [
    ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.25, 0.0, 0.0)),
    ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
    ((1.0, 1.0, math.pi), (-1.0, 2.0, math.pi), (0.75, 1.5, wrap_to_2pi(1.25 * math.pi))),
])
def test_step_single(x, u, expected):
    nxt = step_single(RobotState(*x), ControlInput(*u), DT)
    np.testing.assert_allclose([nxt.px, nxt.py, nxt.theta], expected, atol=1e-12)

def test_step_central_is_decoupled():
    z = CentralState(RobotState(0.0, -2.0, 0.0), RobotState(0.0, 2.0, 0.0))
    assert step_central(z, CentralInput.zero(), DT) == z
    moved = step_central(z, CentralInput.from_array([1, 0, 0, 0, 0, 0]), DT)
    assert moved.robot2 == z.robot2
    both = step_central(z, CentralInput.from_array([1, 0, 0, 1, 0, 0]), DT)
    assert both.robot1.px == pytest.approx(0.25)
    assert both.robot2.px == pytest.approx(0.25)

@pytest.mark.parametrize("dt", [0.0, -0.1, math.nan])
def test_invalid_time_step(dt):
    with pytest.raises(ValueError):
        TimeStep(dt)

class TestRollout:

    def test_zero_inputs_keep_state(self):
        z0 = CentralState(RobotState(0.0, -2.0, 0.0), RobotState(0.0, 2.0, 0.0))
        states = rollout(z0, np.zeros((20, 6)), DT)
        np.testing.assert_array_equal(states, np.tile(z0.to_array(), (20, 1)))

    def test_constant_velocity_displacement(self):
        z0 = np.zeros(6)
        u = np.tile([1.0, 0.0, 0.0, 1.0, 0.0, 0.0], (20, 1))
        states = rollout(z0, u, DT)
        assert states[-1, 0] == pytest.approx(5.0)
        assert states[-1, 3] == pytest.approx(5.0)

    def test_matches_repeated_steps(self):
        rng = np.random.default_rng(7)
        z0 = CentralState(RobotState(0.1, -0.4, 1.0), RobotState(2.0, 0.5, 4.0))
        u = rng.uniform(-1.0, 1.0, (12, 6))
        states = rollout(z0, [CentralInput.from_array(row) for row in u], DT)
        z = z0
        for k in range(12):
            z = step_central(z, CentralInput.from_array(u[k]), DT)
            np.testing.assert_array_equal(states[k, [0, 1, 3, 4]], z.to_array()[[0, 1, 3, 4]])
            assert wrap_to_2pi(states[k, 2]) == pytest.approx(z.robot1.theta, abs=1e-12)

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            rollout(np.zeros(6), np.zeros((0, 6)), DT)
