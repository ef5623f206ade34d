import math

import pytest

from common.core_types import CentralInput, CentralState, RobotState
from planning.coupling import CouplingParams
from simulation.phases import (DockLatch, LatchCheck, LatchThresholds, Phase,
                               classify_phase, latch_checks, update_latch)

P = CouplingParams.default()
STILL = CentralInput.zero()

def _pair(p2, theta2=0.0):
    return CentralState(RobotState(0.0, 0.0, 0.0), RobotState(p2[0], p2[1], theta2))

def _polar(d, off_axis_deg):
    # robot 1 docks along +y at theta 0
    a = math.pi / 2 + math.radians(off_axis_deg)
    return _pair((d * math.cos(a), d * math.sin(a)))

class TestPhase:

    def test_ordering(self):
        assert Phase.FAR_RANGE_RENDEZVOUS < Phase.CLOSING < Phase.FINAL_APPROACH < Phase.DOCKED

    @pytest.mark.parametrize("phase", list(Phase))
    def test_labels(self, phase):
        assert Phase.from_str(phase.label) is phase

    def test_unknown_label(self):
        with pytest.raises(ValueError):
            Phase.from_str("Hovering")

    @pytest.mark.parametrize("z, expected", [
        (_pair((0.0, 4.0)), Phase.CLOSING),
        (_polar(4.0, 90.0), Phase.FAR_RANGE_RENDEZVOUS),
        (_polar(0.5, 10.0), Phase.FINAL_APPROACH),
        (_polar(0.5, 20.0), Phase.FAR_RANGE_RENDEZVOUS),
        (_pair((0.0, 1.5)), Phase.CLOSING),
    ])
    def test_classify(self, z, expected):
        assert classify_phase(z, STILL, P, DockLatch()) is expected

    def test_latched_is_docked_anywhere(self):
        latch = DockLatch(docked=True, dock_time=3.0)
        assert classify_phase(_polar(4.0, 90.0), STILL, P, latch) is Phase.DOCKED

    def test_close_range_boundary_is_configurable(self):
        z = _pair((0.0, 1.5))
        assert classify_phase(z, STILL, P, DockLatch(), close_range_d=2.0) is Phase.FINAL_APPROACH

class TestLatch:

    def test_sets_at_docked_pose(self):
        latch = update_latch(_pair((0.0, 0.2)), STILL, DockLatch(), P, t=3.5)
        assert latch.docked
        assert latch.dock_time == 3.5
        assert latch.checks == LatchCheck.all_mask()

    def test_clear_with_misalignment(self):
        latch = update_latch(_pair((0.0, 0.2), theta2=math.radians(10.0)), STILL, DockLatch(), P)
        assert not latch.docked
        assert LatchCheck.describe(latch.checks) == "AXIS,DISTANCE,SPEED"

    def test_clear_while_moving_apart(self):
        moving = CentralInput.from_array([0.0, -0.1, 0.0, 0.0, 0.1, 0.0])
        latch = update_latch(_pair((0.0, 0.2)), moving, DockLatch(), P)
        assert not latch.docked
        assert not latch.checks & (1 << LatchCheck.SPEED.value)

    def test_thresholds_are_closed(self):
        th = LatchThresholds()
        z = _pair((0.0, 0.2 + th.distance))
        nu = CentralInput.from_array([th.speed, 0.0, 0.0, 0.0, 0.0, 0.0])
        assert latch_checks(z, nu, P, th) == LatchCheck.all_mask()

    def test_set_latch_stays_set(self):
        latch = update_latch(_pair((0.0, 0.2)), STILL, DockLatch(), P, t=1.0)
        again = update_latch(_polar(3.0, 90.0), STILL, latch, P, t=2.0)
        assert again.docked and again.dock_time == 1.0

    def test_release(self):
        latch = update_latch(_pair((0.0, 0.2)), STILL, DockLatch(), P, t=1.0)
        released = latch.release()
        assert not released.docked
        assert released.dock_time is None
        assert released.thresholds == latch.thresholds

    def test_masks(self):
        assert LatchCheck.all_mask() == 0b1111
        assert LatchCheck.describe(0) == "-"
        assert LatchCheck.describe(0b0101) == "AXIS,DISTANCE"

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            LatchThresholds(speed=-0.1)
