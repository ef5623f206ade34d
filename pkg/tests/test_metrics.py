import numpy as np
import pytest

from common.core_types import CentralInput, CentralState, RobotState
from planning.coupling import ResidualVector
from simulation.metrics import compute_metrics
from simulation.phases import Phase
from simulation.trajectory import (ScenarioOutcome, SolveStats, StepRecord,
                                   TrajectoryLog)

DT = 0.25
ZERO_RES = ResidualVector(0.0, 0.0, 0.0, 0.0)

def _record(t, p1, p2, u):
    z = CentralState(RobotState(p1[0], p1[1], 0.0), RobotState(p2[0], p2[1], 0.0))
    return StepRecord(t=t, state=z, applied=CentralInput.from_array(u), residuals=ZERO_RES,
                      phase=Phase.CLOSING, solver_status="converged")

def _straight_run(steps=40, speed=1.0):
    """ Robot 1 drives along x at constant speed, robot 2 stands still """
    log = TrajectoryLog(name="straight", dt=DT)
    for k in range(steps):
        log.append(_record(k * DT, (k * DT * speed, 0.0), (0.0, 5.0), [speed, 0, 0, 0, 0, 0]))
    log.append(_record(steps * DT, (steps * DT * speed, 0.0), (0.0, 5.0), np.zeros(6)))
    return log

class TestTrajectoryLog:

    def test_time_must_increase(self):
        log = _straight_run(steps=2)
        with pytest.raises(ValueError):
            log.append(_record(0.25, (0.0, 0.0), (0.0, 5.0), np.zeros(6)))

    def test_arrays(self):
        log = _straight_run(steps=4)
        assert len(log) == 5
        assert log.duration == pytest.approx(1.0)
        assert log.states().shape == (5, 6)
        assert log.inputs()[-1].sum() == 0.0
        assert log.residuals().shape == (5, 4)
        np.testing.assert_allclose(log.times(), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_empty(self):
        log = TrajectoryLog(name="empty", dt=DT)
        assert log.duration == 0.0
        assert log.states().shape == (0, 6)

class TestMetrics:

    def test_stationary_run(self):
        log = TrajectoryLog(name="still", dt=DT)
        for k in range(9):
            log.append(_record(k * DT, (0.0, 0.0), (1.0, 1.0), np.zeros(6)))
        report = compute_metrics(log)
        assert [r.time for r in report.robots] == [2.0, 2.0]
        assert report.total_energy == 0.0
        assert report.total_distance == 0.0

    def test_constant_speed(self):
        report = compute_metrics(_straight_run())
        r1, r2 = report.robots
        assert r1.distance == pytest.approx(10.0)
        assert r1.energy == pytest.approx(10.0)
        assert (r2.distance, r2.energy) == (0.0, 0.0)
        assert report.total_distance == pytest.approx(10.0)
        assert report.total_energy == pytest.approx(10.0)
        assert report.total_time == pytest.approx(10.0)

    def test_totals_add_up(self):
        log = TrajectoryLog(name="mixed", dt=DT)
        u = [0.7, 0.0, 0.3, -0.2, 0.1, -0.5]
        for k in range(13):
            log.append(_record(k * DT, (0.7 * k * DT, 0.0), (-0.2 * k * DT, 5.0 + 0.1 * k * DT), u))
        log.completion = [1.75, 3.0]
        report = compute_metrics(log, rotational_weight=0.4)
        assert report.total_energy == pytest.approx(sum(r.energy for r in report.robots), abs=1e-9)
        assert report.total_distance == pytest.approx(sum(r.distance for r in report.robots),
                                                      abs=1e-9)
        assert report.total_time == max(r.time for r in report.robots)
        assert report.total_time == pytest.approx(3.0)

    def test_rotational_weight(self):
        log = TrajectoryLog(name="spin", dt=DT)
        for k in range(4):
            log.append(_record(k * DT, (0.0, 0.0), (1.0, 1.0), [0, 0, 2.0, 0, 0, 0]))
        assert compute_metrics(log).total_energy == 0.0
        assert compute_metrics(log, rotational_weight=0.5).total_energy == pytest.approx(2.0)

    def test_completion_times_and_makespan(self):
        log = _straight_run()
        log.completion = [4.0, None]
        report = compute_metrics(log)
        assert report.robots[0].time == pytest.approx(4.0)
        assert report.robots[1].time == pytest.approx(10.0)
        assert report.total_time == pytest.approx(10.0)

    def test_events_and_solver_stats(self):
        log = _straight_run(steps=2)
        log.dock_times = [0.25]
        log.outcome = ScenarioOutcome.TIMEOUT
        log.cold_restarts = 1
        log.solves = [SolveStats("converged", 2, 30, 0.1), SolveStats("max_iter", 4, 50, 0.3)]
        report = compute_metrics(log)
        assert report.outcome == "timeout"
        assert report.dock_times == [0.25]
        assert report.solver["solves"] == 2
        assert report.solver["converged"] == 1
        assert report.solver["max_iter"] == 1
        assert report.solver["mean_inner_iterations"] == pytest.approx(40.0)
        assert report.solver["wall_time"] == pytest.approx(0.4)
        assert report.solver["cold_restarts"] == 1
        assert report.to_dict()["robots"][0]["distance"] == pytest.approx(0.5)

    def test_empty_log_rejected(self):
        with pytest.raises(ValueError):
            compute_metrics(TrajectoryLog(name="empty", dt=DT))
