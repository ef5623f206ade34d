from dataclasses import replace
import math

import numpy as np
import pytest

from common.core_types import CentralInput, CentralState, RobotState
from planning.coupling import CouplingParams
from planning.nlp import (CouplingMode, SlackCaps, build_problem,
                          default_params)
from planning.objective import GoalState
from scenarios.config import ScenarioConfig, ScriptEvent
from scenarios.presets import preset
from simulation.executor import (WarmStart, docked_partner_pose, mpc_step,
                                 next_warm_start, run_scenario,
                                 shift_multipliers, shift_solution)
from simulation.trajectory import NO_SOLVE, ScenarioOutcome
from solver.auglag import SolveResult, SolveStatus
from solver.settings import SolverSettings

P = CouplingParams.default()
DOCKED = CentralState(RobotState(0.0, 0.0, 0.0), RobotState(0.0, 0.2, 0.0))
EXP1 = CentralState(RobotState(0.0, -2.0, 0.0), RobotState(0.0, 2.0, 0.0))

def _result(status, n=30, n_cons=5):
    return SolveResult(x=np.arange(float(n)), objective=0.0, max_violation=0.0, status=status,
                       outer_iterations=1, inner_iterations=1, wall_time=0.0,
                       multipliers=np.ones(n_cons), pg_norm=0.0)

class TestWarmStart:

    def test_shift_solution(self):
        shifted = shift_solution(np.arange(18.0)).reshape(3, 6)
        np.testing.assert_array_equal(shifted[:, 0], [6.0, 12.0, 12.0])

    def test_shift_multipliers_per_block(self):
        p = build_problem(EXP1, GoalState(EXP1), default_params(horizon=3))
        lam = np.arange(27.0)
        shifted = shift_multipliers(lam, p)
        np.testing.assert_array_equal(shifted[:3], [1.0, 2.0, 2.0])
        np.testing.assert_array_equal(shifted[3:7], lam[7:11])
        np.testing.assert_array_equal(shifted[11:15], lam[11:15])
        np.testing.assert_array_equal(shifted[15:19], lam[19:23])
        assert shift_multipliers(np.zeros(5), p) is None

    def test_two_failures_restart_cold(self):
        params = default_params(CouplingMode.KEEP_OUT, horizon=5)
        applied = CentralInput.from_array([0.1, 0, 0, 0, 0, 0])
        warm = next_warm_start(WarmStart(), _result(SolveStatus.MAX_ITER), params, EXP1,
                               GoalState(EXP1), applied)
        assert warm.failures == 1 and warm.x is not None
        np.testing.assert_array_equal(warm.multipliers, np.ones(5))
        warm = next_warm_start(warm, _result(SolveStatus.MAX_ITER), params, EXP1,
                               GoalState(EXP1), applied)
        assert warm.x is None and warm.multipliers is None
        assert warm.cold_restarts == 1
        np.testing.assert_array_equal(warm.history, np.tile(applied.to_array(), (2, 1)))

    def test_success_resets_failures(self):
        params = default_params(CouplingMode.KEEP_OUT, horizon=5)
        warm = next_warm_start(WarmStart(failures=1), _result(SolveStatus.CONVERGED), params,
                               EXP1, GoalState(EXP1), CentralInput.zero())
        assert warm.failures == 0

def test_docked_partner_pose():
    pose = docked_partner_pose(RobotState(0.0, 0.0, 0.0), P)
    assert (pose.px, pose.py) == pytest.approx((0.0, 0.2), abs=1e-12)
    assert math.cos(pose.theta) == pytest.approx(1.0)

class TestMpcStep:

    def test_docked_at_goal_stays(self):
        applied, result, predicted = mpc_step(DOCKED, GoalState(DOCKED), default_params(horizon=5),
                                              WarmStart(), SolverSettings.for_mpc())
        assert result.converged
        np.testing.assert_array_equal(applied.to_array(), np.zeros(6))
        assert predicted.shape == (5, 6)

    def test_docked_pair_moves_together(self):
        goal = GoalState(CentralState(RobotState(1.0, 0.0, 0.0), RobotState(1.0, 0.2, 0.0)))
        params = default_params(horizon=5)
        params = replace(params, caps=SlackCaps.from_config_order((0.01, 0.05, 0.01, 0.05)))
        applied, _, _ = mpc_step(DOCKED, goal, params, WarmStart(), SolverSettings.for_mpc())
        u = applied.to_array()
        assert u[0] > 0.0 and u[3] > 0.0
        assert math.hypot(u[0] - u[3], u[1] - u[4]) < 0.12

    def test_exp1_prediction_closes_distance(self):
        goal = GoalState(CentralState(RobotState(4.0, 0.0, 0.0),
                                      docked_partner_pose(RobotState(4.0, 0.0, 0.0), P)))
        applied, result, predicted = mpc_step(EXP1, goal, default_params(), WarmStart(),
                                              SolverSettings.for_mpc())
        d_end = math.hypot(predicted[-1, 3] - predicted[-1, 0], predicted[-1, 4] - predicted[-1, 1])
        assert result.inner_iterations > 0
        assert np.linalg.norm(applied.to_array()) > 0.1
        assert d_end < 2.0

class TestRunScenario:

    def test_nothing_to_do(self):
        config = ScenarioConfig(name="idle", initial=EXP1, script=())
        log, report = run_scenario(config)
        assert len(log) == 1
        assert log.records[0].solver_status == NO_SOLVE
        assert log.outcome is ScenarioOutcome.COMPLETED
        assert report.total_time == 0.0 and report.total_energy == 0.0
        assert report.solver["solves"] == 0

    def test_single_goto(self):
        config = ScenarioConfig(name="short", horizon=8, timeout=15.0,
                                initial=CentralState(RobotState(0.0, 0.0, 0.0),
                                                     RobotState(0.0, 3.0, 0.0)),
                                script=(ScriptEvent.goto(1, 0.5, 0.0, 0.0),))
        log, report = run_scenario(config)
        assert log.outcome is ScenarioOutcome.COMPLETED
        final = log.records[-1].state.robot1
        assert math.hypot(final.px - 0.5, final.py) <= 0.05
        assert log.completion[0] is not None
        np.testing.assert_allclose(log.times(), np.arange(len(log)) * 0.25)
        assert log.records[-1].solver_status == NO_SOLVE
        assert report.solver["solves"] == len(log) - 1
        assert report.robots[0].distance >= 0.45

    def test_timeout(self):
        config = replace(preset("exp1"), timeout=0.5, horizon=5)
        log, report = run_scenario(config)
        assert log.outcome is ScenarioOutcome.TIMEOUT
        assert report.outcome == "timeout"
        assert len(log) == 3
        assert log.dock_times == []

    def test_shared_delivery_point_completes(self):
        # Robot 1 parks on the point robot 2 delivers to from the keep-out rim
        config = ScenarioConfig(name="shared", horizon=8, timeout=15.0,
                                initial=CentralState(RobotState(0.0, 0.0, 0.0),
                                                     RobotState(2.0, 0.0, 0.0)),
                                script=(ScriptEvent.goto(1, 0.0, 0.0, 0.0),
                                        ScriptEvent.goto(2, 0.0, 0.0, 0.0, tolerance=0.5)))
        log, report = run_scenario(config)
        assert log.outcome is ScenarioOutcome.COMPLETED
        final = log.records[-1].state.robot2
        assert math.hypot(final.px, final.py) <= 0.5
        assert report.robots[0].time == 0.0
        assert report.robots[1].time == pytest.approx(log.duration)

    def test_unfinished_robot_counts_the_whole_run(self):
        config = ScenarioConfig(name="far", horizon=5, timeout=1.0,
                                initial=CentralState(RobotState(0.0, 0.0, 0.0),
                                                     RobotState(0.0, 3.0, 0.0)),
                                script=(ScriptEvent.goto(1, 0.0, 0.0, 0.0),
                                        ScriptEvent.goto(2, 10.0, 3.0, 0.0)))
        log, report = run_scenario(config)
        assert log.outcome is ScenarioOutcome.TIMEOUT
        assert log.completion == [0.0, None]
        assert report.robots[0].time == 0.0
        assert report.robots[1].time == pytest.approx(log.duration)
        assert report.total_time == pytest.approx(1.0)

    def test_disturbance_is_seeded(self):
        base = replace(preset("exp1"), timeout=0.5, horizon=5, disturbance=0.05)
        first, _ = run_scenario(replace(base, seed=1))
        again, _ = run_scenario(replace(base, seed=1))
        other, _ = run_scenario(replace(base, seed=2))
        np.testing.assert_array_equal(first.states(), again.states())
        assert not np.array_equal(first.states(), other.states())
