""" Module implementing the closed-loop receding-horizon execution

    Each step builds one instance from the plant state, solves it warm-started
    from the shifted previous solution, applies the first input (saturated) for
    one time step and advances the event script. The robots are coupled between
    a couple and an uncouple event; outside of that they only keep their
    distance.
"""

from dataclasses import dataclass, field, replace
import logging
import math
from typing import List, Tuple

import numpy as np

import common.constants as const
from common.core_types import (CentralInput, CentralState, RobotState,
                               wrap_to_pm_pi)
from planning.coupling import (CoincidentRobotsError, CouplingParams,
                               ResidualVector, residual_vector)
from planning.dynamics import step_central
from planning.nlp import (CouplingMode, NlpProblem, ProblemParams,
                          build_problem)
from planning.objective import GoalState
from scenarios.config import EventKind, ScenarioConfig, ScriptEvent
from simulation.metrics import MetricsReport, compute_metrics
from simulation.phases import DockLatch, Phase, classify_phase, update_latch
from simulation.trajectory import (NO_SOLVE, ScenarioOutcome, SolveStats,
                                   StepRecord, TrajectoryLog)
from solver.auglag import SolveResult, solve
from solver.settings import SolverSettings

logger = logging.getLogger(__name__)

TIME_EPS = 1e-9

class SolverNumericError(RuntimeError):
    """ Raised when a solve leaves no finite input to apply """

@dataclass
class WarmStart:
    """ Solver memory carried from one MPC step to the next

        Args:
            - x (ndarray): Shifted previous solution, None for a cold start
            - multipliers (ndarray): Shifted previous multipliers
            - history (ndarray): Last two applied inputs, oldest first
            - failures (int): Consecutive non-converged solves
            - cold_restarts (int): Cold restarts so far
    """
    x: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    history: np.ndarray = field(default_factory=lambda: np.zeros((2, 6)))
    failures: int = 0
    cold_restarts: int = 0

def shift_solution(x: np.ndarray) -> np.ndarray:
    """ Drops the first input and repeats the last one """
    u = np.asarray(x, dtype=float).reshape(-1, 6)
    return np.vstack([u[1:], u[-1:]]).reshape(-1)

def shift_multipliers(lam: np.ndarray, p: NlpProblem) -> np.ndarray | None:
    """ Shifts each step-major constraint block by one step """
    if lam is None or lam.size != p.n_constraints:
        return None
    parts = []
    start = 0
    for _, count in p.blocks:
        block = lam[start:start + count].reshape(p.horizon, -1)
        parts.append(np.vstack([block[1:], block[-1:]]).reshape(-1))
        start += count
    return np.concatenate(parts) if parts else np.zeros(0)

def mpc_step(z: CentralState, goal: GoalState, params: ProblemParams,
             warm: WarmStart, settings: SolverSettings
             ) -> Tuple[CentralInput, SolveResult, np.ndarray]:
    """ Solves one horizon and returns the input to apply.

        Args:
            - z (CentralState): Plant state
            - goal (GoalState): Target of the horizon end
            - params (ProblemParams): Instance parameters, mode included
            - warm (WarmStart): Previous solution and applied inputs
            - settings (SolverSettings): Per-step solver budget

        Returns:
            (CentralInput, SolveResult, ndarray): Saturated first input, the
            solve result and the predicted states z_1 .. z_N

        Raises:
            SolverNumericError: If the solve produced no finite iterate
    """
    problem = build_problem(z, goal, params, history=warm.history)
    x0 = warm.x if warm.x is not None and warm.x.size == problem.n else np.zeros(problem.n)
    result = solve(problem, x0, settings, multipliers=warm.multipliers)
    if not np.all(np.isfinite(result.x)):
        raise SolverNumericError(f"solve ended with status {result.status.value} and no finite iterate")
    if not result.converged:
        logger.warning("Solve not converged (%s), max violation %.2e, applying best iterate",
                       result.status.value, result.max_violation)
    applied = CentralInput.from_array(params.bounds.clip(result.x[:6]))
    return applied, result, problem.trajectory(result.x)

def next_warm_start(warm: WarmStart, result: SolveResult, params: ProblemParams,
                    z: CentralState, goal: GoalState, applied: CentralInput) -> WarmStart:
    """ Builds the warm start of the following step.

        Note:
            MAX_CONSECUTIVE_FAILURES non-converged solves in a row drop the
            warm start and restart the solver from zero inputs.
    """
    history = np.vstack([warm.history[1], applied.to_array()])
    failures = 0 if result.converged else warm.failures + 1
    if failures >= const.MAX_CONSECUTIVE_FAILURES:
        logger.warning("%d failed solves in a row, cold restart", failures)
        return WarmStart(history=history, cold_restarts=warm.cold_restarts + 1)
    problem = build_problem(z, goal, params, history=warm.history)
    return WarmStart(x=shift_solution(result.x),
                     multipliers=shift_multipliers(result.multipliers, problem),
                     history=history, failures=failures, cold_restarts=warm.cold_restarts)

def docked_partner_pose(pose: RobotState, p: CouplingParams) -> RobotState:
    """ Pose of robot 2 docked to robot 1 at pose """
    th1d = pose.theta + p.iface1.delta_phi
    return RobotState(pose.px + p.delta_r * math.cos(th1d),
                      pose.py + p.delta_r * math.sin(th1d),
                      th1d + math.pi - p.iface2.delta_phi)

def _exact_residuals(z: CentralState, nu: CentralInput, p: CouplingParams) -> ResidualVector:
    try:
        return residual_vector(z, nu, p)
    except CoincidentRobotsError:
        logger.warning("Robot centers coincide, residuals undefined")
        return ResidualVector(math.nan, math.nan, math.nan, math.nan)

class _Script:
    """ Progress through the event script

        Consecutive goto events form one segment and run as per-robot queues;
        couple, transfer and uncouple are barriers that wait for both queues.
    """

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.events = list(config.script)
        self.index = 0
        self.queues: List[List[ScriptEvent]] = [[], []]
        self.goals = [config.initial.robot1, config.initial.robot2]
        self.tolerances = [config.goal_tolerance.position] * 2
        self.mode = CouplingMode.KEEP_OUT
        self.coupling_goal = False
        self.finished = False

    def _reached(self, z: CentralState, robot: int) -> bool:
        state = z.robot1 if robot == 0 else z.robot2
        goal = self.goals[robot]
        near = math.hypot(state.px - goal.px, state.py - goal.py) <= self.tolerances[robot]
        aligned = abs(wrap_to_pm_pi(state.theta - goal.theta)) <= self.config.goal_tolerance.heading
        return near and aligned

    def _set_goal(self, robot: int, event: ScriptEvent) -> None:
        self.goals[robot] = event.target()
        self.tolerances[robot] = event.tolerance or self.config.goal_tolerance.position

    def drop_unfinished(self, log: TrajectoryLog) -> None:
        """ Clears the completion time of every robot with work left """
        barrier_left = self.index < len(self.events) or self.coupling_goal
        for robot in (0, 1):
            if barrier_left or self.queues[robot]:
                log.completion[robot] = None

    def advance(self, z: CentralState, t: float, latch: DockLatch, log: TrajectoryLog) -> DockLatch:
        """ Consumes every event that is complete at time t """
        while True:
            pending = False
            for robot in (0, 1):
                while self.queues[robot] and self._reached(z, robot):
                    self.queues[robot].pop(0)
                    log.completion[robot] = t
                    logger.info("Robot %d reached (%.2f, %.2f) at t=%.2f s", robot + 1,
                                self.goals[robot].px, self.goals[robot].py, t)
                    if self.queues[robot]:
                        self._set_goal(robot, self.queues[robot][0])
                pending = pending or bool(self.queues[robot])
            if pending:
                return latch

            if self.index == len(self.events):
                # Drained goto queues end the script, a pair goal needs both robots in place
                if not self.coupling_goal or all(self._reached(z, robot) for robot in (0, 1)):
                    for robot in (0, 1):
                        if log.completion[robot] is None or self.coupling_goal:
                            log.completion[robot] = t
                    self.finished = True
                return latch

            event = self.events[self.index]
            if event.kind is EventKind.GOTO:
                while self.index < len(self.events) and self.events[self.index].kind is EventKind.GOTO:
                    ev = self.events[self.index]
                    self.queues[ev.robot - 1].append(ev)
                    self.index += 1
                for robot in (0, 1):
                    if self.queues[robot]:
                        self._set_goal(robot, self.queues[robot][0])
                self.coupling_goal = False
                continue

            if event.kind is EventKind.COUPLE:
                if self.mode is not CouplingMode.COUPLED:
                    pose = event.target()
                    self.goals = [pose, docked_partner_pose(pose, self.config.coupling)]
                    self.tolerances = [self.config.goal_tolerance.position] * 2
                    self.mode = CouplingMode.COUPLED
                    self.coupling_goal = True
                    logger.info("Coupling started at t=%.2f s, pair goal (%.2f, %.2f)",
                                t, pose.px, pose.py)
                if not latch.docked:
                    return latch
            elif event.kind is EventKind.TRANSFER:
                if t - latch.dock_time < event.duration - TIME_EPS:
                    return latch
            elif event.kind is EventKind.UNCOUPLE:
                self.mode = CouplingMode.SEPARATING
                log.undock_times.append(t)
                logger.info("Uncoupled at t=%.2f s", t)
                latch = latch.release()
            self.index += 1

def _params(config: ScenarioConfig, mode: CouplingMode, latch: DockLatch) -> ProblemParams:
    coupled = mode is CouplingMode.COUPLED
    return ProblemParams(coupling=config.coupling,
                         weights=config.weights if coupled else config.weights.without_coupling(),
                         terminal=config.terminal,
                         caps=config.docked_caps if latch.docked else config.caps,
                         dt=config.dt, horizon=config.horizon, bounds=config.bounds,
                         mode=mode)

def run_scenario(config: ScenarioConfig) -> Tuple[TrajectoryLog, MetricsReport]:
    """ Runs the closed loop until the script is done or the timeout hits.

        Args:
            - config (ScenarioConfig): Scenario to run

        Returns:
            (TrajectoryLog, MetricsReport): Log with one record per step plus
            the final state, and the metrics computed from it

        Raises:
            SolverNumericError: If a solve leaves nothing finite to apply
    """
    log = TrajectoryLog(name=config.name, dt=config.dt.dt)
    script = _Script(config)
    latch = DockLatch(config.latch)
    warm = WarmStart()
    rng = np.random.default_rng(config.seed)
    z = config.initial
    applied = CentralInput.zero()
    phase_floor = Phase.FAR_RANGE_RENDEZVOUS
    logger.info("Running scenario %s, %d events", config.name, len(config.script))

    k = 0
    t = 0.0
    latch = script.advance(z, t, latch, log)
    while not script.finished:
        if t >= config.timeout - TIME_EPS:
            log.outcome = ScenarioOutcome.TIMEOUT
            script.drop_unfinished(log)
            logger.warning("Scenario %s timed out at t=%.2f s", config.name, t)
            break

        if script.mode is not CouplingMode.COUPLED:
            phase_floor = Phase.FAR_RANGE_RENDEZVOUS
        goal = GoalState(CentralState(*script.goals))
        params = _params(config, script.mode, latch)
        applied, result, _ = mpc_step(z, goal, params, warm, config.solver)
        warm = next_warm_start(warm, result, params, z, goal, applied)
        log.solves.append(SolveStats(result.status.value, result.outer_iterations,
                                     result.inner_iterations, result.wall_time))

        phase = Phase.FAR_RANGE_RENDEZVOUS
        if script.mode is CouplingMode.COUPLED:
            phase = max(phase_floor, classify_phase(z, applied, config.coupling, latch,
                                                    config.close_range_d))
            phase_floor = phase
        log.append(StepRecord(t, z, applied, _exact_residuals(z, applied, config.coupling),
                              phase, result.status.value))
        logger.debug("t=%.2f d=%.3f phase=%s status=%s", t, z.distance, phase.label,
                     result.status.value)

        plant_input = applied
        if config.disturbance > 0.0:
            noise = rng.normal(0.0, config.disturbance, 6) * np.array([1, 1, 0, 1, 1, 0])
            plant_input = CentralInput.from_array(applied.to_array() + noise)
        z = step_central(z, plant_input, config.dt)
        k += 1
        t = k * config.dt.dt

        if script.mode is CouplingMode.COUPLED and not latch.docked:
            latch = update_latch(z, applied, latch, config.coupling, t)
            if latch.docked:
                log.dock_times.append(t)
                # Docked caps take over from the next instance
                warm = replace(warm, multipliers=None)
        elif script.mode is CouplingMode.SEPARATING and z.distance >= config.coupling.r_ca:
            script.mode = CouplingMode.KEEP_OUT
            warm = replace(warm, multipliers=None)
        latch = script.advance(z, t, latch, log)

    if script.mode is CouplingMode.COUPLED:
        final_phase = max(phase_floor, classify_phase(z, CentralInput.zero(), config.coupling,
                                                      latch, config.close_range_d))
    else:
        final_phase = Phase.FAR_RANGE_RENDEZVOUS
    log.append(StepRecord(t, z, CentralInput.zero(),
                          _exact_residuals(z, CentralInput.zero(), config.coupling),
                          final_phase, NO_SOLVE))
    log.cold_restarts = warm.cold_restarts
    return log, compute_metrics(log, config.rotational_weight)
