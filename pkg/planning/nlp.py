""" Module implementing the transcription of one receding-horizon instance

    Decision vector: the stacked inputs nu_0 .. nu_{N-1}, row-major (N, 6) with
    rows [v1x, v1y, w1, v2x, v2y, w2]. States are eliminated by single
    shooting, so the dynamics hold by construction.

    Constraint rows, all feasible when >= 0:
        corridor   N rows    gate per step k = 1..N (keep-out disk when uncoupled)
        cap_upper  4N rows   eps_max - residual, step-major, columns axis, align, dist, soft
        cap_lower  4N rows   eps_max + residual, same order
    The cap blocks only exist while the robots are coupled.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
import json
import logging
import math
from typing import List, Tuple

import numpy as np

import common.constants as const
from common.core_types import CentralInput, CentralState, RobotState
from common.helper import require_finite
from planning import dual
from planning.coupling import (CouplingParams, smooth_corridor, smooth_keep_out,
                               smooth_residuals)
from planning.dynamics import TimeStep, rollout
from planning.objective import (GoalState, TerminalWeights, WeightVector,
                                coupling_cost, input_smoothing_cost,
                                terminal_cost)

logger = logging.getLogger(__name__)

class CouplingMode(Enum):
    """ Which parts of the coupling problem are active """
    KEEP_OUT = "keep_out" # No coupling costs, full keep-out disk
    COUPLED = "coupled" # Coupling costs, corridor gate and slack caps
    SEPARATING = "separating" # No coupling costs, corridor gate only

    @classmethod
    def from_str(cls, value: str) -> "CouplingMode":
        """ Returns the mode for its name

            Raises:
                ValueError: If value names no mode
        """
        for mode in cls:
            if mode.value == value.lower():
                return mode
        raise ValueError(f"Unknown coupling mode: {value}")

@dataclass(frozen=True)
class SlackCaps:
    """ Bounds |residual| <= eps_max per coupling term """
    dist: float
    align: float
    soft: float
    axis: float

    def __post_init__(self):
        for name in ("dist", "align", "soft", "axis"):
            if require_finite(getattr(self, name), name) < 0.0:
                raise ValueError(f"slack cap {name} must be nonnegative")

    @classmethod
    def from_config_order(cls, values) -> "SlackCaps":
        """ Builds caps from (eps_dr, eps_dtheta, eps_dv, eps_dphi) """
        return cls(*[float(v) for v in values])

    def config_order(self) -> Tuple[float, float, float, float]:
        return (self.dist, self.align, self.soft, self.axis)

    def to_array(self) -> np.ndarray:
        """ Caps in residual column order: axis, align, dist, soft """
        return np.array([self.axis, self.align, self.dist, self.soft])

@dataclass(frozen=True)
class InputBounds:
    """ Symmetric box on the velocities of each robot """
    v_max: float
    omega_max: float

    def __post_init__(self):
        if require_finite(self.v_max, "v_max") <= 0.0 or require_finite(self.omega_max, "omega_max") <= 0.0:
            raise ValueError("input bounds must be positive")

    def upper(self, horizon: int) -> np.ndarray:
        row = [self.v_max, self.v_max, self.omega_max] * 2
        return np.tile(np.array(row), horizon)

    def clip(self, nu: np.ndarray) -> np.ndarray:
        upper = self.upper(1)
        return np.clip(nu, -upper, upper)

@dataclass(frozen=True)
class ProblemParams:
    """ Everything an instance needs apart from the current state and goal """
    coupling: CouplingParams
    weights: WeightVector
    terminal: TerminalWeights
    caps: SlackCaps
    dt: TimeStep
    horizon: int
    bounds: InputBounds
    mode: CouplingMode = CouplingMode.COUPLED

@dataclass(frozen=True, eq=False)
class NlpProblem:
    """ One horizon of the docking MPC with value and derivative evaluators """
    z0: np.ndarray
    goal: np.ndarray
    history: np.ndarray
    params: ProblemParams
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)

    @property
    def horizon(self) -> int:
        return self.params.horizon

    @property
    def n(self) -> int:
        return 6 * self.params.horizon

    @property
    def blocks(self) -> List[Tuple[str, int]]:
        """ Constraint blocks in row order """
        n_steps = self.params.horizon
        if self.params.mode is CouplingMode.COUPLED:
            return [("corridor", n_steps), ("cap_upper", 4 * n_steps), ("cap_lower", 4 * n_steps)]
        if self.params.mode is CouplingMode.SEPARATING:
            return [("corridor", n_steps)]
        return [("keep_out", n_steps)]

    @property
    def n_constraints(self) -> int:
        return sum(count for _, count in self.blocks)

    def _evaluate(self, u):
        prm = self.params
        states = rollout(self.z0, u, prm.dt)
        cost = (input_smoothing_cost(u, self.history, prm.weights, prm.dt)
                + terminal_cost(states[-1], self.goal, prm.terminal))
        if prm.mode is CouplingMode.COUPLED:
            res = smooth_residuals(states, u, prm.coupling)
            cost = cost + coupling_cost(res, prm.weights)
            caps = prm.caps.to_array()
            cons = dual.concatenate([smooth_corridor(states, prm.coupling),
                                     (caps - res).reshape(-1),
                                     (caps + res).reshape(-1)])
        elif prm.mode is CouplingMode.SEPARATING:
            cons = smooth_corridor(states, prm.coupling)
        else:
            cons = smooth_keep_out(states, prm.coupling)
        return cost, cons

    def values(self, x) -> Tuple[float, np.ndarray]:
        """ Objective and constraint values without derivatives """
        x = np.asarray(x, dtype=float)
        cost, cons = self._evaluate(x.reshape(self.horizon, 6))
        dual.check_finite(cost, "objective")
        dual.check_finite(cons, "constraint")
        return float(cost), np.asarray(cons, dtype=float)

    def evaluate(self, x) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
        """ Objective, gradient, constraint values and Jacobian from one dual pass """
        seeded = dual.Dual.variables(np.asarray(x, dtype=float)).reshape(self.horizon, 6)
        cost, cons = self._evaluate(seeded)
        dual.check_finite(cost, "objective")
        dual.check_finite(cons, "constraint")
        return float(cost.val), np.array(cost.der), np.array(cons.val), np.array(cons.der)

    def trajectory(self, x) -> np.ndarray:
        """ Predicted states z_1 .. z_N for a decision vector """
        return rollout(self.z0, np.asarray(x, dtype=float).reshape(self.horizon, 6),
                       self.params.dt)

def build_problem(z0: CentralState, goal: GoalState, params: ProblemParams,
                  history=None) -> NlpProblem:
    """ Builds one MPC instance.

        Args:
            - z0 (CentralState): Current plant state
            - goal (GoalState): Target of the horizon end
            - params (ProblemParams): Weights, caps, geometry, horizon and bounds
            - history: Two previously applied inputs, oldest first; zeros if None

        Returns:
            NlpProblem: Immutable instance

        Raises:
            ValueError: On a horizon below two steps or malformed history
    """
    if params.horizon < 2:
        raise ValueError(f"horizon must be at least 2 steps, got {params.horizon}")

    if history is None:
        hist = np.zeros((2, 6))
    else:
        hist = np.array([h.to_array() if isinstance(h, CentralInput) else h
                         for h in history], dtype=float)
        if hist.shape != (2, 6):
            raise ValueError(f"history must hold two stacked inputs, got shape {hist.shape}")

    upper = params.bounds.upper(params.horizon)
    return NlpProblem(z0=z0.to_array(), goal=goal.to_array(), history=hist,
                      params=params, lower=-upper, upper=upper)

def eval_objective(p: NlpProblem, x) -> Tuple[float, np.ndarray]:
    """ Returns objective value and exact gradient """
    cost, grad, _, _ = p.evaluate(x)
    return cost, grad

def eval_constraints(p: NlpProblem, x) -> Tuple[np.ndarray, np.ndarray]:
    """ Returns constraint values and exact Jacobian (rows x decision) """
    _, _, cons, jac = p.evaluate(x)
    return cons, jac

def check_gradient(p: NlpProblem, x, h: float = const.GRADIENT_CHECK_STEP) -> float:
    """ Compares the dual-number derivatives against central differences.

        Args:
            - p (NlpProblem): Instance to check
            - x: Decision vector
            - h (float): Finite difference step

        Returns:
            float: max |AD - FD| / (1 + |FD|) over the gradient and all Jacobian entries
    """
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    _, grad, _, jac = p.evaluate(x)

    fd_grad = np.zeros_like(grad)
    fd_jac = np.zeros_like(jac)
    for i in range(x.size):
        x_plus = x.copy()
        x_minus = x.copy()
        x_plus[i] += h
        x_minus[i] -= h
        f_plus, c_plus = p.values(x_plus)
        f_minus, c_minus = p.values(x_minus)
        fd_grad[i] = (f_plus - f_minus) / (2.0 * h)
        fd_jac[:, i] = (c_plus - c_minus) / (2.0 * h)

    err_grad = np.max(np.abs(grad - fd_grad) / (1.0 + np.abs(fd_grad)))
    err_jac = np.max(np.abs(jac - fd_jac) / (1.0 + np.abs(fd_jac)), initial=0.0)
    logger.debug("Gradient check: objective %.3e, constraints %.3e", err_grad, err_jac)
    return float(max(err_grad, err_jac))

def dump_problem(p: NlpProblem, x0, path: str) -> None:
    """ Writes layout, bounds and initial guess of an instance as JSON """
    prm = p.params
    document = {
        "horizon": prm.horizon,
        "dt": prm.dt.dt,
        "mode": prm.mode.value,
        "decision_layout": ["v1x", "v1y", "w1", "v2x", "v2y", "w2"],
        "n": p.n,
        "constraint_blocks": [{"name": name, "rows": count} for name, count in p.blocks],
        "lower": p.lower.tolist(),
        "upper": p.upper.tolist(),
        "z0": p.z0.tolist(),
        "goal": p.goal.tolist(),
        "history": p.history.tolist(),
        "slack_caps": list(prm.caps.config_order()),
        "x0": np.asarray(x0, dtype=float).tolist(),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)
    logger.info("Wrote problem dump to %s", path)

def default_params(mode: CouplingMode = CouplingMode.COUPLED,
                   horizon: int = const.HORIZON_STEPS) -> ProblemParams:
    """ Parameters of the built-in experiments """
    return ProblemParams(coupling=CouplingParams.default(), weights=WeightVector.default(),
                         terminal=TerminalWeights(const.TERMINAL_WEIGHTS),
                         caps=SlackCaps.from_config_order(const.SLACK_CAPS),
                         dt=TimeStep(const.TIME_STEP), horizon=horizon,
                         bounds=InputBounds(const.V_MAX, math.radians(const.OMEGA_MAX_DEG)),
                         mode=mode)

def random_instance(rng: np.random.Generator, horizon: int,
                    mode: CouplingMode = CouplingMode.COUPLED) -> Tuple[NlpProblem, np.ndarray]:
    """ Random separated instance with weights in [0, 1] and small inputs.

        Args:
            - rng (Generator): Random source
            - horizon (int): Steps N
            - mode (CouplingMode): Active constraint blocks

        Returns:
            (NlpProblem, ndarray): Instance and a decision vector in [-0.1, 0.1]
    """
    p1 = rng.uniform(-2.0, 2.0, 2)
    bearing = rng.uniform(-math.pi, math.pi)
    p2 = p1 + rng.uniform(1.5, 3.0) * np.array([math.cos(bearing), math.sin(bearing)])
    heading = rng.uniform(0.0, const.TWO_PI, 2)
    z0 = CentralState(RobotState(p1[0], p1[1], heading[0]), RobotState(p2[0], p2[1], heading[1]))
    goal = GoalState(CentralState.from_array(rng.uniform(-3.0, 3.0, 6)))
    params = replace(default_params(mode, horizon),
                     weights=WeightVector(*rng.uniform(0.0, 1.0, 6)),
                     terminal=TerminalWeights(tuple(rng.uniform(0.0, 1.0, 6))))
    problem = build_problem(z0, goal, params, history=rng.uniform(-0.1, 0.1, (2, 6)))
    return problem, rng.uniform(-0.1, 0.1, problem.n)
