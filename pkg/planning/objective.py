""" Module implementing the cost terms of the docking MPC

    All functions take arrays (or Duals) so the NLP can evaluate them with
    derivatives; the typed sequences of the public interface are converted on
    entry.
"""

from dataclasses import dataclass, fields
import logging
from typing import Tuple

import numpy as np

import common.constants as const
from common.core_types import CentralInput, CentralState
from common.helper import require_finite
from planning import dual
from planning.coupling import ResidualVector
from planning.dynamics import TimeStep

logger = logging.getLogger(__name__)

TRANSLATIONAL = [0, 1, 3, 4] # vx, vy of both robots
ROTATIONAL = [2, 5] # omega of both robots
HEADINGS = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 1.0])

def _check_weights(obj) -> None:
    for item in fields(obj):
        if require_finite(getattr(obj, item.name), item.name) < 0.0:
            raise ValueError(f"{item.name} must be nonnegative, got {getattr(obj, item.name)}")

@dataclass(frozen=True)
class WeightVector:
    """ Weights of the coupling slacks and of the input smoothing """
    lambda_dr: float
    lambda_dtheta: float
    lambda_dv: float
    lambda_dphi: float
    lambda_j: float
    lambda_omega: float

    def __post_init__(self):
        _check_weights(self)

    @classmethod
    def default(cls) -> "WeightVector":
        return cls(*const.COUPLING_WEIGHTS, *const.SMOOTHING_WEIGHTS)

    def coupling_array(self) -> np.ndarray:
        """ Slack weights in residual column order: axis, align, dist, soft """
        return np.array([self.lambda_dphi, self.lambda_dtheta, self.lambda_dr, self.lambda_dv])

    def without_coupling(self) -> "WeightVector":
        return WeightVector(0.0, 0.0, 0.0, 0.0, self.lambda_j, self.lambda_omega)

    def scaled(self, c: float) -> "WeightVector":
        return WeightVector(*(c * getattr(self, f.name) for f in fields(self)))

@dataclass(frozen=True)
class TerminalWeights:
    """ Per state dimension weights of the end cost, layout of CentralState """
    weights: Tuple[float, float, float, float, float, float]

    def __post_init__(self):
        if len(self.weights) != 6:
            raise ValueError(f"terminal weights need six entries, got {len(self.weights)}")
        values = tuple(require_finite(w, "terminal weight") for w in self.weights)
        if min(values) < 0.0:
            raise ValueError("terminal weights must be nonnegative")
        object.__setattr__(self, "weights", values)

    def to_array(self) -> np.ndarray:
        return np.array(self.weights)

@dataclass(frozen=True)
class GoalState:
    """ Target state of the horizon end """
    target: CentralState

    def to_array(self) -> np.ndarray:
        return self.target.to_array()

def _as_residuals(slacks):
    if isinstance(slacks, (np.ndarray, dual.Dual)):
        return slacks
    return np.array([s.to_array() if isinstance(s, ResidualVector) else s
                     for s in slacks], dtype=float).reshape(-1, 4)

def _as_inputs(inputs):
    if isinstance(inputs, (np.ndarray, dual.Dual)):
        return inputs
    return np.array([nu.to_array() if isinstance(nu, CentralInput) else nu
                     for nu in inputs], dtype=float).reshape(-1, 6)

def coupling_cost(slacks, w: WeightVector):
    """ Weighted sum of the squared slacks over the horizon.

        Args:
            - slacks: Sequence of ResidualVector or (N, 4) array in column
              order axis, align, dist, soft
            - w (WeightVector): Slack weights

        Returns:
            Cost, float or Dual
    """
    res = _as_residuals(slacks)
    return (res * res * w.coupling_array()).sum()

def input_smoothing_cost(inputs, history, w: WeightVector, dt: TimeStep):
    """ Penalizes second differences of the translational velocities and first
        differences of the angular velocities.

        Args:
            - inputs: Sequence of CentralInput or (N, 6) array
            - history: The two previously applied inputs, oldest first
            - w (WeightVector): Uses lambda_j and lambda_omega
            - dt (TimeStep): Scales the differences by 1/dt^2 and 1/dt

        Returns:
            Cost, float or Dual
    """
    seq = dual.concatenate([_as_inputs(history).reshape(2, 6), _as_inputs(inputs)], axis=0)
    second = (seq[2:] - 2.0 * seq[1:-1] + seq[:-2]) * (1.0 / dt.dt ** 2)
    first = (seq[2:] - seq[1:-1]) * (1.0 / dt.dt)
    trans = second[:, TRANSLATIONAL]
    rot = first[:, ROTATIONAL]
    return w.lambda_j * (trans * trans).sum() + w.lambda_omega * (rot * rot).sum()

def terminal_cost(z_n, goal, tw: TerminalWeights):
    """ Weighted squared error of the last state, heading errors wrapped """
    if isinstance(z_n, CentralState):
        z_n = z_n.to_array()
    goal = goal.to_array() if isinstance(goal, (GoalState, CentralState)) else np.asarray(goal)
    diff = z_n - goal
    err = diff * (1.0 - HEADINGS) + dual.wrap_smooth(diff) * HEADINGS
    return (err * err * tw.to_array()).sum()

def total_cost(slacks, inputs, history, z_n, goal, w: WeightVector,
               tw: TerminalWeights, dt: TimeStep):
    """ Sum of the coupling, smoothing and terminal costs """
    return (coupling_cost(slacks, w)
            + input_smoothing_cost(inputs, history, w, dt)
            + terminal_cost(z_n, goal, tw))
