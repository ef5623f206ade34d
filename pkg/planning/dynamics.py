""" Module implementing the Euler-forward integrator of the omnidirectional robots """

from dataclasses import dataclass
import logging

import numpy as np

from common.core_types import (CentralInput, CentralState, ControlInput,
                               RobotState)
from common.helper import require_finite
from planning import dual

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class TimeStep:
    """ Step duration of the discretization in s """
    dt: float

    def __post_init__(self):
        if require_finite(self.dt, "dt") <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "dt", float(self.dt))

def step_single(x: RobotState, u: ControlInput, dt: TimeStep) -> RobotState:
    """ Advances one robot by one step, the heading gets wrapped """
    return RobotState(x.px + dt.dt * u.vx,
                      x.py + dt.dt * u.vy,
                      x.theta + dt.dt * u.omega)

def step_central(z: CentralState, nu: CentralInput, dt: TimeStep) -> CentralState:
    """ Advances both robots by one step """
    return CentralState(step_single(z.robot1, nu.robot1, dt),
                        step_single(z.robot2, nu.robot2, dt))

def rollout(z0, inputs, dt: TimeStep):
    """ Integrates a horizon of stacked inputs from z0.

        Note:
            Headings are not wrapped here. The accumulation runs strictly in
            order, so row k equals k+1 applications of step_central up to the
            heading wrap.

        Args:
            - z0 (CentralState|ndarray): Initial state, six entries
            - inputs: Sequence of CentralInput, (N, 6) array or (N, 6) Dual
            - dt (TimeStep): Step duration

        Returns:
            (N, 6) array (or Dual) of states z_1 .. z_N

        Raises:
            ValueError: On an empty input sequence
    """
    if isinstance(z0, CentralState):
        z0 = z0.to_array()
    if not isinstance(inputs, (np.ndarray, dual.Dual)):
        inputs = np.array([nu.to_array() for nu in inputs], dtype=float)
    if len(inputs) == 0:
        raise ValueError("rollout needs at least one input")

    steps = dual.concatenate([np.asarray(z0, dtype=float).reshape(1, 6),
                              inputs * dt.dt], axis=0)
    return dual.cumsum(steps, axis=0)[1:]
