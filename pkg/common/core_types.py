""" Module implementing the planar robot types, angle arithmetic and docking geometry

    Headings of published states are kept in [0, 2*pi). Inside the optimizer the
    same quantities are handled as plain arrays with unwrapped headings, see
    planning.dynamics.rollout.
"""

from dataclasses import dataclass
import math
from typing import Tuple

import numpy as np

import common.constants as const
from common.helper import require_finite

def wrap_to_2pi(a: float) -> float:
    """ Wraps an angle to [0, 2*pi).

        Args:
            - a (float): Angle in rad

        Returns:
            float: Equivalent angle in [0, 2*pi)

        Raises:
            ValueError: If a is not finite
    """
    a = require_finite(a, "angle")
    result = math.fmod(a, const.TWO_PI)
    if result < 0.0:
        result += const.TWO_PI
    if result >= const.TWO_PI:
        # -tiny + 2*pi rounds up to 2*pi
        result = 0.0
    return result

def wrap_to_pm_pi(a: float) -> float:
    """ Wraps an angle to [-pi, pi), -pi is included """
    result = wrap_to_2pi(a)
    if result >= math.pi:
        result -= const.TWO_PI
    return result

def map_to_0_pi(a: float) -> float:
    """ Maps an angle difference to its magnitude in [0, pi]. Not smooth at 0 and pi. """
    return abs(wrap_to_pm_pi(a))

@dataclass(frozen=True)
class RobotState:
    """ Pose of one omnidirectional robot """
    px: float
    py: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "px", require_finite(self.px, "px"))
        object.__setattr__(self, "py", require_finite(self.py, "py"))
        object.__setattr__(self, "theta", wrap_to_2pi(self.theta))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.px, self.py])

@dataclass(frozen=True)
class ControlInput:
    """ Body velocities of one robot """
    vx: float
    vy: float
    omega: float

    def __post_init__(self):
        for name in ("vx", "vy", "omega"):
            object.__setattr__(self, name, require_finite(getattr(self, name), name))

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy])

@dataclass(frozen=True)
class DockingInterface:
    """ Coupling interface mounted on the disk margin

        Args:
            - delta_phi (float): Offset of the interface from the heading, in [-pi, pi)
            - radius (float): Disk radius r in m
    """
    delta_phi: float
    radius: float

    def __post_init__(self):
        delta_phi = require_finite(self.delta_phi, "delta_phi")
        if not -math.pi <= delta_phi < math.pi:
            raise ValueError(f"delta_phi must lie in [-pi, pi), got {delta_phi}")
        if require_finite(self.radius, "radius") <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "delta_phi", delta_phi)
        object.__setattr__(self, "radius", float(self.radius))

@dataclass(frozen=True)
class CentralState:
    """ Stacked state of both robots, layout [p1x, p1y, th1, p2x, p2y, th2] """
    robot1: RobotState
    robot2: RobotState

    def to_array(self) -> np.ndarray:
        return np.array([self.robot1.px, self.robot1.py, self.robot1.theta,
                         self.robot2.px, self.robot2.py, self.robot2.theta])

    @classmethod
    def from_array(cls, values) -> "CentralState":
        """ Builds a state from six numbers, headings get wrapped """
        v = [float(x) for x in np.asarray(values, dtype=float).reshape(6)]
        return cls(RobotState(v[0], v[1], v[2]), RobotState(v[3], v[4], v[5]))

    @property
    def distance(self) -> float:
        """ Center distance of the robots in m """
        return math.hypot(self.robot2.px - self.robot1.px,
                          self.robot2.py - self.robot1.py)

@dataclass(frozen=True)
class CentralInput:
    """ Stacked input of both robots, layout [v1x, v1y, w1, v2x, v2y, w2] """
    robot1: ControlInput
    robot2: ControlInput

    def to_array(self) -> np.ndarray:
        return np.array([self.robot1.vx, self.robot1.vy, self.robot1.omega,
                         self.robot2.vx, self.robot2.vy, self.robot2.omega])

    @classmethod
    def from_array(cls, values) -> "CentralInput":
        v = [float(x) for x in np.asarray(values, dtype=float).reshape(6)]
        return cls(ControlInput(v[0], v[1], v[2]), ControlInput(v[3], v[4], v[5]))

    @classmethod
    def zero(cls) -> "CentralInput":
        return cls(ControlInput(0.0, 0.0, 0.0), ControlInput(0.0, 0.0, 0.0))

def docking_heading(s: RobotState, d: DockingInterface) -> float:
    """ Returns the heading of the docking interface in [0, 2*pi) """
    return wrap_to_2pi(s.theta + d.delta_phi)

def docking_point(s: RobotState, d: DockingInterface) -> Tuple[float, float]:
    """ Returns the center point of the docking interface.

        Args:
            - s (RobotState): Pose of the robot
            - d (DockingInterface): Interface mounted on that robot

        Returns:
            Tuple[float, float]: Position on the disk margin
    """
    heading = docking_heading(s, d)
    return (s.px + d.radius * math.cos(heading),
            s.py + d.radius * math.sin(heading))
