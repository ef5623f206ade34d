""" Module implementing the coupling residuals and the approach corridor

    Two families live here. The exact forms work on CentralState values and use
    the wrapped angle maps of common.core_types; the simulation uses them for
    latch and phase checks. The smooth forms work on (N, 6) state and input
    arrays (or Duals) with unwrapped headings and feed the optimizer.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np

import common.constants as const
from common.core_types import (CentralInput, CentralState, DockingInterface,
                               docking_heading, map_to_0_pi, wrap_to_2pi,
                               wrap_to_pm_pi)
from common.helper import require_finite
from planning import dual

logger = logging.getLogger(__name__)

class CoincidentRobotsError(ValueError):
    """ Raised when the robot centers coincide and the bearing is undefined """

@dataclass(frozen=True)
class CouplingParams:
    """ Geometry of the docking maneuver

        Args:
            - delta_r (float): Center distance when docked in m
            - r_ca (float): Keep-out radius in m, not smaller than delta_r
            - half_cone (float): Corridor half angle in rad, in (0, pi/2)
            - sharpness (float): tanh gain of the corridor gate
            - iface1, iface2 (DockingInterface): Interfaces of robot 1 and 2
            - feas_tol (float): Gate leakage accepted inside the cone
            - literal_distance (bool): Use d^2 - delta_r for the distance residual
    """
    delta_r: float
    r_ca: float
    half_cone: float
    sharpness: float
    iface1: DockingInterface
    iface2: DockingInterface
    feas_tol: float = const.CORRIDOR_FEAS_TOL
    literal_distance: bool = const.LITERAL_DISTANCE_RESIDUAL

    def __post_init__(self):
        for name in ("delta_r", "r_ca", "half_cone", "sharpness"):
            if require_finite(getattr(self, name), name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.r_ca < self.delta_r:
            raise ValueError(f"r_ca ({self.r_ca}) must not be smaller than delta_r ({self.delta_r})")
        if self.half_cone >= math.pi / 2.0:
            raise ValueError(f"half_cone must be below pi/2, got {self.half_cone}")
        if require_finite(self.feas_tol, "feas_tol") < 0.0:
            raise ValueError(f"feas_tol must be nonnegative, got {self.feas_tol}")

    @classmethod
    def default(cls) -> "CouplingParams":
        """ Geometry of the built-in experiments """
        return cls(delta_r=const.DOCKING_DISTANCE, r_ca=const.COLLISION_RADIUS,
                   half_cone=math.radians(const.CORRIDOR_HALF_ANGLE_DEG),
                   sharpness=const.CORRIDOR_SHARPNESS,
                   iface1=DockingInterface(math.radians(const.DELTA_PHI_1_DEG), const.ROBOT_RADIUS),
                   iface2=DockingInterface(math.radians(const.DELTA_PHI_2_DEG), const.ROBOT_RADIUS))

@dataclass(frozen=True)
class ResidualVector:
    """ Coupling residuals I to IV of one time step """
    r_axis: float
    r_align: float
    r_dist: float
    r_soft: float

    def to_array(self) -> np.ndarray:
        """ Column order used everywhere: axis, align, dist, soft """
        return np.array([self.r_axis, self.r_align, self.r_dist, self.r_soft])

def _check_separated(z: CentralState) -> None:
    if z.distance < const.COINCIDENCE_EPS:
        raise CoincidentRobotsError(
            f"robot centers coincide at ({z.robot1.px}, {z.robot1.py})")

def bearing_angle(z: CentralState) -> float:
    """ Direction of the vector from robot 1 to robot 2, in [0, 2*pi) """
    _check_separated(z)
    return wrap_to_2pi(math.atan2(z.robot2.py - z.robot1.py,
                                  z.robot2.px - z.robot1.px))

def residual_docking_axis(z: CentralState, p: CouplingParams) -> float:
    """ Signed angle between the docking ray of robot 1 and the bearing to robot 2 """
    return wrap_to_pm_pi(docking_heading(z.robot1, p.iface1) - bearing_angle(z))

def residual_alignment(z: CentralState, p: CouplingParams) -> float:
    """ Zero when both docking axes point at each other, -pi when parallel """
    return map_to_0_pi(docking_heading(z.robot1, p.iface1)
                       - docking_heading(z.robot2, p.iface2)) - math.pi

def residual_distance(z: CentralState, p: CouplingParams) -> float:
    """ Squared center distance minus the squared docking distance """
    d2 = ((z.robot1.px - z.robot2.px) ** 2 + (z.robot1.py - z.robot2.py) ** 2)
    if p.literal_distance:
        return d2 - p.delta_r
    return d2 - p.delta_r ** 2

def residual_soft_docking(nu: CentralInput) -> float:
    """ Squared relative translational velocity """
    return ((nu.robot1.vx - nu.robot2.vx) ** 2 + (nu.robot1.vy - nu.robot2.vy) ** 2)

def corridor_value(z: CentralState, p: CouplingParams) -> float:
    """ Gate value alpha_ca * alpha_ce / 2 of the approach corridor.

        Note:
            Feasible if the value is nonnegative. Inside the cone the tanh gate
            never reaches zero, so the docked pose gives a small negative value;
            the optimizer accepts down to -feas_tol there.

        Args:
            - z (CentralState): Pose pair
            - p (CouplingParams): Corridor geometry

        Returns:
            float: Gate value in m^2
    """
    off_axis = map_to_0_pi(docking_heading(z.robot1, p.iface1) - bearing_angle(z))
    alpha_ca = z.distance ** 2 - p.r_ca ** 2
    alpha_ce = 1.0 + math.tanh(p.sharpness * (off_axis - p.half_cone))
    return alpha_ca * 0.5 * alpha_ce

def residual_vector(z: CentralState, nu: CentralInput, p: CouplingParams) -> ResidualVector:
    """ Bundles the four exact residuals """
    return ResidualVector(residual_docking_axis(z, p),
                          residual_alignment(z, p),
                          residual_distance(z, p),
                          residual_soft_docking(nu))

def off_axis_angle(z: CentralState, p: CouplingParams) -> float:
    """ Exact off-axis angle in [0, pi] of robot 2 seen from robot 1's docking ray """
    return abs(residual_docking_axis(z, p))

# Smooth forms, vectorized over the horizon

def _geometry(states, p: CouplingParams):
    th1d = states[:, 2] + p.iface1.delta_phi
    th2d = states[:, 5] + p.iface2.delta_phi
    dx = states[:, 3] - states[:, 0]
    dy = states[:, 4] - states[:, 1]
    dist2 = dx * dx + dy * dy
    if np.any(dual.value(dist2) < const.COINCIDENCE_EPS ** 2):
        raise CoincidentRobotsError("robot centers coincide inside the horizon")
    return th1d, th2d, dx, dy, dist2

def _axis(th1d, dx, dy):
    ex, ey = dual.cos(th1d), dual.sin(th1d)
    return dual.arctan2(ey * dx - ex * dy, ex * dx + ey * dy)

def smooth_residuals(states, inputs, p: CouplingParams):
    """ Optimizer residuals for each step of a horizon.

        Args:
            - states: (N, 6) states z_1 .. z_N, unwrapped headings
            - inputs: (N, 6) inputs; row k is the input that led to state k
            - p (CouplingParams): Coupling geometry

        Returns:
            (N, 4) array or Dual with columns axis, align, dist, soft. The
            alignment column is 1 + cos(th1d - th2d), zero exactly when the axes
            face each other.
    """
    th1d, th2d, dx, dy, dist2 = _geometry(states, p)
    r_axis = _axis(th1d, dx, dy)
    r_align = 1.0 + dual.cos(th1d - th2d)
    r_dist = dist2 - (p.delta_r if p.literal_distance else p.delta_r ** 2)
    dvx = inputs[:, 0] - inputs[:, 3]
    dvy = inputs[:, 1] - inputs[:, 4]
    r_soft = dvx * dvx + dvy * dvy
    return dual.stack([r_axis, r_align, r_dist, r_soft], axis=1)

def smooth_corridor(states, p: CouplingParams, margin: bool = True):
    """ Corridor gate rows for each step, feasible when >= 0.

        Note:
            |r_axis| is replaced by sqrt(r_axis^2 + eps^2). With margin the
            row is gate + feas_tol * (1 - alpha_ce / 2), so the leakage
            allowance applies inside the cone and fades out with the gate.
    """
    th1d, _, dx, dy, dist2 = _geometry(states, p)
    r_axis = _axis(th1d, dx, dy)
    off_axis = dual.sqrt(r_axis * r_axis + const.ANGLE_SMOOTHING ** 2)
    alpha_ca = dist2 - p.r_ca ** 2
    half_ce = 0.5 * (1.0 + dual.tanh(p.sharpness * (off_axis - p.half_cone)))
    gate = alpha_ca * half_ce
    if not margin:
        return gate
    return gate + p.feas_tol * (1.0 - half_ce)

def smooth_keep_out(states, p: CouplingParams):
    """ Full keep-out disk rows d^2 - r_ca^2 >= 0 """
    _, _, _, _, dist2 = _geometry(states, p)
    return dist2 - p.r_ca ** 2
