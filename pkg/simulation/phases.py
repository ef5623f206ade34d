""" Module implementing the approach phases and the docking latch """

from dataclasses import dataclass, replace
from enum import Enum, IntEnum
import logging
import math

import common.constants as const
from common.core_types import CentralInput, CentralState
from common.helper import require_finite
from planning.coupling import (CouplingParams, residual_alignment,
                               residual_docking_axis)

logger = logging.getLogger(__name__)

LATCH_EPS = 1e-12 # Thresholds are closed, this absorbs rounding at the boundary

class Phase(IntEnum):
    """ Approach phases, ordered """
    FAR_RANGE_RENDEZVOUS = 0
    CLOSING = 1
    FINAL_APPROACH = 2
    DOCKED = 3

    @property
    def label(self) -> str:
        return {Phase.FAR_RANGE_RENDEZVOUS: "FarRangeRendezvous",
                Phase.CLOSING: "Closing",
                Phase.FINAL_APPROACH: "FinalApproach",
                Phase.DOCKED: "Docked"}[self]

    @classmethod
    def from_str(cls, value: str) -> "Phase":
        """ Returns the phase for its label

            Raises:
                ValueError: If value is no phase label
        """
        for phase in cls:
            if phase.label == value:
                return phase
        raise ValueError(f"Unknown phase: {value}")

class LatchCheck(Enum):
    """ Bit positions of the four docking conditions """
    AXIS =      0 # |r_axis| within threshold
    ALIGN =     1 # |r_align| within threshold
    DISTANCE =  2 # |d - delta_r| within threshold
    SPEED =     3 # Relative translational speed within threshold

    @classmethod
    def all_mask(cls) -> int:
        """ Mask with every condition set """
        mask = 0
        for check in cls:
            mask |= (1 << check.value)
        return mask

    @classmethod
    def describe(cls, mask: int) -> str:
        """ Names of the conditions set in mask """
        return ",".join(check.name for check in cls if mask & (1 << check.value)) or "-"

@dataclass(frozen=True)
class LatchThresholds:
    """ Closed thresholds of the docking latch, angles in rad """
    axis: float = math.radians(const.LATCH_AXIS_DEG)
    align: float = math.radians(const.LATCH_ALIGN_DEG)
    distance: float = const.LATCH_DISTANCE
    speed: float = const.LATCH_SPEED

    def __post_init__(self):
        for name in ("axis", "align", "distance", "speed"):
            if require_finite(getattr(self, name), name) < 0.0:
                raise ValueError(f"latch threshold {name} must be nonnegative")

@dataclass(frozen=True)
class DockLatch:
    """ Docking latch state

        Args:
            - thresholds (LatchThresholds): Conditions for setting the latch
            - docked (bool): Latch set
            - dock_time (float): Simulated time the latch was set
            - checks (int): Bit mask of the conditions met at the last update
    """
    thresholds: LatchThresholds = LatchThresholds()
    docked: bool = False
    dock_time: float | None = None
    checks: int = 0

    def release(self) -> "DockLatch":
        """ Clears the latch on an undock event """
        return DockLatch(self.thresholds)

def latch_checks(z: CentralState, nu: CentralInput, p: CouplingParams,
                 thresholds: LatchThresholds) -> int:
    """ Evaluates the four latch conditions on exact residuals.

        Returns:
            int: Bit mask of LatchCheck positions that are met
    """
    mask = 0
    if abs(residual_docking_axis(z, p)) <= thresholds.axis + LATCH_EPS:
        mask |= (1 << LatchCheck.AXIS.value)
    if abs(residual_alignment(z, p)) <= thresholds.align + LATCH_EPS:
        mask |= (1 << LatchCheck.ALIGN.value)
    if abs(z.distance - p.delta_r) <= thresholds.distance + LATCH_EPS:
        mask |= (1 << LatchCheck.DISTANCE.value)
    speed = math.hypot(nu.robot1.vx - nu.robot2.vx, nu.robot1.vy - nu.robot2.vy)
    if speed <= thresholds.speed + LATCH_EPS:
        mask |= (1 << LatchCheck.SPEED.value)
    return mask

def update_latch(z: CentralState, nu: CentralInput, latch: DockLatch,
                 p: CouplingParams, t: float = 0.0) -> DockLatch:
    """ Sets the latch when all four conditions hold at once.

        Args:
            - z (CentralState): Plant state
            - nu (CentralInput): Input that led to z
            - latch (DockLatch): Current latch
            - p (CouplingParams): Docking geometry
            - t (float): Simulated time of z

        Returns:
            DockLatch: Updated latch, a set latch stays set
    """
    if latch.docked:
        return latch
    mask = latch_checks(z, nu, p, latch.thresholds)
    if mask == LatchCheck.all_mask():
        logger.info("Docking latch set at t=%.2f s", t)
        return replace(latch, docked=True, dock_time=t, checks=mask)
    return replace(latch, checks=mask)

def classify_phase(z: CentralState, nu: CentralInput, p: CouplingParams,
                   latch: DockLatch, close_range_d: float = const.CLOSE_RANGE_D) -> Phase:
    """ Classifies the approach phase of a plant state.

        Note:
            nu is part of the signature for symmetry with update_latch; the
            phase depends on geometry only.
    """
    del nu
    if latch.docked:
        return Phase.DOCKED
    if abs(residual_docking_axis(z, p)) > p.half_cone:
        return Phase.FAR_RANGE_RENDEZVOUS
    if z.distance > close_range_d:
        return Phase.CLOSING
    return Phase.FINAL_APPROACH
