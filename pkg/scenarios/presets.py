""" Module implementing the built-in experiment scenarios

    exp1            Robot 1 at (0, -2), robot 2 at (0, 2), dock in motion and
                    drive the pair to (4, 0).
    exp2            Same task with the robots swapped.
    exp3_coupled    Both robots pick up at the shelf (2, 0) and (2, 1), dock
                    and carry together to (6.5, 0), hold for the transfer,
                    uncouple and deliver to B (8, -2) and A (8, 2).
    exp3_baseline   Same pickups and deliveries without docking: robot 1 goes
                    to B, robot 2 to A and then also to B.

    Each preset is also shipped as a JSON file next to this module, see
    preset_path, loadable with scenarios.config.load_config.
"""

import logging
import os
from typing import Tuple

import common.constants as const
from common.core_types import CentralState, RobotState
from scenarios.config import ConfigError, ScenarioConfig, ScriptEvent

logger = logging.getLogger(__name__)

SHELF_1 = (2.0, 0.0, 0.0)
SHELF_2 = (2.0, 1.0, 0.0)
TRANSFER_POSE = (6.5, 0.0, 0.0)
DELIVERY_A = (8.0, 2.0, 0.0)
DELIVERY_B = (8.0, -2.0, 0.0)
PRESET_DIR = os.path.dirname(os.path.abspath(__file__))

def _initial(swapped: bool = False) -> CentralState:
    below = RobotState(0.0, -2.0, 0.0)
    above = RobotState(0.0, 2.0, 0.0)
    return CentralState(above, below) if swapped else CentralState(below, above)

def _exp1() -> ScenarioConfig:
    return ScenarioConfig(name="exp1", initial=_initial(),
                          script=(ScriptEvent.couple(4.0, 0.0, 0.0),), timeout=30.0)

def _exp2() -> ScenarioConfig:
    return ScenarioConfig(name="exp2", initial=_initial(swapped=True),
                          script=(ScriptEvent.couple(4.0, 0.0, 0.0),), timeout=40.0)

def _exp3_coupled() -> ScenarioConfig:
    script = (ScriptEvent.goto(1, *SHELF_1),
              ScriptEvent.goto(2, *SHELF_2),
              ScriptEvent.couple(*TRANSFER_POSE),
              ScriptEvent.transfer(const.TRANSFER_DURATION),
              ScriptEvent.uncouple(),
              ScriptEvent.goto(1, *DELIVERY_B),
              ScriptEvent.goto(2, *DELIVERY_A))
    return ScenarioConfig(name="exp3_coupled", initial=_initial(), script=script,
                          timeout=const.SCENARIO_TIMEOUT)

def _exp3_baseline() -> ScenarioConfig:
    # Robot 1 is parked at B when robot 2 arrives, so robot 2 delivers from the keep-out rim
    rim = const.COLLISION_RADIUS + 0.05
    script = (ScriptEvent.goto(1, *SHELF_1),
              ScriptEvent.goto(2, *SHELF_2),
              ScriptEvent.goto(1, *DELIVERY_B),
              ScriptEvent.goto(2, *DELIVERY_A),
              ScriptEvent.goto(2, *DELIVERY_B, tolerance=rim))
    return ScenarioConfig(name="exp3_baseline", initial=_initial(), script=script,
                          timeout=const.SCENARIO_TIMEOUT)

PRESETS = {
    "exp1": _exp1,
    "exp2": _exp2,
    "exp3_coupled": _exp3_coupled,
    "exp3_baseline": _exp3_baseline,
}

def preset_names() -> Tuple[str, ...]:
    return tuple(PRESETS)

def preset(name: str) -> ScenarioConfig:
    """ Returns the built-in scenario of that name

        Raises:
            ConfigError: If there is no such preset
    """
    try:
        return PRESETS[name]()
    except KeyError as err:
        raise ConfigError(f"preset: unknown scenario {name}, choose from {', '.join(PRESETS)}") from err

def preset_path(name: str) -> str:
    """ Path of the JSON file shipped next to this module for a preset

        Raises:
            ConfigError: If there is no such preset
    """
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown scenario {name}, choose from {', '.join(PRESETS)}")
    return os.path.join(PRESET_DIR, f"{name}.json")
