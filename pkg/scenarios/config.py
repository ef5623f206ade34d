""" Module implementing scenario configurations and their JSON form

    A configuration holds everything a closed-loop run needs: initial poses,
    docking geometry, weights, caps, horizon, latch thresholds, the event script
    and the solver budget. Angles are degrees in JSON and radians in memory.
"""

from dataclasses import dataclass, field, fields
from enum import Enum
import json
import logging
import math
from typing import Any, Dict, List, Tuple

import common.constants as const
from common.core_types import CentralState, DockingInterface, RobotState
from planning.coupling import CouplingParams
from planning.dynamics import TimeStep
from planning.nlp import InputBounds, SlackCaps
from planning.objective import TerminalWeights, WeightVector
from simulation.phases import LatchThresholds
from solver.settings import SolverSettings

logger = logging.getLogger(__name__)

class ConfigError(ValueError):
    """ Invalid configuration, the message starts with the dotted field path """

class EventKind(Enum):
    """ Script event types """
    GOTO = "goto"
    COUPLE = "couple"
    TRANSFER = "transfer"
    UNCOUPLE = "uncouple"

    @classmethod
    def from_str(cls, value: str) -> "EventKind":
        """ Returns the kind for its name

            Raises:
                ValueError: If value names no event
        """
        for kind in cls:
            if kind.value == value:
                return kind
        raise ValueError(f"Unknown event: {value}")

@dataclass(frozen=True)
class ScriptEvent:
    """ One step of a scenario script

        Args:
            - kind (EventKind): Event type
            - robot (int): 1 or 2, goto only
            - pose (tuple): (x, y, theta) with theta in rad, goto and couple
            - duration (float): Coupled time in s, transfer only
            - tolerance (float): Position tolerance in m overriding the default, goto only
    """
    kind: EventKind
    robot: int | None = None
    pose: Tuple[float, float, float] | None = None
    duration: float | None = None
    tolerance: float | None = None

    @classmethod
    def goto(cls, robot: int, x: float, y: float, theta: float,
             tolerance: float | None = None) -> "ScriptEvent":
        return cls(EventKind.GOTO, robot=robot, pose=(x, y, theta), tolerance=tolerance)

    @classmethod
    def couple(cls, x: float, y: float, theta: float) -> "ScriptEvent":
        return cls(EventKind.COUPLE, pose=(x, y, theta))

    @classmethod
    def transfer(cls, duration: float = const.TRANSFER_DURATION) -> "ScriptEvent":
        return cls(EventKind.TRANSFER, duration=duration)

    @classmethod
    def uncouple(cls) -> "ScriptEvent":
        return cls(EventKind.UNCOUPLE)

    def target(self) -> RobotState:
        return RobotState(*self.pose)

@dataclass(frozen=True)
class GoalTolerance:
    """ When a robot counts as arrived, heading in rad """
    position: float = const.GOAL_POSITION_TOL
    heading: float = math.radians(const.GOAL_HEADING_TOL_DEG)

    def __post_init__(self):
        if not self.position > 0.0 or not self.heading > 0.0:
            raise ValueError("goal tolerances must be positive")

def validate_script(script) -> None:
    """ Checks that couple, transfer and uncouple events nest properly.

        Raises:
            ValueError: On a malformed script, naming the event index
    """
    coupled = False
    for i, ev in enumerate(script):
        if ev.kind is EventKind.GOTO:
            if ev.robot not in (1, 2):
                raise ValueError(f"event {i}: goto robot must be 1 or 2, got {ev.robot}")
            if coupled:
                raise ValueError(f"event {i}: goto while coupled, uncouple first")
            if ev.tolerance is not None and not ev.tolerance > 0.0:
                raise ValueError(f"event {i}: tolerance must be positive")
        elif ev.kind is EventKind.COUPLE:
            if coupled:
                raise ValueError(f"event {i}: couple while already coupled")
            coupled = True
        elif ev.kind is EventKind.TRANSFER:
            if not coupled:
                raise ValueError(f"event {i}: transfer needs a preceding couple")
            if ev.duration is None or not ev.duration > 0.0:
                raise ValueError(f"event {i}: transfer duration must be positive")
        elif ev.kind is EventKind.UNCOUPLE:
            if not coupled:
                raise ValueError(f"event {i}: uncouple without couple")
            coupled = False
        if ev.kind in (EventKind.GOTO, EventKind.COUPLE):
            if ev.pose is None or len(ev.pose) != 3 or not all(math.isfinite(v) for v in ev.pose):
                raise ValueError(f"event {i}: {ev.kind.value} needs a finite pose (x, y, theta)")

@dataclass(frozen=True)
class ScenarioConfig:
    """ Complete description of one closed-loop run """
    name: str
    initial: CentralState
    script: Tuple[ScriptEvent, ...]
    coupling: CouplingParams = field(default_factory=CouplingParams.default)
    weights: WeightVector = field(default_factory=WeightVector.default)
    terminal: TerminalWeights = TerminalWeights(const.TERMINAL_WEIGHTS)
    caps: SlackCaps = SlackCaps.from_config_order(const.SLACK_CAPS)
    docked_caps: SlackCaps = SlackCaps.from_config_order(const.DOCKED_SLACK_CAPS)
    dt: TimeStep = TimeStep(const.TIME_STEP)
    horizon: int = const.HORIZON_STEPS
    bounds: InputBounds = InputBounds(const.V_MAX, math.radians(const.OMEGA_MAX_DEG))
    latch: LatchThresholds = LatchThresholds()
    close_range_d: float = const.CLOSE_RANGE_D
    goal_tolerance: GoalTolerance = GoalTolerance()
    solver: SolverSettings = field(default_factory=SolverSettings.for_mpc)
    rotational_weight: float = const.ROTATIONAL_ENERGY_WEIGHT
    seed: int = 0
    timeout: float = const.SCENARIO_TIMEOUT
    disturbance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "script", tuple(self.script))
        validate_script(self.script)
        if self.horizon < 2:
            raise ValueError(f"horizon must be at least 2 steps, got {self.horizon}")
        if not self.timeout > 0.0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        if not self.close_range_d > 0.0:
            raise ValueError(f"close_range_d must be positive, got {self.close_range_d}")
        if not self.disturbance >= 0.0:
            raise ValueError(f"disturbance must be nonnegative, got {self.disturbance}")

# ---------------------------------------------------------------------------
# JSON

def _pose_from_json(value) -> Tuple[float, float, float]:
    return (float(value[0]), float(value[1]), math.radians(float(value[2])))

def _pose_to_json(pose) -> List[float]:
    return [pose[0], pose[1], math.degrees(pose[2])]

class _Section:
    """ Strict reader of one JSON object, errors carry the dotted path """

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path or '<root>'}: expected an object")
        self.data = data
        self.path = path
        self.seen = set()

    def _name(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default=None):
        self.seen.add(key)
        return self.data.get(key, default)

    def number(self, key: str, default: float) -> float:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{self._name(key)}: expected a finite number")
        return float(value)

    def integer(self, key: str, default: int) -> int:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self._name(key)}: expected an integer")
        return value

    def boolean(self, key: str, default: bool) -> bool:
        value = self.raw(key, default)
        if not isinstance(value, bool):
            raise ConfigError(f"{self._name(key)}: expected true or false")
        return value

    def string(self, key: str, default: str) -> str:
        value = self.raw(key, default)
        if not isinstance(value, str):
            raise ConfigError(f"{self._name(key)}: expected a string")
        return value

    def vector(self, key: str, default, length: int) -> Tuple[float, ...]:
        value = self.raw(key, default)
        if (not isinstance(value, (list, tuple)) or len(value) != length
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v)
                       for v in value)):
            raise ConfigError(f"{self._name(key)}: expected a list of {length} finite numbers")
        return tuple(float(v) for v in value)

    def section(self, key: str) -> "_Section":
        return _Section(self.raw(key, {}), self._name(key))

    def finish(self) -> None:
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise ConfigError(f"{self._name(unknown[0])}: unknown field")

def _event_from_json(data, path: str) -> ScriptEvent:
    sec = _Section(data, path)
    try:
        kind = EventKind.from_str(sec.string("event", ""))
    except ValueError as err:
        raise ConfigError(f"{path}.event: {err}") from err
    if kind is EventKind.GOTO:
        robot = sec.integer("robot", 0)
        if robot not in (1, 2):
            raise ConfigError(f"{path}.robot: expected 1 or 2")
        pose = _pose_from_json(sec.vector("pose", None, 3))
        tolerance = sec.number("tolerance", 0.0) if sec.has("tolerance") else None
        event = ScriptEvent.goto(robot, *pose, tolerance=tolerance)
    elif kind is EventKind.COUPLE:
        event = ScriptEvent.couple(*_pose_from_json(sec.vector("pose", None, 3)))
    elif kind is EventKind.TRANSFER:
        event = ScriptEvent.transfer(sec.number("duration", const.TRANSFER_DURATION))
    else:
        event = ScriptEvent.uncouple()
    sec.finish()
    return event

def _build(cls, path: str, *args, **kwargs):
    try:
        return cls(*args, **kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: {err}") from err

def config_from_dict(document: Dict[str, Any]) -> ScenarioConfig:
    """ Builds a configuration from a parsed JSON document.

        Raises:
            ConfigError: On a missing or wrong schema, unknown keys or invalid values
    """
    root = _Section(document, "")
    if not root.has("schema"):
        raise ConfigError("schema: missing")
    if root.integer("schema", 0) != const.CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"schema: expected {const.CONFIG_SCHEMA_VERSION}")
    name = root.string("name", "scenario")

    sec = root.section("initial")
    r1 = _pose_from_json(sec.vector("robot1", [0.0, -2.0, 0.0], 3))
    r2 = _pose_from_json(sec.vector("robot2", [0.0, 2.0, 0.0], 3))
    sec.finish()
    initial = CentralState(RobotState(*r1), RobotState(*r2))

    sec = root.section("interfaces")
    radius = sec.number("radius", const.ROBOT_RADIUS)
    iface1 = _build(DockingInterface, "interfaces.delta_phi1_deg",
                    math.radians(sec.number("delta_phi1_deg", const.DELTA_PHI_1_DEG)), radius)
    iface2 = _build(DockingInterface, "interfaces.delta_phi2_deg",
                    math.radians(sec.number("delta_phi2_deg", const.DELTA_PHI_2_DEG)), radius)
    sec.finish()

    sec = root.section("coupling")
    coupling = _build(CouplingParams, "coupling",
                      delta_r=sec.number("delta_r", const.DOCKING_DISTANCE),
                      r_ca=sec.number("r_ca", const.COLLISION_RADIUS),
                      half_cone=math.radians(sec.number("half_cone_deg", const.CORRIDOR_HALF_ANGLE_DEG)),
                      sharpness=sec.number("sharpness", const.CORRIDOR_SHARPNESS),
                      iface1=iface1, iface2=iface2,
                      feas_tol=sec.number("feas_tol", const.CORRIDOR_FEAS_TOL),
                      literal_distance=sec.boolean("literal_distance", const.LITERAL_DISTANCE_RESIDUAL))
    sec.finish()

    sec = root.section("weights")
    weights = _build(WeightVector, "weights",
                     *sec.vector("coupling", const.COUPLING_WEIGHTS, 4),
                     *sec.vector("smoothing", const.SMOOTHING_WEIGHTS, 2))
    terminal = _build(TerminalWeights, "weights.terminal",
                      sec.vector("terminal", const.TERMINAL_WEIGHTS, 6))
    sec.finish()

    sec = root.section("slack_caps")
    caps = _build(SlackCaps.from_config_order, "slack_caps.initial",
                  sec.vector("initial", const.SLACK_CAPS, 4))
    docked_caps = _build(SlackCaps.from_config_order, "slack_caps.docked",
                         sec.vector("docked", const.DOCKED_SLACK_CAPS, 4))
    sec.finish()

    sec = root.section("horizon")
    horizon = sec.integer("steps", const.HORIZON_STEPS)
    if horizon < 2:
        raise ConfigError(f"horizon.steps: must be at least 2, got {horizon}")
    dt = _build(TimeStep, "horizon.dt", sec.number("dt", const.TIME_STEP))
    sec.finish()

    sec = root.section("input_bounds")
    bounds = _build(InputBounds, "input_bounds", sec.number("v_max", const.V_MAX),
                    math.radians(sec.number("omega_max_deg", const.OMEGA_MAX_DEG)))
    sec.finish()

    sec = root.section("latch")
    latch = _build(LatchThresholds, "latch",
                   axis=math.radians(sec.number("axis_deg", const.LATCH_AXIS_DEG)),
                   align=math.radians(sec.number("align_deg", const.LATCH_ALIGN_DEG)),
                   distance=sec.number("distance", const.LATCH_DISTANCE),
                   speed=sec.number("speed", const.LATCH_SPEED))
    close_range_d = sec.number("close_range_d", const.CLOSE_RANGE_D)
    sec.finish()

    sec = root.section("goal_tolerance")
    goal_tolerance = _build(GoalTolerance, "goal_tolerance",
        position=sec.number("position", const.GOAL_POSITION_TOL),
        heading=math.radians(sec.number("heading_deg", const.GOAL_HEADING_TOL_DEG)))
    sec.finish()

    events = root.raw("script", [])
    if not isinstance(events, list):
        raise ConfigError("script: expected a list of events")
    script = tuple(_event_from_json(ev, f"script[{i}]") for i, ev in enumerate(events))

    sec = root.section("solver")
    base = SolverSettings.for_mpc()
    solver_kwargs = {}
    for item in fields(SolverSettings):
        if item.name in ("max_outer", "max_inner", "memory"):
            solver_kwargs[item.name] = sec.integer(item.name, getattr(base, item.name))
        else:
            solver_kwargs[item.name] = sec.number(item.name, getattr(base, item.name))
    solver = _build(SolverSettings, "solver", **solver_kwargs)
    sec.finish()

    sec = root.section("metrics")
    rotational_weight = sec.number("rotational_weight", const.ROTATIONAL_ENERGY_WEIGHT)
    sec.finish()

    seed = root.integer("seed", 0)
    timeout = root.number("timeout", const.SCENARIO_TIMEOUT)
    disturbance = root.number("disturbance", 0.0)
    if not timeout > 0.0:
        raise ConfigError(f"timeout: must be positive, got {timeout}")
    if disturbance < 0.0:
        raise ConfigError(f"disturbance: must be nonnegative, got {disturbance}")
    if not close_range_d > 0.0:
        raise ConfigError(f"latch.close_range_d: must be positive, got {close_range_d}")
    root.finish()

    return _build(ScenarioConfig, "script", name=name, initial=initial, script=script,
                  coupling=coupling, weights=weights, terminal=terminal, caps=caps,
                  docked_caps=docked_caps, dt=dt, horizon=horizon, bounds=bounds,
                  latch=latch, close_range_d=close_range_d,
                  goal_tolerance=goal_tolerance, solver=solver,
                  rotational_weight=rotational_weight, seed=seed, timeout=timeout,
                  disturbance=disturbance)

def _event_to_json(ev: ScriptEvent) -> Dict[str, Any]:
    data: Dict[str, Any] = {"event": ev.kind.value}
    if ev.kind is EventKind.GOTO:
        data["robot"] = ev.robot
    if ev.pose is not None:
        data["pose"] = _pose_to_json(ev.pose)
    if ev.duration is not None:
        data["duration"] = ev.duration
    if ev.tolerance is not None:
        data["tolerance"] = ev.tolerance
    return data

def config_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    """ JSON document of a configuration, inverse of config_from_dict """
    c = config.coupling
    w = config.weights
    r1, r2 = config.initial.robot1, config.initial.robot2
    return {
        "schema": const.CONFIG_SCHEMA_VERSION,
        "name": config.name,
        "initial": {"robot1": _pose_to_json((r1.px, r1.py, r1.theta)),
                    "robot2": _pose_to_json((r2.px, r2.py, r2.theta))},
        "interfaces": {"delta_phi1_deg": math.degrees(c.iface1.delta_phi),
                       "delta_phi2_deg": math.degrees(c.iface2.delta_phi),
                       "radius": c.iface1.radius},
        "coupling": {"delta_r": c.delta_r, "r_ca": c.r_ca,
                     "half_cone_deg": math.degrees(c.half_cone),
                     "sharpness": c.sharpness, "feas_tol": c.feas_tol,
                     "literal_distance": c.literal_distance},
        "weights": {"coupling": [w.lambda_dr, w.lambda_dtheta, w.lambda_dv, w.lambda_dphi],
                    "smoothing": [w.lambda_j, w.lambda_omega],
                    "terminal": list(config.terminal.weights)},
        "slack_caps": {"initial": list(config.caps.config_order()),
                       "docked": list(config.docked_caps.config_order())},
        "horizon": {"steps": config.horizon, "dt": config.dt.dt},
        "input_bounds": {"v_max": config.bounds.v_max,
                         "omega_max_deg": math.degrees(config.bounds.omega_max)},
        "latch": {"axis_deg": math.degrees(config.latch.axis),
                  "align_deg": math.degrees(config.latch.align),
                  "distance": config.latch.distance, "speed": config.latch.speed,
                  "close_range_d": config.close_range_d},
        "goal_tolerance": {"position": config.goal_tolerance.position,
                           "heading_deg": math.degrees(config.goal_tolerance.heading)},
        "script": [_event_to_json(ev) for ev in config.script],
        "solver": {item.name: getattr(config.solver, item.name) for item in fields(SolverSettings)},
        "metrics": {"rotational_weight": config.rotational_weight},
        "seed": config.seed,
        "timeout": config.timeout,
        "disturbance": config.disturbance,
    }

def load_config(path: str) -> ScenarioConfig:
    """ Reads a scenario configuration from a JSON file.

        Args:
            - path (str): Path to the file

        Returns:
            ScenarioConfig: Validated configuration

        Raises:
            ConfigError: If the file cannot be read or is invalid
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as err:
        raise ConfigError(f"<file>: cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"<file>: {path} is no valid JSON: {err}") from err
    config = config_from_dict(document)
    logger.info("Loaded scenario %s from %s", config.name, path)
    return config

def save_config(config: ScenarioConfig, path: str) -> None:
    """ Writes a configuration as JSON, loadable with load_config """
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(config_to_dict(config), handle, indent=2)
    logger.info("Wrote scenario %s to %s", config.name, path)
