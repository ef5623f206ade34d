""" Module implementing the trajectory log of a scenario run """

from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np

from common.core_types import CentralInput, CentralState
from planning.coupling import ResidualVector
from simulation.phases import Phase

NO_SOLVE = "none" # Status of records without a solve (final state)

class ScenarioOutcome(Enum):
    """ How a scenario run ended """
    COMPLETED = "completed"
    TIMEOUT = "timeout"

@dataclass(frozen=True)
class StepRecord:
    """ One logged plant step: state, the input applied from it and diagnostics """
    t: float
    state: CentralState
    applied: CentralInput
    residuals: ResidualVector
    phase: Phase
    solver_status: str

@dataclass
class SolveStats:
    """ Compact summary of one solve """
    status: str
    outer_iterations: int
    inner_iterations: int
    wall_time: float

@dataclass
class TrajectoryLog:
    """ Records on a uniform time grid plus scenario events """
    name: str
    dt: float
    records: List[StepRecord] = field(default_factory=list)
    dock_times: List[float] = field(default_factory=list)
    undock_times: List[float] = field(default_factory=list)
    completion: List[float | None] = field(default_factory=lambda: [None, None])
    solves: List[SolveStats] = field(default_factory=list)
    cold_restarts: int = 0
    outcome: ScenarioOutcome = ScenarioOutcome.COMPLETED

    def append(self, record: StepRecord) -> None:
        if self.records and record.t <= self.records[-1].t:
            raise ValueError(f"log time must increase, got {record.t} after {self.records[-1].t}")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def duration(self) -> float:
        if not self.records:
            return 0.0
        return self.records[-1].t - self.records[0].t

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def states(self) -> np.ndarray:
        """ (K, 6) states, headings wrapped """
        return np.array([r.state.to_array() for r in self.records]).reshape(-1, 6)

    def inputs(self) -> np.ndarray:
        return np.array([r.applied.to_array() for r in self.records]).reshape(-1, 6)

    def residuals(self) -> np.ndarray:
        """ (K, 4) residuals, columns axis, align, dist, soft """
        return np.array([r.residuals.to_array() for r in self.records]).reshape(-1, 4)
