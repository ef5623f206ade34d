""" Module implementing the navigation metrics of a scenario run

    Energy uses unit effective mass: sum over steps and robots of
    (vx^2 + vy^2 + w_rot * omega^2) * dt, w_rot defaults to 0. Absolute values
    are only meaningful for comparing runs with each other.
"""

from collections import Counter
from dataclasses import asdict, dataclass, field
import logging
from typing import Dict, List

import numpy as np

import common.constants as const
from simulation.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

@dataclass
class RobotMetrics:
    """ Metrics of one robot """
    time: float
    energy: float
    distance: float

@dataclass
class MetricsReport:
    """ Aggregated metrics of one run

        Note:
            Energy and distance totals are sums over the robots. The total time
            is the makespan of the run, not the sum of the robot times.
    """
    name: str
    outcome: str
    robots: List[RobotMetrics]
    total_time: float
    total_energy: float
    total_distance: float
    dock_times: List[float] = field(default_factory=list)
    undock_times: List[float] = field(default_factory=list)
    solver: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

def _solver_stats(log: TrajectoryLog) -> Dict[str, float]:
    counts = Counter(s.status for s in log.solves)
    n = len(log.solves)
    stats = {"solves": n, "cold_restarts": log.cold_restarts}
    for status in ("converged", "max_iter", "infeasible_stall", "numeric_error"):
        stats[status] = counts.get(status, 0)
    stats["mean_outer_iterations"] = float(np.mean([s.outer_iterations for s in log.solves])) if n else 0.0
    stats["mean_inner_iterations"] = float(np.mean([s.inner_iterations for s in log.solves])) if n else 0.0
    stats["wall_time"] = float(sum(s.wall_time for s in log.solves))
    return stats

def compute_metrics(log: TrajectoryLog,
                    rotational_weight: float = const.ROTATIONAL_ENERGY_WEIGHT) -> MetricsReport:
    """ Computes time, energy and distance per robot and in total.

        Args:
            - log (TrajectoryLog): Nonempty log
            - rotational_weight (float): Weight of omega^2 in the energy

        Returns:
            MetricsReport: Metrics of the run

        Raises:
            ValueError: On an empty log
    """
    if not log.records:
        raise ValueError("cannot compute metrics of an empty log")

    states = log.states()
    inputs = log.inputs()
    robots = []
    for i, offset in enumerate((0, 3)):
        steps = np.diff(states[:, offset:offset + 2], axis=0)
        distance = float(np.sum(np.hypot(steps[:, 0], steps[:, 1])))
        power = (inputs[:, offset] ** 2 + inputs[:, offset + 1] ** 2
                 + rotational_weight * inputs[:, offset + 2] ** 2)
        energy = float(np.sum(power) * log.dt)
        done = log.completion[i]
        time = log.duration if done is None else done - log.records[0].t
        robots.append(RobotMetrics(time=time, energy=energy, distance=distance))

    report = MetricsReport(name=log.name, outcome=log.outcome.value, robots=robots,
                           total_time=max(r.time for r in robots),
                           total_energy=sum(r.energy for r in robots),
                           total_distance=sum(r.distance for r in robots),
                           dock_times=list(log.dock_times),
                           undock_times=list(log.undock_times),
                           solver=_solver_stats(log))
    logger.info("Metrics of %s: time %.2f s, energy %.2f J, distance %.2f m",
                log.name, report.total_time, report.total_energy, report.total_distance)
    return report
