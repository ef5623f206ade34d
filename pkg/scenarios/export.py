""" Module implementing the result files of a scenario run

    trajectory.csv  one row per log record, fixed column order
    residuals.csv   time, the four residuals and the phase
    plot.svg        XY paths with dock markers and residual-vs-time subplots
    metrics.json    MetricsReport as JSON
"""

import json
import logging
import os
from typing import List

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

import common.constants as const
from common.helper import ensure_dir
from simulation.metrics import MetricsReport
from simulation.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

STATE_COLUMNS = ["p1x", "p1y", "th1", "p2x", "p2y", "th2"]
INPUT_COLUMNS = ["v1x", "v1y", "w1", "v2x", "v2y", "w2"]
RESIDUAL_COLUMNS = ["r_axis", "r_align", "r_dist", "r_soft"]
TRAJECTORY_COLUMNS = ["t"] + STATE_COLUMNS + INPUT_COLUMNS + RESIDUAL_COLUMNS + ["phase", "solver_status"]

def _io_error(path: str, err: OSError) -> OSError:
    return OSError(f"{path}: {err.strerror or err}")

def trajectory_frame(log: TrajectoryLog) -> pd.DataFrame:
    """ Log records as a data frame with the trajectory column order """
    frame = pd.DataFrame(np.column_stack([log.times(), log.states(), log.inputs(), log.residuals()]),
                         columns=["t"] + STATE_COLUMNS + INPUT_COLUMNS + RESIDUAL_COLUMNS)
    frame["phase"] = [r.phase.label for r in log.records]
    frame["solver_status"] = [r.solver_status for r in log.records]
    return frame[TRAJECTORY_COLUMNS]

def export_trajectory(log: TrajectoryLog, path: str) -> None:
    """ Writes the full log as CSV.

        Raises:
            OSError: Naming path when it cannot be written
    """
    try:
        trajectory_frame(log).to_csv(path, index=False)
    except OSError as err:
        raise _io_error(path, err) from err
    logger.info("Wrote %d records to %s", len(log), path)

def export_residuals(log: TrajectoryLog, path: str) -> None:
    """ Writes time, residuals and phase as CSV """
    frame = trajectory_frame(log)[["t"] + RESIDUAL_COLUMNS + ["phase"]]
    try:
        frame.to_csv(path, index=False)
    except OSError as err:
        raise _io_error(path, err) from err

def read_trajectory(path: str) -> pd.DataFrame:
    """ Reads a trajectory CSV written by export_trajectory """
    try:
        frame = pd.read_csv(path)
    except OSError as err:
        raise _io_error(path, err) from err
    if list(frame.columns) != TRAJECTORY_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {list(frame.columns)}")
    return frame

def _dock_indices(log: TrajectoryLog) -> List[int]:
    times = log.times()
    return [int(np.argmin(np.abs(times - t))) for t in log.dock_times]

def export_plot(log: TrajectoryLog, path: str) -> None:
    """ Draws paths and residuals into an SVG file

        Args:
            - log (TrajectoryLog): Nonempty log
            - path (str): Output file
    """
    states = log.states()
    residuals = log.residuals()
    times = log.times()

    fig = plt.figure(figsize=(12, 8))
    grid = fig.add_gridspec(len(RESIDUAL_COLUMNS), 2)
    ax_xy = fig.add_subplot(grid[:, 0])
    ax_xy.plot(states[:, 0], states[:, 1], label="robot 1")
    ax_xy.plot(states[:, 3], states[:, 4], label="robot 2")
    ax_xy.scatter(states[:1, [0, 3]], states[:1, [1, 4]], marker="o", color="grey", label="start")
    docks = _dock_indices(log)
    if docks:
        ax_xy.scatter(states[docks][:, [0, 3]], states[docks][:, [1, 4]],
                      marker="x", color="red", label="docked")
    ax_xy.set_xlabel("x [m]")
    ax_xy.set_ylabel("y [m]")
    ax_xy.set_aspect("equal", adjustable="datalim")
    ax_xy.legend(loc="best")
    ax_xy.set_title(log.name)

    for i, column in enumerate(RESIDUAL_COLUMNS):
        ax = fig.add_subplot(grid[i, 1])
        ax.plot(times, residuals[:, i])
        for t in log.dock_times:
            ax.axvline(t, color="red", linestyle="--", linewidth=0.8)
        for t in log.undock_times:
            ax.axvline(t, color="grey", linestyle=":", linewidth=0.8)
        ax.set_ylabel(column)
        if i == len(RESIDUAL_COLUMNS) - 1:
            ax.set_xlabel("t [s]")

    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    except OSError as err:
        raise _io_error(path, err) from err
    finally:
        plt.close(fig)
    logger.info("Wrote plot to %s", path)

def export_metrics(report: MetricsReport, path: str) -> None:
    """ Writes the metrics report as a JSON object """
    try:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(report.to_dict(), handle, indent=2)
    except OSError as err:
        raise _io_error(path, err) from err

def export_run(log: TrajectoryLog, report: MetricsReport, out_dir: str) -> List[str]:
    """ Writes all four result files of a run into out_dir

        Returns:
            list: Paths written
    """
    out_dir = ensure_dir(out_dir)
    paths = [os.path.join(out_dir, name)
             for name in (const.TRAJECTORY_FILE, const.RESIDUAL_FILE,
                         const.PLOT_FILE, const.METRICS_FILE)]
    export_trajectory(log, paths[0])
    export_residuals(log, paths[1])
    export_plot(log, paths[2])
    export_metrics(report, paths[3])
    return paths

def comparison_frame(baseline: MetricsReport, coupled: MetricsReport) -> pd.DataFrame:
    """ Table of both runs with improvement_pct = (baseline - coupled) / baseline * 100 """
    rows = []
    for quantity in ("time", "energy", "distance"):
        for i in (0, 1):
            rows.append((f"robot{i + 1}_{quantity}",
                         getattr(baseline.robots[i], quantity),
                         getattr(coupled.robots[i], quantity)))
        rows.append((f"total_{quantity}", getattr(baseline, f"total_{quantity}"),
                     getattr(coupled, f"total_{quantity}")))
    frame = pd.DataFrame(rows, columns=["metric", "baseline", "coupled"])
    base = frame["baseline"].where(frame["baseline"] != 0.0)
    frame["improvement_pct"] = (frame["baseline"] - frame["coupled"]) / base * 100.0
    return frame

def export_comparison(baseline: MetricsReport, coupled: MetricsReport, path: str) -> pd.DataFrame:
    """ Writes the comparison table as CSV and returns it """
    frame = comparison_frame(baseline, coupled)
    try:
        frame.to_csv(path, index=False)
    except OSError as err:
        raise _io_error(path, err) from err
    logger.info("Wrote comparison to %s", path)
    return frame
