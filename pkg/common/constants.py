"""Module defining constants for dockmpc """

import math

# GEOMETRY RELATED
ROBOT_RADIUS = 0.1 # Disk radius r [m]
DOCKING_DISTANCE = 0.2 # Center to center distance when docked, delta_r [m]
COLLISION_RADIUS = 0.4 # Keep-out radius r_ca [m], twice the docking distance
DELTA_PHI_1_DEG = 90.0 # Interface offset of robot 1 [deg]
DELTA_PHI_2_DEG = -90.0 # Interface offset of robot 2 [deg]
COINCIDENCE_EPS = 1e-9 # Below this center distance the bearing is undefined [m]

# CORRIDOR RELATED
CORRIDOR_HALF_ANGLE_DEG = 15.0 # Aperture of the approach cone [deg]
CORRIDOR_SHARPNESS = 10.0 # tanh gain l
CORRIDOR_FEAS_TOL = 1e-3 # Allowed gate leakage inside the cone
ANGLE_SMOOTHING = 1e-4 # |a| ~ sqrt(a^2 + eps^2) inside the optimizer [rad]
LITERAL_DISTANCE_RESIDUAL = False # Use d^2 - delta_r instead of d^2 - delta_r^2

# MPC RELATED
HORIZON_STEPS = 20 # N
TIME_STEP = 0.25 # dt = T / N [s]
V_MAX = 1.0 # |vx|, |vy| bound [m/s]
OMEGA_MAX_DEG = 90.0 # |omega| bound [deg/s]
COUPLING_WEIGHTS = (30.0, 1000.0, 1.0, 200.0) # lambda_dr, lambda_dtheta, lambda_dv, lambda_dphi
SMOOTHING_WEIGHTS = (0.1, 1.0) # lambda_j, lambda_omega
TERMINAL_WEIGHTS = (1.0, 1.0, 200.0, 1.0, 1.0, 200.0) # lambda_g
SLACK_CAPS = (20.0, 2.1, 10.0, 3.2) # eps_max for dr, dtheta, dv, dphi before docking
DOCKED_SLACK_CAPS = (0.01, 0.05, 0.01, 0.05) # eps_max after the latch is set

# LATCH RELATED
LATCH_AXIS_DEG = 2.0
LATCH_ALIGN_DEG = 2.0
LATCH_DISTANCE = 0.01 # |d - delta_r| [m]
LATCH_SPEED = 0.05 # Relative translational speed [m/s]
CLOSE_RANGE_D = 1.0 # Closing / final approach boundary [m]

# SCENARIO RELATED
GOAL_POSITION_TOL = 0.05 # [m]
GOAL_HEADING_TOL_DEG = 5.0 # [deg]
TRANSFER_DURATION = 7.0 # Time coupled before uncoupling [s]
SCENARIO_TIMEOUT = 60.0 # Simulated seconds before giving up
MAX_CONSECUTIVE_FAILURES = 2 # Failed solves before a cold restart
ROTATIONAL_ENERGY_WEIGHT = 0.0 # Weight of omega^2 in the energy metric
CONFIG_SCHEMA_VERSION = 1

# SOLVER RELATED
SOLVER_MAX_OUTER = 30
SOLVER_MAX_INNER = 200
SOLVER_MU0 = 10.0 # Initial penalty
SOLVER_MU_GROWTH = 5.0
SOLVER_MU_MAX = 1e8
SOLVER_CTOL = 1e-4 # Max constraint violation
SOLVER_GTOL = 1e-5 # Projected gradient tolerance of the scaled Lagrangian
SOLVER_STEP_TOL = 1e-9
SOLVER_ARMIJO = 1e-4
SOLVER_BACKTRACK = 0.5
SOLVER_MAX_BACKTRACKS = 40
LBFGS_MEMORY = 10
SOLVER_STALL_ITERATIONS = 3 # Outer iterations without progress at max penalty

# MPC SOLVER BUDGET -- Used by the presets, the full defaults are too slow per step
MPC_MAX_OUTER = 12
MPC_MAX_INNER = 80
MPC_GTOL = 1e-4

# GRADIENT CHECK RELATED
GRADIENT_CHECK_STEP = 1e-6
GRADIENT_CHECK_TOL = 1e-6
GRADIENT_CHECK_TRIALS = 100

# LOGGING RELATED
LOG_ENV_VAR = "DOCKMPC_LOG"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# EXPORT RELATED
TRAJECTORY_FILE = "trajectory.csv"
RESIDUAL_FILE = "residuals.csv"
PLOT_FILE = "plot.svg"
METRICS_FILE = "metrics.json"
COMPARISON_FILE = "comparison.csv"

TWO_PI = 2.0 * math.pi
