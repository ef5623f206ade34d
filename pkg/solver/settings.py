""" Module defining the solver settings shared by the inner and outer loop """

from dataclasses import dataclass, fields
import math

import common.constants as const

@dataclass(frozen=True)
class SolverSettings:
    """ Iteration budgets, tolerances and line-search parameters

        Note:
            gtol bounds the projected gradient of the scaled Lagrangian, the
            objective being scaled to unit gradient norm at the start, see
            solver.auglag.
    """
    max_outer: int = const.SOLVER_MAX_OUTER
    max_inner: int = const.SOLVER_MAX_INNER
    mu0: float = const.SOLVER_MU0
    mu_growth: float = const.SOLVER_MU_GROWTH
    ctol: float = const.SOLVER_CTOL
    gtol: float = const.SOLVER_GTOL
    step_tol: float = const.SOLVER_STEP_TOL
    armijo: float = const.SOLVER_ARMIJO
    backtrack: float = const.SOLVER_BACKTRACK
    memory: int = const.LBFGS_MEMORY

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"solver setting {item.name} must be positive, got {value}")
        if self.mu_growth <= 1.0:
            raise ValueError(f"mu_growth must exceed 1, got {self.mu_growth}")
        if not 0.0 < self.backtrack < 1.0 or not 0.0 < self.armijo < 1.0:
            raise ValueError("armijo and backtrack must lie in (0, 1)")
        object.__setattr__(self, "max_outer", int(self.max_outer))
        object.__setattr__(self, "max_inner", int(self.max_inner))
        object.__setattr__(self, "memory", int(self.memory))

    @classmethod
    def for_mpc(cls) -> "SolverSettings":
        """ Budget used per receding-horizon step """
        return cls(max_outer=const.MPC_MAX_OUTER, max_inner=const.MPC_MAX_INNER,
                   gtol=const.MPC_GTOL)
