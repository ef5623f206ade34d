""" Module implementing the augmented Lagrangian solver

    Solves min f(x) s.t. c(x) >= 0, lower <= x <= upper. The inequalities
    enter through
        Phi(x) = sigma f(x) + 1/(2 mu) * sum(max(0, lam - mu c)^2 - lam^2)
    with sigma = 1 / max(1, |grad f(x0)|_inf) taken over the variables not
    held by a bound. Phi is minimized on the box by solver.lbfgsb; afterwards
    the multipliers are updated to max(0, lam - mu c) and mu grows when the
    violation does not shrink fast enough.

    Problems are duck-typed: anything with n, lower, upper, values(x) -> (f, c)
    and evaluate(x) -> (f, grad, c, jac) works, planning.nlp.NlpProblem and
    FunctionProblem below among them.
"""

from dataclasses import dataclass
from enum import Enum
import logging
import time
from typing import Callable, Tuple

import numpy as np

import common.constants as const
from solver.lbfgsb import InnerFlag, free_mask, inner_minimize, projected_gradient
from solver.settings import SolverSettings

logger = logging.getLogger(__name__)

class SolveStatus(Enum):
    """ Outcome of one solve """
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    INFEASIBLE_STALL = "infeasible_stall"
    NUMERIC_ERROR = "numeric_error"

    @classmethod
    def from_str(cls, value: str) -> "SolveStatus":
        for status in cls:
            if status.value == value:
                return status
        raise ValueError(f"Unknown solve status: {value}")

@dataclass
class SolveResult:
    """ Best iterate of a solve with its diagnostics

        Note:
            pg_norm is measured on the scaled Lagrangian, objective is the
            unscaled value f(x).
    """
    x: np.ndarray
    objective: float
    max_violation: float
    status: SolveStatus
    outer_iterations: int
    inner_iterations: int
    wall_time: float
    multipliers: np.ndarray
    pg_norm: float
    objective_scale: float = 1.0

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

class FunctionProblem:
    """ Adapter that exposes plain callables through the problem interface

        Args:
            - objective: x -> (f, grad)
            - lower, upper (ndarray): Box
            - constraints: x -> (c, jac) with c >= 0 feasible, None for no constraints
    """

    def __init__(self, objective: Callable[[np.ndarray], Tuple[float, np.ndarray]],
                 lower, upper,
                 constraints: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]] | None = None):
        self._objective = objective
        self._constraints = constraints
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.n = self.lower.size

    def evaluate(self, x):
        f, g = self._objective(x)
        if self._constraints is None:
            return float(f), np.asarray(g, dtype=float), np.zeros(0), np.zeros((0, self.n))
        c, jac = self._constraints(x)
        return (float(f), np.asarray(g, dtype=float),
                np.atleast_1d(np.asarray(c, dtype=float)),
                np.atleast_2d(np.asarray(jac, dtype=float)))

    def values(self, x):
        f, _, c, _ = self.evaluate(x)
        return f, c

def _violation(c: np.ndarray) -> float:
    return float(np.max(-c, initial=0.0)) if c.size else 0.0

def _phi(f: float, c: np.ndarray, lam: np.ndarray, mu: float) -> float:
    shifted = np.maximum(0.0, lam - mu * c)
    return f + float(shifted @ shifted - lam @ lam) / (2.0 * mu)

def _objective_scale(x: np.ndarray, g: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> float:
    """ Factor that gives the free part of the starting gradient unit infinity norm """
    free = free_mask(x, g, lower, upper)
    return 1.0 / max(1.0, float(np.max(np.abs(g[free]), initial=0.0)))

def solve(p, x0, s: SolverSettings, multipliers: np.ndarray | None = None) -> SolveResult:
    """ Solves an inequality constrained problem on a box.

        The objective is scaled by 1 / max(1, |grad f(x0)|_inf), over the
        variables not held by a bound, before the outer loop starts, so gtol
        is a reduction of the projected gradient relative to the start. Each
        inner minimization stops at a tolerance omega that begins at 1 / mu0,
        shrinks by mu after every outer iteration with enough constraint
        progress and never drops below gtol.

        Args:
            - p: Problem, see module docstring
            - x0 (ndarray): Initial guess, projected onto the box
            - s (SolverSettings): Budgets and tolerances
            - multipliers (ndarray): Warm-start multipliers in unscaled units,
              zeros if None or if the size does not match

        Returns:
            SolveResult: status converged only if the max violation is at most
            ctol and the projected gradient of the scaled Lagrangian is at most
            gtol. Multipliers are returned in unscaled units. Numeric trouble
            is reported as status numeric_error with the best finite iterate,
            never raised.
    """
    start = time.perf_counter()
    x = np.clip(np.asarray(x0, dtype=float), p.lower, p.upper)
    mu = s.mu0
    omega = max(s.gtol, 1.0 / mu)
    scale = 1.0
    inner_total = 0
    outer = 0
    status = SolveStatus.MAX_ITER
    trace = logger.isEnabledFor(logging.DEBUG)

    best = None # (x, f, violation, scaled lam, pg_norm)
    lam = np.zeros(0)
    try:
        f, g, c, jac = p.evaluate(x)
        scale = _objective_scale(x, g, p.lower, p.upper)
        lam = np.zeros(c.size)
        if multipliers is not None and np.asarray(multipliers).shape == c.shape:
            lam = np.maximum(0.0, np.asarray(multipliers, dtype=float)) * scale
        best = (x, f, _violation(c), lam, np.inf)
        prev_violation = np.inf
        stalled = 0

        while outer < s.max_outer:
            outer += 1
            lam_k, mu_k = lam, mu

            def phi_grad(z, lam_k=lam_k, mu_k=mu_k):
                f_z, g_z, c_z, jac_z = p.evaluate(z)
                shifted = np.maximum(0.0, lam_k - mu_k * c_z)
                value = scale * f_z + float(shifted @ shifted - lam_k @ lam_k) / (2.0 * mu_k)
                return value, scale * g_z - jac_z.T @ shifted

            def phi_value(z, lam_k=lam_k, mu_k=mu_k):
                f_z, c_z = p.values(z)
                return _phi(scale * f_z, c_z, lam_k, mu_k)

            inner = inner_minimize(phi_grad, p.lower, p.upper, x, s,
                                   value_fun=phi_value, tol=omega)
            inner_total += inner.iterations
            if inner.flag is InnerFlag.INCONSISTENT:
                raise ValueError(f"objective values disagree between evaluators in outer iteration {outer}")
            x = inner.x

            f, g, c, jac = p.evaluate(x)
            violation = _violation(c)
            lam = np.maximum(0.0, lam_k - mu_k * c)
            pg = projected_gradient(x, scale * g - jac.T @ lam, p.lower, p.upper)
            pg_norm = float(np.max(np.abs(pg), initial=0.0))

            if violation < best[2] or (violation <= s.ctol and f <= best[1]) or best[4] == np.inf:
                best = (x, f, violation, lam, pg_norm)

            if trace:
                logger.debug("outer %d f=%.6e |g_proj|=%.3e max_viol=%.3e mu=%.1e omega=%.1e inner=%d (%s)",
                             outer, f, pg_norm, violation, mu, omega, inner.iterations,
                             inner.flag.value)

            if violation <= s.ctol and pg_norm <= s.gtol:
                best = (x, f, violation, lam, pg_norm)
                status = SolveStatus.CONVERGED
                break

            if violation > s.ctol and violation > 0.25 * prev_violation:
                if mu >= const.SOLVER_MU_MAX:
                    stalled += 1
                    if stalled >= const.SOLVER_STALL_ITERATIONS:
                        status = SolveStatus.INFEASIBLE_STALL
                        break
                mu = min(mu * s.mu_growth, const.SOLVER_MU_MAX)
                omega = max(s.gtol, 1.0 / mu)
            else:
                omega = max(s.gtol, omega / mu)
                if inner.flag is InnerFlag.LINE_SEARCH_FAILED:
                    logger.debug("Inner line search failed in outer iteration %d", outer)
            prev_violation = violation

    except (ValueError, ArithmeticError) as err:
        logger.warning("Solver stopped on a numeric error: %s", err)
        status = SolveStatus.NUMERIC_ERROR
        if best is None:
            best = (x, np.nan, np.inf, lam, np.inf)

    x_best, f_best, violation_best, lam_best, pg_best = best
    return SolveResult(x=x_best, objective=float(f_best), max_violation=float(violation_best),
                       status=status, outer_iterations=outer, inner_iterations=inner_total,
                       wall_time=time.perf_counter() - start,
                       multipliers=np.asarray(lam_best) / scale, pg_norm=float(pg_best),
                       objective_scale=scale)
