""" Module implementing a projected limited-memory BFGS minimizer on a box

    Variables sitting on a bound with the gradient pushing outward are held
    fixed; the two-loop recursion runs on the remaining free variables and the
    step is projected back onto the box before the Armijo test.
"""

from collections import deque
from dataclasses import dataclass
from enum import Enum
import logging
from typing import Callable, Tuple

import numpy as np

import common.constants as const
from solver.settings import SolverSettings

logger = logging.getLogger(__name__)

BOUND_EPS = 1e-12 # Distance to a bound that counts as active
CURVATURE_EPS = 1e-10 # Relative s'y below which a pair is skipped

class InnerFlag(Enum):
    """ Why the inner loop stopped """
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    SMALL_STEP = "small_step"
    LINE_SEARCH_FAILED = "line_search_failed"
    INCONSISTENT = "inconsistent" # Accepted line-search value and evaluated objective disagree

@dataclass
class InnerResult:
    """ Best iterate of the inner loop """
    x: np.ndarray
    f: float
    grad: np.ndarray
    pg_norm: float
    iterations: int
    evaluations: int
    flag: InnerFlag

def projected_gradient(x: np.ndarray, g: np.ndarray,
                       lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """ Step to the projection of x - g, zero exactly at box-KKT points """
    return np.clip(x - g, lower, upper) - x

def free_mask(x, g, lower, upper) -> np.ndarray:
    """ False where x sits on a bound and the gradient pushes outward """
    at_lower = (x <= lower + BOUND_EPS) & (g > 0.0)
    at_upper = (x >= upper - BOUND_EPS) & (g < 0.0)
    return ~(at_lower | at_upper)

def _two_loop(g, free, mem_s, mem_y) -> np.ndarray:
    q = np.where(free, g, 0.0)
    pairs = []
    for s, y in zip(reversed(mem_s), reversed(mem_y)):
        s_f = np.where(free, s, 0.0)
        y_f = np.where(free, y, 0.0)
        sy = float(s_f @ y_f)
        if sy <= CURVATURE_EPS * np.linalg.norm(s_f) * np.linalg.norm(y_f) or sy <= 0.0:
            continue
        rho = 1.0 / sy
        a = rho * float(s_f @ q)
        q = q - a * y_f
        pairs.append((s_f, y_f, rho, a))

    gamma = 1.0
    if pairs:
        s_f, y_f = pairs[0][0], pairs[0][1]
        gamma = float(s_f @ y_f) / float(y_f @ y_f)
    r = gamma * q
    for s_f, y_f, rho, a in reversed(pairs):
        b = rho * float(y_f @ r)
        r = r + s_f * (a - b)
    return -np.where(free, r, 0.0)

def _safe_value(value_fun, x) -> float:
    try:
        f = float(value_fun(x))
    except (ValueError, FloatingPointError):
        return np.inf
    return f if np.isfinite(f) else np.inf

def inner_minimize(fun: Callable[[np.ndarray], Tuple[float, np.ndarray]],
                   lower: np.ndarray, upper: np.ndarray, x0: np.ndarray,
                   s: SolverSettings,
                   value_fun: Callable[[np.ndarray], float] | None = None,
                   tol: float | None = None) -> InnerResult:
    """ Minimizes a smooth function on a box.

        Args:
            - fun: Returns value and gradient
            - lower, upper (ndarray): Box, may contain infinities
            - x0 (ndarray): Start, projected onto the box
            - s (SolverSettings): Budget, memory and line-search parameters
            - value_fun: Value only, used for line-search trial points; fun if None
            - tol (float): Absolute projected-gradient tolerance, s.gtol if None

        Returns:
            InnerResult: Last accepted iterate. Accepted iterates never increase
            the objective; a step whose evaluated objective contradicts the
            line-search trial value is rejected with flag inconsistent.
    """
    if value_fun is None:
        value_fun = lambda x: fun(x)[0]
    tol = s.gtol if tol is None else tol

    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    f, g = fun(x)
    evaluations = 1
    mem_s: deque = deque(maxlen=s.memory)
    mem_y: deque = deque(maxlen=s.memory)
    flag = InnerFlag.MAX_ITER
    pg_norm = float(np.max(np.abs(projected_gradient(x, g, lower, upper)), initial=0.0))

    iteration = 0
    while iteration < s.max_inner:
        if pg_norm <= tol:
            flag = InnerFlag.CONVERGED
            break
        iteration += 1

        free = free_mask(x, g, lower, upper)
        if mem_s:
            d = _two_loop(g, free, mem_s, mem_y)
            alpha = 1.0
        else:
            d = -np.where(free, g, 0.0)
            alpha = min(1.0, 1.0 / max(float(np.max(np.abs(d))), 1e-300))
        if not float(g @ d) < 0.0:
            d = -np.where(free, g, 0.0)
            alpha = min(1.0, 1.0 / max(float(np.max(np.abs(d))), 1e-300))
            mem_s.clear()
            mem_y.clear()

        accepted = False
        tiny_step = False
        for _ in range(const.SOLVER_MAX_BACKTRACKS):
            x_new = np.clip(x + alpha * d, lower, upper)
            step = x_new - x
            if float(np.max(np.abs(step), initial=0.0)) <= s.step_tol:
                tiny_step = True
                break
            slope = float(g @ step)
            if slope < 0.0:
                f_trial = _safe_value(value_fun, x_new)
                evaluations += 1
                if f_trial <= f + s.armijo * slope:
                    accepted = True
                    break
            alpha *= s.backtrack

        if not accepted:
            if mem_s:
                # Retry from steepest descent with a fresh memory
                logger.debug("Line search failed with memory, resetting at iteration %d", iteration)
                mem_s.clear()
                mem_y.clear()
                continue
            flag = InnerFlag.SMALL_STEP if tiny_step else InnerFlag.LINE_SEARCH_FAILED
            logger.debug("Inner loop stopped (%s) at iteration %d, f=%.6e",
                         flag.value, iteration, f)
            break

        f_new, g_new = fun(x_new)
        evaluations += 1
        if not f_new <= f + 1e-10 * max(1.0, abs(f)):
            flag = InnerFlag.INCONSISTENT
            logger.debug("Evaluated objective %.6e exceeds %.6e after an accepted step", f_new, f)
            break

        y = g_new - g
        if float(step @ y) > CURVATURE_EPS * np.linalg.norm(step) * np.linalg.norm(y):
            mem_s.append(step)
            mem_y.append(y)

        x, f, g = x_new, f_new, g_new
        pg_norm = float(np.max(np.abs(projected_gradient(x, g, lower, upper)), initial=0.0))

        if float(np.max(np.abs(step))) <= s.step_tol:
            flag = InnerFlag.SMALL_STEP
            break
    else:
        if pg_norm <= tol:
            flag = InnerFlag.CONVERGED

    return InnerResult(x=x, f=float(f), grad=g, pg_norm=pg_norm, iterations=iteration,
                       evaluations=evaluations, flag=flag)
