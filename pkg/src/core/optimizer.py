"""Gradient descent with Armijo backtracking on a flat parameter vector."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

logger = logging.getLogger("optimizer")


class BacktrackingLineSearch:
    """Armijo backtracking; the first trial step is extrapolated from the previous decrease."""

    def __init__(self, contraction_factor: float = 0.5, optimism: float = 2.0,
                 sufficient_decrease: float = 1e-4, max_iterations: int = 40,
                 initial_step_size: float = 1.0):
        self.contraction_factor = contraction_factor
        self.optimism = optimism
        self.sufficient_decrease = sufficient_decrease
        self.max_iterations = max_iterations
        self.initial_step_size = initial_step_size
        self._old_f0: Optional[float] = None

    def search(self, objective: Callable[[np.ndarray], float], x: np.ndarray, d: np.ndarray,
               f0: float, df0: float) -> tuple[float, np.ndarray, float]:
        """Return (alpha, new_x, new_f) along direction ``d`` with slope ``df0`` < 0."""
        norm_d = float(np.linalg.norm(d))
        if self._old_f0 is not None and df0 < 0.0 and self._old_f0 > f0:
            alpha = self.optimism * 2.0 * (f0 - self._old_f0) / df0
        else:
            alpha = self.initial_step_size / norm_d
        new_x = x + alpha * d
        new_f = objective(new_x)
        steps = 1
        while new_f > f0 + self.sufficient_decrease * alpha * df0 and steps <= self.max_iterations:
            alpha *= self.contraction_factor
            new_x = x + alpha * d
            new_f = objective(new_x)
            steps += 1
        if new_f > f0:
            alpha, new_x, new_f = 0.0, x, f0
        self._old_f0 = f0
        return alpha, new_x, new_f


@dataclass(frozen=True)
class DescentTrace:
    theta: np.ndarray
    loss: float
    grad_norm: float
    iterations: int
    converged: bool
    stalled: bool


def gradient_descent(objective: Callable[[np.ndarray], float], gradient: Callable[[np.ndarray], np.ndarray],
                     theta0: np.ndarray, grad_tol: float, max_iterations: int = 20_000,
                     line_search: Optional[BacktrackingLineSearch] = None) -> DescentTrace:
    """Steepest descent until ||g|| <= grad_tol, a rejected step, or the iteration cap."""
    searcher = line_search or BacktrackingLineSearch()
    theta = np.array(theta0, dtype=float)
    loss = objective(theta)
    g = gradient(theta)
    grad_norm = float(np.linalg.norm(g))
    iterations = 0
    stalled = False
    while grad_norm > grad_tol and iterations < max_iterations:
        alpha, theta, loss = searcher.search(objective, theta, -g, loss, -grad_norm ** 2)
        iterations += 1
        g = gradient(theta)
        grad_norm = float(np.linalg.norm(g))
        if alpha == 0.0:
            stalled = True
            break
    converged = grad_norm <= grad_tol
    logger.debug("Descent stopped after %d iterations: loss %.6g, |g| %.3g, converged=%s",
                 iterations, loss, grad_norm, converged)
    return DescentTrace(theta=theta, loss=float(loss), grad_norm=grad_norm, iterations=iterations,
                        converged=converged, stalled=stalled)
