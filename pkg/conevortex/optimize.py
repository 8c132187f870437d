"""Monotone first-order descent on complex arrays.

Two step rules share the same Armijo safeguard:

* ``"bb"``: preconditioned gradient steps with Barzilai-Borwein lengths;
* ``"ncg"``: preconditioned Polak-Ribiere+ nonlinear conjugate gradients.

Objectives return ``(value, gradient)`` with the gradient packed as dF/dRe + i dF/dIm.
Returning a non-finite value marks a trial point as infeasible.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal

import numpy as np

from .errors import ConfigError, DivergenceError

logger = logging.getLogger(__name__)

StepRule = Literal["bb", "ncg"]
Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]

_ARMIJO = 1e-4
_MAX_BACKTRACKS = 60
_STEP_MIN = 1e-14
_STEP_MAX = 1e8


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool
    message: str
    history: List[Dict[str, float]] = field(default_factory=list)


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a.real * b.real + a.imag * b.imag))


def descend(
    fun: Objective,
    x0: np.ndarray,
    *,
    free: np.ndarray | None = None,
    precond: np.ndarray | None = None,
    max_iters: int = 1000,
    grad_tol: float = 1e-6,
    relative: bool = True,
    step_rule: StepRule = "bb",
    initial_step: float = 1.0,
    log_every: int = 100,
) -> DescentResult:
    """Minimize ``fun`` from ``x0``; coordinates outside ``free`` never move.

    The stopping measure is sqrt(<g, P^-1 g>), divided by max(|F|, 1) when ``relative``.
    """
    if step_rule not in ("bb", "ncg"):
        raise ConfigError(f"Unsupported step rule: {step_rule!r}")
    x = np.array(x0, dtype=complex, copy=True)
    mask = np.ones(x.shape, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    inv_p = np.ones(x.shape) if precond is None else 1.0 / np.asarray(precond, dtype=float)

    value, grad = fun(x)
    if not math.isfinite(value):
        raise DivergenceError("Objective is not finite at the starting point")
    grad = np.where(mask, grad, 0.0)
    history: List[Dict[str, float]] = []

    def measure(v: float, g: np.ndarray) -> float:
        norm = math.sqrt(max(_dot(g, inv_p * g), 0.0))
        return norm / max(abs(v), 1.0) if relative else norm

    gnorm = measure(value, grad)
    step = initial_step
    direction = -inv_p * grad
    prev_x = prev_grad = prev_z = None
    message = "max_iters reached"
    converged = gnorm <= grad_tol
    iteration = 0
    if converged:
        message = "initial point is stationary"

    while not converged and iteration < max_iters:
        iteration += 1
        z = inv_p * grad
        if step_rule == "ncg" and prev_grad is not None:
            beta = max(0.0, _dot(z, grad - prev_grad) / max(_dot(prev_z, prev_grad), 1e-300))
            direction = -z + beta * direction
            if _dot(grad, direction) >= 0.0:
                direction = -z
        else:
            direction = -z
        if prev_x is not None and step_rule == "bb":
            s = x - prev_x
            y = grad - prev_grad
            sy = _dot(s, y)
            step = _dot(s, s / inv_p) / sy if sy > 0.0 else min(2.0 * step, _STEP_MAX)
        step = min(max(step, _STEP_MIN), _STEP_MAX)

        slope = _dot(grad, direction)
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            trial = x + step * direction
            trial_value, trial_grad = fun(trial)
            if math.isfinite(trial_value) and trial_value <= value + _ARMIJO * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            message = "line search failed"
            break
        if not trial_value <= value:
            raise DivergenceError("Accepted step increased the objective")

        prev_x, prev_grad, prev_z = x, grad, z
        x, value = trial, float(trial_value)
        grad = np.where(mask, trial_grad, 0.0)
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(f"Non-finite gradient at iteration {iteration}")
        gnorm = measure(value, grad)
        if step_rule == "ncg":
            step = step * 2.0

        if iteration % log_every == 0:
            record = {"iteration": iteration, "energy": value, "grad_norm": gnorm, "step": step}
            history.append(record)
            logger.debug("descent %s", record)
        if gnorm <= grad_tol:
            converged = True
            message = "gradient tolerance reached"

    history.append({"iteration": iteration, "energy": value, "grad_norm": gnorm, "step": step})
    return DescentResult(x, value, gnorm, iteration, converged, message, history)
