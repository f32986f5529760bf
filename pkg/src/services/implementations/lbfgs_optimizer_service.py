"""
L-BFGS con recursión de dos bucles y búsqueda lineal de Wolfe fuerte (scipy). Cada llamada a
`lbfgs_step` es una iteración sobre un objetivo determinista fijo.
"""

import logging
import warnings

import numpy as np
from scipy.optimize import line_search

from hcsp.diffengine import ParameterVector
from hcsp.errors import TrainingAbort
from src.services.optimizer_service import Objective, OptimizerService
from src.services.schemas import OptimizerSchedule, WindowTrainState

WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
CURVATURE_EPS = 1e-10

logger = logging.getLogger("hcsp")


class _CachedObjective:
    """Evita reevaluar el objetivo cuando la búsqueda lineal pide f y f' en el mismo punto."""

    def __init__(self, objective: Objective, template: ParameterVector):
        self.objective = objective
        self.template = template
        self._point = None
        self._result = None

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        if self._point is None or not np.array_equal(theta, self._point):
            loss, gradient = self.objective(self.template.with_values(theta))
            self._point = np.array(theta, copy=True)
            self._result = (float(loss), np.array(gradient.values, copy=True))
        return self._result

    def value(self, theta):
        return self(theta)[0]

    def gradient(self, theta):
        return self(theta)[1]


def two_loop_direction(gradient: np.ndarray, memory) -> np.ndarray:
    """H·g aproximado a partir de los pares (s, y) almacenados."""
    q = gradient.copy()
    alphas = []
    for s, y in reversed(memory):
        rho = 1.0 / np.dot(y, s)
        alpha = rho * np.dot(s, q)
        q -= alpha * y
        alphas.append((rho, alpha))
    alphas.reverse()
    if memory:
        s, y = memory[-1]
        q *= np.dot(s, y) / np.dot(y, y)
    for (s, y), (rho, alpha) in zip(memory, alphas):
        beta = rho * np.dot(y, q)
        q += (alpha - beta) * s
    return q


def lbfgs_step(state: WindowTrainState, loss_fn: Objective, schedule: OptimizerSchedule) -> WindowTrainState:
    cache = _CachedObjective(loss_fn, state.params)
    theta = state.params.values
    f0, g0 = cache(theta)
    if not (np.isfinite(f0) and np.all(np.isfinite(g0))):
        raise TrainingAbort(f"pérdida o gradiente no finitos en L-BFGS (f={f0})")
    if not np.any(g0):
        return state.with_loss(f0, converged_reason="tolerance")

    memory = state.lbfgs_memory
    direction = -two_loop_direction(g0, memory)
    if np.dot(direction, g0) >= 0.0:
        memory = ()
        direction = -g0
    # Sin historial, el primer paso de prueba se normaliza con |g|
    old_old_fval = f0 + np.linalg.norm(g0) / 2.0 if not memory else None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        alpha, *_ = line_search(
            cache.value, cache.gradient, theta, direction,
            gfk=g0, old_fval=f0, old_old_fval=old_old_fval, c1=WOLFE_C1, c2=WOLFE_C2,
        )
    if alpha is None:
        logger.warning(f"[Trainer] búsqueda lineal fallida (f={f0:.6e}); se detiene L-BFGS")
        return state.with_loss(f0, converged_reason="line_search_failure")

    theta_new = theta + alpha * direction
    f_new, g_new = cache(theta_new)
    if not np.isfinite(f_new):
        raise TrainingAbort(f"pérdida no finita tras la búsqueda lineal (alpha={alpha:g})")
    s = theta_new - theta
    y = g_new - g0
    if np.dot(s, y) > CURVATURE_EPS:
        memory = (memory + ((s, y),))[-schedule.lbfgs_history:]
    return state.with_loss(f_new, params=state.params.with_values(theta_new), lbfgs_memory=memory)


class LBFGSOptimizerService(OptimizerService):
    phase = "lbfgs"

    def __init__(self, schedule: OptimizerSchedule):
        self.schedule = schedule

    def step(self, state: WindowTrainState, objective: Objective) -> WindowTrainState:
        return lbfgs_step(state, objective, self.schedule)
