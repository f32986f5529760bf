import numpy as np

from hcsp.diffengine import ParameterVector
from hcsp.errors import TrainingAbort
from src.services.optimizer_service import Objective, OptimizerService
from src.services.schemas import OptimizerSchedule, WindowTrainState


def adam_step(state: WindowTrainState, gradient: ParameterVector, schedule: OptimizerSchedule) -> WindowTrainState:
    """Actualización de Adam con corrección de sesgo y paso fijo."""
    g = gradient.values
    if not np.all(np.isfinite(g)):
        raise TrainingAbort("gradiente no finito en Adam")
    t = state.adam_t + 1
    m = schedule.adam_beta1 * state.adam_m + (1.0 - schedule.adam_beta1) * g
    v = schedule.adam_beta2 * state.adam_v + (1.0 - schedule.adam_beta2) * (g * g)
    m_hat = m / (1.0 - schedule.adam_beta1 ** t)
    v_hat = v / (1.0 - schedule.adam_beta2 ** t)
    values = state.params.values - schedule.adam_step * m_hat / (np.sqrt(v_hat) + schedule.adam_eps)
    if not np.all(np.isfinite(values)):
        raise TrainingAbort("actualización no finita en Adam")
    return state.model_copy(update={
        "params": state.params.with_values(values),
        "adam_m": m,
        "adam_v": v,
        "adam_t": t,
    })


class AdamOptimizerService(OptimizerService):
    phase = "adam"

    def __init__(self, schedule: OptimizerSchedule):
        self.schedule = schedule

    def step(self, state: WindowTrainState, objective: Objective) -> WindowTrainState:
        loss, gradient = objective(state.params)
        # La pérdida registrada corresponde a los parámetros antes de la actualización
        state = state.with_loss(loss)
        return adam_step(state, gradient, self.schedule)
