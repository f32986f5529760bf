from typing import Callable

from hcsp.diffengine import ParameterVector
from src.services.schemas import WindowTrainState

# params -> (pérdida, gradiente) sobre un lote fijo
Objective = Callable[[ParameterVector], tuple[float, ParameterVector]]


class OptimizerService:
    """Interfaz para los optimizadores de una ventana."""

    phase: str = ""

    def step(self, state: WindowTrainState, objective: Objective) -> WindowTrainState:
        """
        Aplica una iteración sobre el objetivo dado y devuelve el estado nuevo, con la pérdida
        de entrenamiento añadida al historial.
        """
        raise NotImplementedError
