from typing import Callable, Optional

import numpy as np
from more_itertools import pairwise

from src.services.schemas import OptimizerSchedule


def convergence_check(
    loss_history: list[float],
    schedule: OptimizerSchedule,
    eval_loss_fn: Optional[Callable[[], float]] = None,
) -> bool:
    """
    Media móvil de |Δ pérdida| sobre las últimas `ma_window` diferencias, comparada con la
    tolerancia. Si se pasa `eval_loss_fn`, primero se añade al historial una evaluación nueva
    sobre el lote de evaluación.
    """
    if eval_loss_fn is not None:
        loss_history.append(float(eval_loss_fn()))
    window = schedule.ma_window
    if len(loss_history) < window + 1:
        return False
    recent = loss_history[-(window + 1):]
    deltas = [abs(after - before) for before, after in pairwise(recent)]
    return bool(np.mean(deltas) < schedule.loss_tolerance)
