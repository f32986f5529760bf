from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, model_validator

from hcsp.diffengine import ParameterVector

ConvergedReason = Literal["tolerance", "max_iters", "line_search_failure"]


class SamplingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_pde_per_window: PositiveInt = 20000
    batch_size: PositiveInt
    eval_batch_size: PositiveInt
    rng_seed: int = 0
    full_batch: bool = False
    n_interface: PositiveInt = 256

    @model_validator(mode="after")
    def _check_batches(self):
        if self.full_batch:
            if self.batch_size != self.n_pde_per_window:
                raise ValueError(
                    f"full_batch exige batch_size == n_pde_per_window ({self.batch_size} != {self.n_pde_per_window})"
                )
        elif self.eval_batch_size <= self.batch_size:
            raise ValueError(
                f"el lote de evaluación ({self.eval_batch_size}) debe ser mayor que el de entrenamiento ({self.batch_size})"
            )
        return self


class LossWeights(BaseModel):
    """
    Pesos de la pérdida compuesta. λ_P(t) = λ_P_base · (C_T (1 - t/t_max) + 1); λ_B se conserva
    por completitud pero ningún problema de referencia genera términos de contorno.
    """
    model_config = ConfigDict(frozen=True)

    lambda_P_base: float = Field(default=1.0, ge=0.0)
    lambda_I: float = Field(default=1.0, ge=0.0)
    lambda_B: float = Field(default=0.0, ge=0.0)
    causal_C_T: float = Field(default=10.0, ge=0.0)
    causal_t_max: PositiveFloat


class OptimizerSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    adam_step: PositiveFloat
    adam_iters: NonNegativeInt
    adam_beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: PositiveFloat = 1e-8
    lbfgs_max_iters: NonNegativeInt
    lbfgs_history: PositiveInt = 20
    loss_tolerance: PositiveFloat
    ma_window: Literal[5] = 5
    eval_every: PositiveInt = 100


class WindowTrainState(BaseModel):
    """Estado del optimizador de una ventana; cada paso devuelve un estado nuevo."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: ParameterVector
    adam_m: np.ndarray
    adam_v: np.ndarray
    adam_t: NonNegativeInt = 0
    lbfgs_memory: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    loss_history: tuple[float, ...] = ()
    best_params: Optional[ParameterVector] = None
    best_loss: float = float("inf")
    converged_reason: Optional[ConvergedReason] = None

    @classmethod
    def initial(cls, params: ParameterVector) -> "WindowTrainState":
        zeros = np.zeros(params.size)
        return cls(params=params, adam_m=zeros, adam_v=zeros.copy())

    def with_loss(self, loss: float, **update) -> "WindowTrainState":
        """Añade una pérdida de entrenamiento al historial (solo se agrega)."""
        return self.model_copy(update={**update, "loss_history": self.loss_history + (loss,)})

    def with_eval(self, eval_loss: float) -> "WindowTrainState":
        """Registra la pérdida sobre el lote de evaluación fijo; el mejor iterado se elige solo con ella."""
        if not eval_loss < self.best_loss:
            return self
        return self.model_copy(update={"best_params": self.params, "best_loss": eval_loss})

    def restore_best(self) -> "WindowTrainState":
        if self.best_params is None:
            return self
        return self.model_copy(update={"params": self.best_params})


class TelemetryRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    window: PositiveInt
    iteration: NonNegativeInt
    phase: Literal["adam", "lbfgs"]
    train_loss: float
    eval_loss: Optional[float] = None
    wall_time: float = Field(ge=0.0)
