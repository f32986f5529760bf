from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Any, Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator

from hcsp.ansatz import ContinuityOrder, InitialConditionSeries, dirichlet_mask
from hcsp.diffengine import Jet
from hcsp.errors import ContractViolation
from hcsp.network import PeriodicEmbedding

ProblemName = Literal["advection", "wave", "allen_cahn", "kdv", "jerk"]
BoundaryTreatment = Literal["periodic_embedding", "dirichlet_mask", "none"]

EXPECTED_BC: dict[str, str] = {
    "advection": "periodic_embedding",
    "allen_cahn": "periodic_embedding",
    "kdv": "periodic_embedding",
    "wave": "dirichlet_mask",
    "jerk": "none",
}


@dataclass(frozen=True)
class DerivativeSlots:
    """Ranuras de derivadas en los puntos de colocación (jets de orden 0 o arrays)."""
    u: Any
    u_t: Any = None
    u_tt: Any = None
    u_ttt: Any = None
    u_x: Any = None
    u_xx: Any = None
    u_xxx: Any = None

    @classmethod
    def from_jets(cls, t_pass: Jet, x_pass: Optional[Jet] = None) -> "DerivativeSlots":
        names_t = ("u", "u_t", "u_tt", "u_ttt")
        names_x = (None, "u_x", "u_xx", "u_xxx")
        slots = {names_t[k]: t_pass.derivative(k) for k in range(t_pass.order + 1)}
        if x_pass is not None:
            slots.update({names_x[k]: x_pass.derivative(k) for k in range(1, x_pass.order + 1)})
        return cls(**slots)


class ProblemSpec(BaseModel):
    """
    Definición de un problema de referencia. El operador recibe `DerivativeSlots` y devuelve
    el residuo ya dividido por `scaling`.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: ProblemName
    spatial_domain: Optional[tuple[float, float]] = None
    time_horizon: PositiveFloat
    time_order: int = Field(ge=1, le=3)
    x_order: int = Field(ge=0, le=3)
    operator: Callable[[DerivativeSlots], Any]
    scaling: PositiveFloat = 1.0
    ic_series: InitialConditionSeries
    bc: BoundaryTreatment
    embedding: Optional[PeriodicEmbedding] = None
    reference: Literal["analytic", "oracle_pde", "oracle_ode"]
    constants: dict[str, float] = Field(default_factory=dict)
    causal_scope: Literal["global", "window"] = "global"

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.bc != EXPECTED_BC[self.name]:
            raise ValueError(f"{self.name} declara bc={self.bc!r}, se esperaba {EXPECTED_BC[self.name]!r}")
        if self.ic_series.time_order != self.time_order:
            raise ValueError(
                f"la serie inicial tiene {self.ic_series.time_order} términos y el orden temporal es {self.time_order}"
            )
        if self.bc == "periodic_embedding" and self.embedding is None:
            raise ValueError(f"{self.name}: el tratamiento periódico necesita un embedding")
        if (self.bc == "none") != (self.spatial_domain is None):
            raise ValueError(f"{self.name}: dominio espacial incoherente con bc={self.bc!r}")
        if self.spatial_domain is not None and not self.spatial_domain[1] > self.spatial_domain[0]:
            raise ValueError(f"{self.name}: dominio espacial vacío {self.spatial_domain}")
        return self

    @property
    def is_ode(self) -> bool:
        return self.spatial_domain is None

    @property
    def required_continuity(self) -> ContinuityOrder:
        return ContinuityOrder.from_time_order(self.time_order)

    @property
    def spatial_mask(self) -> Optional[Callable]:
        if self.bc != "dirichlet_mask":
            return None
        return partial(dirichlet_mask, domain=self.spatial_domain)

    def residual(self, slots: DerivativeSlots):
        return self.operator(slots)


class ReferenceSolution(BaseModel):
    """Solución de referencia sobre una malla (t, x), con `values[i, j] = u(x_j, t_i)`."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    problem: str
    grid_x: np.ndarray
    grid_t: np.ndarray
    values: np.ndarray
    provenance: Literal["analytic", "oracle", "ingested-file"]

    @field_validator("grid_x", "grid_t", mode="before")
    @classmethod
    def _as_grid(cls, value):
        array = np.asarray(value, dtype=np.float64).reshape(-1)
        return array

    @field_validator("values", mode="before")
    @classmethod
    def _as_values(cls, value):
        array = np.asarray(value, dtype=np.float64)
        if array.ndim == 1:
            array = array[:, None]
        if array.ndim != 2:
            raise ValueError(f"los valores de referencia deben ser 2-D, no {array.shape}")
        return array

    @model_validator(mode="after")
    def _check_shape(self):
        expected = (len(self.grid_t), max(1, len(self.grid_x)))
        if self.values.shape != expected:
            raise ValueError(f"forma de valores {self.values.shape} != {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("la solución de referencia contiene valores no finitos")
        return self

    @property
    def is_ode(self) -> bool:
        return len(self.grid_x) == 0

    def restrict(self, grid_x: Optional[np.ndarray], grid_t: np.ndarray) -> np.ndarray:
        """Valores sobre una submalla cuyos nodos pertenecen a la malla propia."""
        rows = _subgrid_indices(self.grid_t, grid_t, "t")
        if self.is_ode:
            return self.values[rows, :]
        cols = _subgrid_indices(self.grid_x, grid_x, "x")
        return self.values[np.ix_(rows, cols)]


def _subgrid_indices(grid: np.ndarray, targets, axis: str) -> np.ndarray:
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    index = np.clip(np.searchsorted(grid, targets), 0, len(grid) - 1)
    left = np.clip(index - 1, 0, len(grid) - 1)
    closer = np.abs(grid[left] - targets) < np.abs(grid[index] - targets)
    index = np.where(closer, left, index)
    tolerance = 1e-9 * max(1.0, float(np.max(np.abs(grid))))
    if np.any(np.abs(grid[index] - targets) > tolerance):
        raise ContractViolation(f"la malla de evaluación en {axis} no es submalla de la referencia")
    return index
