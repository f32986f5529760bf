from __future__ import annotations

import math
from typing import Callable, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from hcsp.ansatz.interpolation import TAU_SLACK, interp
from hcsp.diffengine import Jet, ParameterVector, jet_constant, jet_lift
from hcsp.errors import ConfigurationError, ContractViolation
from hcsp.network import NetworkConfig, forward, network_features


Mode = Literal["hard", "soft"]
Composition = Literal["interpolated", "recursive"]


class TimeWindowPartition(BaseModel):
    """Partición uniforme de [t_start, t_end] en nt ventanas; los índices de ventana empiezan en 1."""
    model_config = ConfigDict(frozen=True)

    t_start: float = 0.0
    t_end: float
    nt: PositiveInt

    @model_validator(mode="after")
    def _check_interval(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"intervalo temporal vacío: [{self.t_start}, {self.t_end}]")
        return self

    @property
    def boundaries(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.nt + 1)

    @property
    def width(self) -> float:
        return (self.t_end - self.t_start) / self.nt

    def window(self, index: int) -> tuple[float, float]:
        if not 1 <= index <= self.nt:
            raise ContractViolation(f"ventana {index} fuera de 1..{self.nt}")
        bounds = self.boundaries
        return float(bounds[index - 1]), float(bounds[index])

    def locate(self, t) -> np.ndarray:
        """Ventana (1-based) de cada instante; un borde interior pertenece a la ventana anterior."""
        index = np.searchsorted(self.boundaries, np.asarray(t, dtype=np.float64), side="left")
        return np.clip(index, 1, self.nt)


class ContinuityOrder(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=0, le=2)

    @classmethod
    def from_time_order(cls, time_order: int) -> "ContinuityOrder":
        if not 1 <= time_order <= 3:
            raise ConfigurationError(f"orden temporal fuera de 1..3: {time_order}")
        return cls(m=time_order - 1)


class InitialConditionSeries(BaseModel):
    """g(x, t) = Σ_{k<M} t^k / k! · g_k(x); cada g_k acepta floats, arrays, jets o None (EDO)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    terms: tuple[Callable, ...]

    @field_validator("terms")
    @classmethod
    def _check_length(cls, terms):
        if not 1 <= len(terms) <= 3:
            raise ValueError(f"la serie de condiciones iniciales necesita 1..3 términos, no {len(terms)}")
        return terms

    @property
    def time_order(self) -> int:
        return len(self.terms)

    def targets(self, x) -> list[np.ndarray]:
        """Valores g_0..g_{M-1} sobre puntos planos (objetivos de la pérdida blanda en t=0)."""
        shape = np.shape(x) if x is not None else ()
        return [np.broadcast_to(np.asarray(g(x), dtype=np.float64), shape) for g in self.terms]


def ic_series_eval(series: InitialConditionSeries, x, t):
    total = None
    for k, g in enumerate(series.terms):
        power = t ** k if k else (t * 0.0 + 1.0)
        term = power * (1.0 / math.factorial(k)) * g(x)
        total = term if total is None else total + term
    return total


class WindowAnsatz:
    """
    Solución de prueba de la ventana N+1.

    Modo duro, composición interpolada:
        ventana 1:   u = h_prev(τ) g(x, t) + h_next(τ) M(x) f_1(x, t)
        ventana N+1: u = h_prev(τ) M(x) f_N(x, t) + h_next(τ) M(x) f_{N+1}(x, t)
    Composición recursiva:
        ventana 1:   u = g(x, t) + M(x) f_1 t^M
        ventana N+1: u = u_N(x, t) + M(x) f_{N+1} (t - t_N)^(m+1)
    Modo blando: u = M(x) f(x, t); el predecesor solo aporta los objetivos de interfaz.
    """

    def __init__(
        self,
        window_index: int,
        partition: TimeWindowPartition,
        order: ContinuityOrder,
        network: NetworkConfig,
        params: ParameterVector,
        predecessor: Union[InitialConditionSeries, "WindowAnsatz", None] = None,
        spatial_mask: Optional[Callable] = None,
        mode: Mode = "hard",
        composition: Composition = "interpolated",
    ):
        self.t_start, self.t_end = partition.window(window_index)
        if mode not in ("hard", "soft"):
            raise ConfigurationError(f"modo desconocido: {mode!r}")
        if composition not in ("interpolated", "recursive"):
            raise ConfigurationError(f"composición desconocida: {composition!r}")
        if window_index == 1 and mode == "hard" and not isinstance(predecessor, InitialConditionSeries):
            raise ContractViolation("la ventana 1 en modo duro necesita la serie de condiciones iniciales")
        if window_index > 1 and predecessor is not None:
            if not isinstance(predecessor, WindowAnsatz) or predecessor.window_index != window_index - 1:
                raise ContractViolation(f"la ventana {window_index} necesita como predecesor la ventana {window_index - 1}")
            predecessor.freeze()
        if window_index > 1 and mode == "hard" and predecessor is None:
            raise ContractViolation(f"la ventana {window_index} en modo duro necesita predecesor")

        self.window_index = window_index
        self.partition = partition
        self.order = order
        self.network = network
        self.predecessor = predecessor
        self.spatial_mask = spatial_mask
        self.mode = mode
        self.composition = composition
        self._frozen = False
        self._params = params

    # --- Parámetros ------------------------------------------------------------------------

    @property
    def params(self) -> ParameterVector:
        return self._params

    @params.setter
    def params(self, value: ParameterVector) -> None:
        if self._frozen:
            raise ContractViolation(f"la ventana {self.window_index} está congelada")
        self._params = value

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        if not self._frozen:
            self._params = self._params.frozen_copy()
            self._frozen = True

    # --- Evaluación ------------------------------------------------------------------------

    @property
    def width(self) -> float:
        return self.t_end - self.t_start

    def tau(self, t):
        return (t - self.t_start) * (1.0 / self.width)

    def network_term(self, x, t: Jet, params=None) -> Jet:
        """M(x) f(x, t, θ); `params` puede ser una vista observada por una cinta."""
        params = self._params if params is None else params
        out = forward(params, network_features(self.network, x, t))
        if self.spatial_mask is not None:
            out = out * self.spatial_mask(x)
        return out

    def evaluate(self, x, t, params=None):
        """
        Evalúa la solución de prueba. Con jets devuelve un jet (derivadas incluidas); con
        floats o arrays devuelve los valores.
        """
        values = t.value if isinstance(t, Jet) else np.asarray(t, dtype=np.float64)
        slack = TAU_SLACK * self.width
        if np.any(values < self.t_start - slack) or np.any(values > self.t_end + slack):
            raise ContractViolation(
                f"t en [{np.min(values):.6g}, {np.max(values):.6g}] fuera de la ventana "
                f"{self.window_index} [{self.t_start:.6g}, {self.t_end:.6g}]"
            )
        if isinstance(t, Jet):
            return self._compose(x, t, params)
        t_jet = jet_constant(values, 0)
        x_jet = None if x is None else jet_constant(x, 0)
        return self._compose(x_jet, t_jet, params).value

    def _compose(self, x, t: Jet, params=None) -> Jet:
        current = self.network_term(x, t, params)
        if self.mode == "soft":
            return current
        if self.composition == "recursive":
            if self.window_index == 1:
                return ic_series_eval(self.predecessor, x, t) + current * t ** self.predecessor.time_order
            shift = t - self.t_start
            return self.predecessor._compose(x, t) + current * shift ** (self.order.m + 1)
        h_prev, h_next = interp(self.order, self.tau(t))
        if self.window_index == 1:
            base = ic_series_eval(self.predecessor, x, t)
        else:
            base = self.predecessor.network_term(x, t)
        return h_prev * base + h_next * current

    def time_derivatives(self, x, t, order: int) -> np.ndarray:
        """Derivadas temporales 0..order en los puntos (x, t); forma (order + 1, *lote)."""
        t = np.asarray(t, dtype=np.float64)
        if x is not None:
            x = np.asarray(x, dtype=np.float64)
            t = np.broadcast_to(t, np.broadcast_shapes(x.shape, t.shape))
            x_jet = jet_constant(np.broadcast_to(x, t.shape), order)
        else:
            x_jet = None
        return self.evaluate(x_jet, jet_lift(t, 1.0, order)).derivatives()

    def __repr__(self) -> str:
        return (
            f"WindowAnsatz(window={self.window_index}, [{self.t_start:.4g}, {self.t_end:.4g}], "
            f"mode={self.mode}, m={self.order.m}, composition={self.composition})"
        )


def ansatz_eval(ansatz: WindowAnsatz, x, t):
    return ansatz.evaluate(x, t)
