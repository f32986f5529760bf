from __future__ import annotations

from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt, field_validator, model_validator

from hcsp.diffengine.jet import Jet


class LayerShape(BaseModel):
    model_config = ConfigDict(frozen=True)

    fan_in: PositiveInt
    fan_out: PositiveInt

    @property
    def size(self) -> int:
        return self.fan_in * self.fan_out + self.fan_out


class ParameterVector(BaseModel):
    """
    Vector plano θ con todos los pesos y sesgos de una red, capa por capa
    (W aplanado por filas seguido de b).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    layout: tuple[LayerShape, ...]

    @field_validator("values", mode="before")
    @classmethod
    def _as_flat_array(cls, value):
        array = np.asarray(value, dtype=np.float64)
        if array.ndim != 1:
            raise ValueError(f"el vector de parámetros debe ser 1-D, no {array.shape}")
        return array

    @model_validator(mode="after")
    def _check_length(self):
        expected = sum(shape.size for shape in self.layout)
        if self.values.shape[0] != expected:
            raise ValueError(f"longitud {self.values.shape[0]} != {expected} según el layout")
        return self

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def from_layers(cls, layers: list[tuple[np.ndarray, np.ndarray]]) -> "ParameterVector":
        layout = tuple(LayerShape(fan_in=w.shape[0], fan_out=w.shape[1]) for w, _ in layers)
        flat = np.concatenate([np.concatenate([np.ravel(w), np.ravel(b)]) for w, b in layers])
        return cls(values=flat, layout=layout)

    def unflatten(self) -> list[tuple[np.ndarray, np.ndarray]]:
        layers = []
        offset = 0
        for shape in self.layout:
            n_weights = shape.fan_in * shape.fan_out
            weight = self.values[offset:offset + n_weights].reshape(shape.fan_in, shape.fan_out)
            offset += n_weights
            bias = self.values[offset:offset + shape.fan_out]
            offset += shape.fan_out
            layers.append((weight, bias))
        return layers

    def layers(self) -> list[tuple[Jet, Jet]]:
        """Capas como jets pasivos de orden 0 (no se registran en ninguna cinta)."""
        return [(Jet(w[None]), Jet(b[None])) for w, b in self.unflatten()]

    def with_values(self, values) -> "ParameterVector":
        return ParameterVector(values=values, layout=self.layout)

    def frozen_copy(self) -> "ParameterVector":
        values = np.array(self.values, dtype=np.float64, copy=True)
        values.setflags(write=False)
        return ParameterVector(values=values, layout=self.layout)

    def save(self, path: str | Path, seed: int | None = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        shapes = np.array([[s.fan_in, s.fan_out] for s in self.layout], dtype=np.int64)
        np.savez(path, values=self.values, layout=shapes, seed=np.int64(-1 if seed is None else seed))
        return path

    @classmethod
    def load(cls, path: str | Path) -> tuple["ParameterVector", int | None]:
        with np.load(Path(path)) as data:
            layout = tuple(LayerShape(fan_in=int(i), fan_out=int(o)) for i, o in data["layout"])
            seed = int(data["seed"])
            params = cls(values=data["values"], layout=layout)
        return params, (None if seed < 0 else seed)
