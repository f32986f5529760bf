"""
Redes feed-forward f(x, t, θ): capas densas con tanh en las ocultas y salida lineal.
La entrada espacial puede pasar por una capa de embedding periódico
{sin(kωx), cos(kωx)}; el tiempo entra sin transformar.
"""

from __future__ import annotations

import math
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, PositiveInt, model_validator

from hcsp.diffengine import Jet, LayerShape, ParameterVector, jet_affine, jet_concat, jet_cos, jet_sin, jet_tanh
from hcsp.errors import ContractViolation


class PeriodicEmbedding(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega: PositiveFloat  # 2π / periodo del dominio
    k_max: PositiveInt = 1

    @property
    def n_features(self) -> int:
        return 2 * self.k_max

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


class NetworkConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    depth: PositiveInt
    width: PositiveInt
    input_features: PositiveInt
    outputs: Literal[1] = 1
    embedding: Optional[PeriodicEmbedding] = None

    @model_validator(mode="after")
    def _check_embedding(self):
        if self.embedding is not None and self.input_features < self.embedding.n_features:
            raise ValueError(
                f"input_features={self.input_features} no cubre las "
                f"{self.embedding.n_features} características del embedding"
            )
        return self

    @classmethod
    def for_inputs(
        cls,
        depth: int,
        width: int,
        spatial: bool,
        embedding: Optional[PeriodicEmbedding] = None,
    ) -> "NetworkConfig":
        """Cuenta las entradas: embedding (o x crudo) si hay espacio, más el tiempo."""
        features = 1
        if spatial:
            features += embedding.n_features if embedding is not None else 1
        return cls(
            depth=depth,
            width=width,
            input_features=features,
            embedding=embedding if spatial else None,
        )

    def layer_shapes(self) -> tuple[LayerShape, ...]:
        sizes = [self.input_features] + [self.width] * self.depth + [self.outputs]
        return tuple(LayerShape(fan_in=i, fan_out=o) for i, o in zip(sizes[:-1], sizes[1:]))


def glorot_init(config: NetworkConfig, rng_seed: int) -> ParameterVector:
    """Glorot normal: var(W) = 2 / (fan_in + fan_out), sesgos a cero."""
    rng = np.random.default_rng(rng_seed)
    layers = []
    for shape in config.layer_shapes():
        std = math.sqrt(2.0 / (shape.fan_in + shape.fan_out))
        weight = rng.normal(0.0, std, size=(shape.fan_in, shape.fan_out))
        layers.append((weight, np.zeros(shape.fan_out)))
    return ParameterVector.from_layers(layers)


def embed(x, embedding: PeriodicEmbedding):
    """[sin(ωx), cos(ωx), ..., sin(kωx), cos(kωx)] en el último eje."""
    harmonics = range(1, embedding.k_max + 1)
    if isinstance(x, Jet):
        features = []
        for k in harmonics:
            angle = x * (k * embedding.omega)
            for feature in (jet_sin(angle), jet_cos(angle)):
                features.append(feature.reshape(feature.batch_shape + (1,)))
        return jet_concat(features)
    x = np.asarray(x, dtype=np.float64)
    columns = []
    for k in harmonics:
        columns.extend([np.sin(k * embedding.omega * x), np.cos(k * embedding.omega * x)])
    return np.stack(columns, axis=-1)


def network_features(config: NetworkConfig, x: Jet | None, t: Jet) -> Jet:
    """Ensambla el jet de entrada (espacio embebido o crudo, luego tiempo)."""
    columns = []
    if x is not None:
        if config.embedding is not None:
            columns.append(embed(x, config.embedding))
        else:
            columns.append(x.reshape(x.batch_shape + (1,)))
    columns.append(t.reshape(t.batch_shape + (1,)))
    features = jet_concat(columns)
    if features.batch_shape[-1] != config.input_features:
        raise ContractViolation(
            f"la red espera {config.input_features} entradas y recibió {features.batch_shape[-1]}"
        )
    return features


def forward(params, features: Jet | Sequence[Jet]) -> Jet:
    """
    Propaga un jet de características por la red. `params` puede ser un `ParameterVector`
    (evaluación pasiva) o unos `WatchedParameters` (registro en la cinta).
    """
    if not isinstance(features, Jet):
        features = jet_concat([f.reshape(f.batch_shape + (1,)) for f in features])
    layers = params.layers()
    fan_in = layers[0][0].coeffs.shape[1]
    if features.batch_shape[-1:] != (fan_in,):
        raise ContractViolation(
            f"la primera capa espera {fan_in} características y recibió {features.batch_shape}"
        )
    hidden = features
    for weight, bias in layers[:-1]:
        hidden = jet_tanh(jet_affine(hidden, weight, bias))
    weight, bias = layers[-1]
    return jet_affine(hidden, weight, bias)[..., 0]
