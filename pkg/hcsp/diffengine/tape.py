from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from hcsp.diffengine.jet import Jet
from hcsp.diffengine.parameters import ParameterVector
from hcsp.errors import ContractViolation


@dataclass(frozen=True)
class TapeNode:
    op: str
    parents: tuple[int, ...]
    backward: Callable[[np.ndarray], tuple[np.ndarray, ...]] | None
    shape: tuple[int, ...]


class GradientTape:
    """
    Registro append-only de primitivas sobre jets. Los índices de los padres siempre preceden
    al nodo que los consume, así que el barrido inverso es un recorrido hacia atrás de la lista.
    """

    def __init__(self):
        self.nodes: list[TapeNode] = []
        self.output: int | None = None
        self.parameter_node: int | None = None
        self.parameter_size: int | None = None

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, op: str, parents: tuple[int, ...], backward, shape: tuple[int, ...]) -> int:
        index = len(self.nodes)
        if any(not 0 <= parent < index for parent in parents):
            raise ContractViolation(f"nodo '{op}' con padres fuera de orden: {parents}")
        self.nodes.append(TapeNode(op=op, parents=parents, backward=backward, shape=tuple(shape)))
        return index

    def watch(self, params: ParameterVector) -> "WatchedParameters":
        if self.parameter_node is not None:
            raise ContractViolation("la cinta ya observa un vector de parámetros")
        node = self.record("parameters", (), None, (1, params.size))
        self.parameter_node = node
        self.parameter_size = params.size
        return WatchedParameters(params, Jet(params.values[None, :], self, node))

    def set_output(self, loss: Jet) -> None:
        if loss.tape is not self or loss.node is None:
            raise ContractViolation("la pérdida no está registrada en esta cinta")
        self.output = loss.node

    def backward(self) -> list[np.ndarray | None]:
        if self.output is None:
            raise ContractViolation("la cinta no tiene nodo de salida")
        output = self.nodes[self.output]
        if int(np.prod(output.shape)) != 1:
            raise ContractViolation(f"la salida de la cinta no es escalar: forma {output.shape}")
        cotangents: list[np.ndarray | None] = [None] * len(self.nodes)
        cotangents[self.output] = np.ones(output.shape)
        for index in range(self.output, -1, -1):
            cotangent = cotangents[index]
            node = self.nodes[index]
            if cotangent is None or node.backward is None:
                continue
            for parent, grad in zip(node.parents, node.backward(cotangent)):
                if grad is None:
                    continue
                current = cotangents[parent]
                cotangents[parent] = grad if current is None else current + grad
        return cotangents


class WatchedParameters:
    """Vista de un `ParameterVector` cuyas capas (W, b) están registradas en una cinta."""

    def __init__(self, params: ParameterVector, flat: Jet):
        self.params = params
        self.flat = flat
        self._layers: list[tuple[Jet, Jet]] | None = None

    @property
    def layout(self):
        return self.params.layout

    def layers(self) -> list[tuple[Jet, Jet]]:
        if self._layers is None:
            layers = []
            offset = 0
            for shape in self.params.layout:
                n_weights = shape.fan_in * shape.fan_out
                weight = self.flat[offset:offset + n_weights].reshape(shape.fan_in, shape.fan_out)
                offset += n_weights
                bias = self.flat[offset:offset + shape.fan_out]
                offset += shape.fan_out
                layers.append((weight, bias))
            self._layers = layers
        return self._layers


def loss_gradient(tape: GradientTape, params: ParameterVector) -> ParameterVector:
    """Gradiente de la salida escalar de la cinta respecto a todos los parámetros observados."""
    cotangents = tape.backward()
    if tape.parameter_node is None:
        return params.with_values(np.zeros(params.size))
    if tape.parameter_size != params.size:
        raise ContractViolation(
            f"la cinta observa {tape.parameter_size} parámetros y se pidieron {params.size}"
        )
    grad = cotangents[tape.parameter_node]
    if grad is None:
        grad = np.zeros(params.size)
    return params.with_values(np.asarray(grad, dtype=np.float64).reshape(-1))


def value_and_gradient(
    fn: Callable[[WatchedParameters], Jet], params: ParameterVector
) -> tuple[float, ParameterVector]:
    tape = GradientTape()
    watched = tape.watch(params)
    loss = fn(watched)
    value = float(loss.coeffs.reshape(-1)[0])
    if not loss.is_traced:
        return value, params.with_values(np.zeros(params.size))
    tape.set_output(loss)
    return value, loss_gradient(tape, params)
