"""
Jets univariados: expansiones de Taylor truncadas (orden <= 3) a lo largo de una única
dirección de entrada. `coeffs[k] = f^(k)(s) / k!`, con el eje 0 reservado para el orden y el
resto de ejes para el lote (puntos de colocación, neuronas, ...).

Cuando alguno de los operandos está registrado en una `GradientTape`, cada primitiva anota
en la cinta su regla de retropropagación sobre los coeficientes (reverse-over-forward).
"""

from __future__ import annotations

import math
from typing import Callable, Literal, Sequence

import numpy as np

from hcsp.errors import ConfigurationError, ContractViolation

MAX_ORDER = 3
MAX_POWER = 8

Backward = Callable[[np.ndarray, tuple[bool, ...]], tuple[np.ndarray | None, ...]]


class Jet:
    __slots__ = ("coeffs", "tape", "node")
    # Evita que numpy intente operar elemento a elemento con objetos Jet.
    __array_ufunc__ = None

    def __init__(self, coeffs, tape=None, node: int | None = None):
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.ndim == 0 or not 1 <= coeffs.shape[0] <= MAX_ORDER + 1:
            raise ContractViolation(f"coeficientes de jet con forma inválida: {coeffs.shape}")
        self.coeffs = coeffs
        self.tape = tape
        self.node = node

    # --- Propiedades -------------------------------------------------------------------

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def is_traced(self) -> bool:
        return self.node is not None

    def derivatives(self) -> np.ndarray:
        """Derivadas direccionales 0..K (sin registrar nada en la cinta)."""
        factorials = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=np.float64)
        return self.coeffs * factorials.reshape((-1,) + (1,) * len(self.batch_shape))

    def detached(self) -> "Jet":
        return Jet(self.coeffs.copy())

    def __repr__(self) -> str:
        traced = f", node={self.node}" if self.is_traced else ""
        return f"Jet(order={self.order}, batch_shape={self.batch_shape}{traced})"

    # --- Extracción de ranuras (slots) ---------------------------------------------------

    def coefficient(self, k: int) -> "Jet":
        return _slot(self, k, 1.0)

    def derivative(self, k: int) -> "Jet":
        """Ranura de orden 0 con la derivada k-ésima; participa en la cinta."""
        return _slot(self, k, float(math.factorial(k)))

    # --- Aritmética --------------------------------------------------------------------

    def __add__(self, other):
        return jet_arithmetic(self, _as_jet(other, self.order), "add")

    def __radd__(self, other):
        return jet_arithmetic(_as_jet(other, self.order), self, "add")

    def __sub__(self, other):
        return jet_arithmetic(self, _as_jet(other, self.order), "sub")

    def __rsub__(self, other):
        return jet_arithmetic(_as_jet(other, self.order), self, "sub")

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_arithmetic(self, other, "mul")
        return _scale(self, other)

    def __rmul__(self, other):
        return _scale(self, other)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            raise ContractViolation("solo se admite la división por constantes")
        return _scale(self, 1.0 / np.asarray(other, dtype=np.float64))

    def __rtruediv__(self, other):
        raise ContractViolation("solo se admite la división por constantes")

    def __neg__(self):
        return _scale(self, -1.0)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, (int, np.integer)) or not 0 <= exponent <= MAX_POWER:
            raise ContractViolation(f"potencia no soportada: {exponent!r}")
        if exponent == 0:
            return jet_constant(np.ones(self.batch_shape), self.order)
        result = self
        for _ in range(exponent - 1):
            result = result * self
        return result

    # --- Forma del lote ----------------------------------------------------------------

    def __getitem__(self, index) -> "Jet":
        if not isinstance(index, tuple):
            index = (index,)
        full_index = (slice(None),) + index
        shape = self.coeffs.shape

        def backward(cotangent, needs):
            grad = np.zeros(shape)
            np.add.at(grad, full_index, cotangent)
            return (grad,)

        return _emit("getitem", self.coeffs[full_index], (self,), backward)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        original = self.coeffs.shape

        def backward(cotangent, needs):
            return (cotangent.reshape(original),)

        return _emit("reshape", self.coeffs.reshape((self.order + 1,) + tuple(shape)), (self,), backward)

    def sum(self) -> "Jet":
        return _reduce(self, mean=False)

    def mean(self) -> "Jet":
        return _reduce(self, mean=True)


# --- Construcción ----------------------------------------------------------------------

def _check_order(order: int) -> int:
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise ConfigurationError(f"orden de jet fuera de 0..{MAX_ORDER}: {order!r}")
    return int(order)


def jet_lift(value, seed, order: int) -> Jet:
    """Variable de entrada con dirección `seed`: coeffs = [value, seed, 0, ...]."""
    order = _check_order(order)
    value = np.asarray(value, dtype=np.float64)
    seed = np.asarray(seed, dtype=np.float64)
    shape = np.broadcast_shapes(value.shape, seed.shape)
    if not (np.all(np.isfinite(value)) and np.all(np.isfinite(seed))):
        raise ContractViolation("jet_lift requiere valores y semillas finitos")
    coeffs = np.zeros((order + 1,) + shape)
    coeffs[0] = value
    if order >= 1:
        coeffs[1] = seed
    return Jet(coeffs)


def jet_constant(value, order: int) -> Jet:
    return jet_lift(value, 0.0, order)


def _as_jet(value, order: int) -> Jet:
    if isinstance(value, Jet):
        return value
    return jet_constant(value, order)


# --- Registro en la cinta --------------------------------------------------------------

def _emit(op: str, coeffs: np.ndarray, operands: Sequence[Jet], backward: Backward) -> Jet:
    traced = [operand for operand in operands if operand.node is not None]
    if not traced:
        return Jet(coeffs)
    tape = traced[0].tape
    if any(operand.tape is not tape for operand in traced):
        raise ContractViolation("operandos registrados en cintas distintas")
    needs = tuple(operand.node is not None for operand in operands)
    positions = tuple(i for i, need in enumerate(needs) if need)

    def node_backward(cotangent: np.ndarray):
        grads = backward(cotangent, needs)
        return tuple(grads[i] for i in positions)

    node = tape.record(op, tuple(operand.node for operand in traced), node_backward, coeffs.shape)
    return Jet(coeffs, tape, node)


def _pad(array: np.ndarray, ndim: int) -> np.ndarray:
    """Inserta ejes de lote tras el eje de orden (semántica de broadcasting de numpy)."""
    missing = ndim - array.ndim
    if missing <= 0:
        return array
    return array.reshape(array.shape[:1] + (1,) * missing + array.shape[1:])


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(1, 1 + extra)))
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# --- Convoluciones de Cauchy -----------------------------------------------------------

def _cauchy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    order = a.shape[0] - 1
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    for k in range(order + 1):
        acc = a[0] * b[k]
        for i in range(1, k + 1):
            acc = acc + a[i] * b[k - i]
        out[k] = acc
    return out


def _cauchy_transpose(cotangent: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Adjunto de a -> cauchy(a, b): abar_i = sum_{k>=i} cot_k b_{k-i}."""
    order = cotangent.shape[0] - 1
    out = np.empty(np.broadcast_shapes(cotangent.shape, b.shape))
    for i in range(order + 1):
        acc = cotangent[i] * b[0]
        for k in range(i + 1, order + 1):
            acc = acc + cotangent[k] * b[k - i]
        out[i] = acc
    return out


# --- Primitivas ------------------------------------------------------------------------

def jet_arithmetic(a: Jet, b: Jet, op: Literal["add", "sub", "mul"]) -> Jet:
    if a.order != b.order:
        raise ContractViolation(f"órdenes de jet distintos: {a.order} != {b.order}")
    ndim = max(a.coeffs.ndim, b.coeffs.ndim)
    ca, cb = _pad(a.coeffs, ndim), _pad(b.coeffs, ndim)
    shape_a, shape_b = a.coeffs.shape, b.coeffs.shape

    if op == "add":
        def backward(cot, needs):
            return (_unbroadcast(cot, shape_a) if needs[0] else None,
                    _unbroadcast(cot, shape_b) if needs[1] else None)
        return _emit("add", ca + cb, (a, b), backward)

    if op == "sub":
        def backward(cot, needs):
            return (_unbroadcast(cot, shape_a) if needs[0] else None,
                    _unbroadcast(-cot, shape_b) if needs[1] else None)
        return _emit("sub", ca - cb, (a, b), backward)

    if op == "mul":
        def backward(cot, needs):
            return (_unbroadcast(_cauchy_transpose(cot, cb), shape_a) if needs[0] else None,
                    _unbroadcast(_cauchy_transpose(cot, ca), shape_b) if needs[1] else None)
        return _emit("mul", _cauchy(ca, cb), (a, b), backward)

    raise ContractViolation(f"operación aritmética desconocida: {op!r}")


def _scale(a: Jet, factor) -> Jet:
    factor = np.asarray(factor, dtype=np.float64)
    scale = factor.reshape((1,) + factor.shape)
    ndim = max(a.coeffs.ndim, scale.ndim)
    ca, scale = _pad(a.coeffs, ndim), _pad(scale, ndim)
    shape_a = a.coeffs.shape

    def backward(cot, needs):
        return (_unbroadcast(cot * scale, shape_a),)

    return _emit("scale", ca * scale, (a,), backward)


def _slot(a: Jet, k: int, factor: float) -> Jet:
    if not 0 <= k <= a.order:
        raise ContractViolation(f"coeficiente {k} fuera del orden del jet ({a.order})")
    shape = a.coeffs.shape

    def backward(cot, needs):
        grad = np.zeros(shape)
        grad[k] = cot[0] * factor
        return (grad,)

    return _emit("slot", a.coeffs[k:k + 1] * factor, (a,), backward)


def _reduce(a: Jet, mean: bool) -> Jet:
    axes = tuple(range(1, a.coeffs.ndim))
    count = float(np.prod(a.batch_shape)) if a.batch_shape else 1.0
    shape = a.coeffs.shape
    out = a.coeffs.sum(axis=axes) if axes else a.coeffs.copy()
    if mean:
        out = out / count

    def backward(cot, needs):
        grad = np.broadcast_to(cot.reshape((cot.shape[0],) + (1,) * len(axes)), shape)
        return ((grad / count) if mean else grad.copy(),)

    return _emit("mean" if mean else "sum", out, (a,), backward)


def _tanh_series(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recurrencia k y_k = sum_j j a_j z_{k-j} con z = 1 - y^2 (= tanh' compuesta)."""
    order = a.shape[0] - 1
    y = np.empty_like(a)
    z = np.empty_like(a)
    y[0] = np.tanh(a[0])
    z[0] = 1.0 - y[0] * y[0]
    for k in range(1, order + 1):
        acc = a[1] * z[k - 1]
        for j in range(2, k + 1):
            acc = acc + j * a[j] * z[k - j]
        y[k] = acc / k
        square = y[0] * y[k]
        for i in range(1, k + 1):
            square = square + y[i] * y[k - i]
        z[k] = -square
    return y, z


def _sincos_series(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = a.shape[0] - 1
    s = np.empty_like(a)
    c = np.empty_like(a)
    s[0] = np.sin(a[0])
    c[0] = np.cos(a[0])
    for k in range(1, order + 1):
        acc_s = a[1] * c[k - 1]
        acc_c = a[1] * s[k - 1]
        for j in range(2, k + 1):
            acc_s = acc_s + j * a[j] * c[k - j]
            acc_c = acc_c + j * a[j] * s[k - j]
        s[k] = acc_s / k
        c[k] = -acc_c / k
    return s, c


def _compose(op: str, a: Jet, y: np.ndarray, d: np.ndarray) -> Jet:
    """y = g o a; d es el jet de g' o a y da el adjunto por convolución transpuesta."""
    def backward(cot, needs):
        return (_cauchy_transpose(cot, d),)

    return _emit(op, y, (a,), backward)


def jet_tanh(a: Jet) -> Jet:
    y, z = _tanh_series(a.coeffs)
    return _compose("tanh", a, y, z)


def jet_sin(a: Jet) -> Jet:
    s, c = _sincos_series(a.coeffs)
    return _compose("sin", a, s, c)


def jet_cos(a: Jet) -> Jet:
    s, c = _sincos_series(a.coeffs)
    return _compose("cos", a, c, -s)


def jet_affine(x: Jet, weight: Jet, bias: Jet) -> Jet:
    """Capa densa x @ W + b con W, b de orden 0 (el sesgo solo afecta al coeficiente 0)."""
    if weight.order != 0 or bias.order != 0:
        raise ContractViolation("los pesos de una capa densa deben ser jets de orden 0")
    w = weight.coeffs[0]
    b = bias.coeffs[0]
    if x.batch_shape[-1:] != w.shape[:1] or b.shape != w.shape[1:]:
        raise ContractViolation(
            f"formas incompatibles en capa densa: x{x.batch_shape} W{w.shape} b{b.shape}"
        )
    xc = x.coeffs
    out = xc @ w
    out[0] = out[0] + b
    lead = tuple(range(xc.ndim - 1))

    def backward(cot, needs):
        grad_x = cot @ w.T if needs[0] else None
        grad_w = np.tensordot(xc, cot, axes=(lead, lead))[None] if needs[1] else None
        grad_b = cot[0].reshape(-1, w.shape[1]).sum(axis=0)[None] if needs[2] else None
        return grad_x, grad_w, grad_b

    return _emit("affine", out, (x, weight, bias), backward)


def jet_concat(jets: Sequence[Jet]) -> Jet:
    """Concatena jets del mismo orden a lo largo del último eje de lote."""
    jets = list(jets)
    if not jets:
        raise ContractViolation("jet_concat necesita al menos un jet")
    if len({jet.order for jet in jets}) != 1:
        raise ContractViolation("jet_concat con órdenes distintos")
    coeffs = np.concatenate([jet.coeffs for jet in jets], axis=-1)
    splits = np.cumsum([jet.coeffs.shape[-1] for jet in jets])[:-1]

    def backward(cot, needs):
        return tuple(np.split(cot, splits, axis=-1))

    return _emit("concat", coeffs, jets, backward)


def jet_sum(a: Jet) -> Jet:
    return a.sum()


def jet_mean(a: Jet) -> Jet:
    return a.mean()
