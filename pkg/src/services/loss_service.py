"""
Ensamblado de la pérdida de una ventana: residuo de la EDP ponderado causalmente y, en modo
blando, los términos de condición inicial / continuidad en la interfaz t_N.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from hcsp.ansatz import WindowAnsatz
from hcsp.diffengine import GradientTape, Jet, jet_constant, jet_lift
from hcsp.errors import ContractViolation, TrainingAbort
from hcsp.problems import DerivativeSlots, ProblemSpec
from src.services.collocation_service import CollocationPoints
from src.services.schemas import LossWeights


def causal_weight(t, weights: LossWeights):
    """C_T (1 - t/t_max) + 1; vale 1 + C_T en t=0 y 1 en t=t_max."""
    t = np.asarray(t, dtype=np.float64)
    slack = 1e-12 * weights.causal_t_max
    if np.any(t < -slack) or np.any(t > weights.causal_t_max + slack):
        raise ContractViolation(f"t fuera de [0, {weights.causal_t_max}] en el peso causal")
    return weights.causal_C_T * (1.0 - t / weights.causal_t_max) + 1.0


@dataclass(frozen=True)
class InterfaceTargets:
    """Objetivos de la pérdida blanda: derivadas temporales 0..K en (x_k, t_N)."""
    t_n: float
    x: Optional[np.ndarray]
    targets: tuple[np.ndarray, ...]

    @property
    def order(self) -> int:
        return len(self.targets) - 1

    @property
    def t(self) -> np.ndarray:
        n = 1 if self.x is None else len(self.x)
        return np.full(n, self.t_n)


def interface_targets(ansatz: WindowAnsatz, x: Optional[np.ndarray]) -> InterfaceTargets:
    """
    Ventana 1: g_0..g_{M-1} en t=0. Ventana N+1: valor y derivadas hasta orden m de la ventana
    anterior (ya entrenada) en t_N.
    """
    x = None if x is None else np.asarray(x, dtype=np.float64)
    if ansatz.window_index == 1:
        values = ansatz.predecessor.targets(x if x is not None else None)
        if x is None:
            values = [np.reshape(v, (1,)) for v in values]
        return InterfaceTargets(t_n=ansatz.t_start, x=x, targets=tuple(np.array(v) for v in values))
    previous: WindowAnsatz = ansatz.predecessor
    t = np.full(1 if x is None else len(x), ansatz.t_start)
    derivatives = previous.time_derivatives(x, t, ansatz.order.m)
    return InterfaceTargets(t_n=ansatz.t_start, x=x, targets=tuple(derivatives))


def _lift_pass(batch: CollocationPoints, order: int, along: Literal["t", "x"]):
    seed_t, seed_x = (1.0, 0.0) if along == "t" else (0.0, 1.0)
    t = jet_lift(batch.t, seed_t, order)
    x = None if batch.x is None else jet_lift(batch.x, seed_x, order)
    return x, t


def pde_slots(ansatz: WindowAnsatz, batch: CollocationPoints, problem: ProblemSpec, params=None) -> DerivativeSlots:
    """Una pasada de jets en t (orden M) y, si hace falta, otra en x (orden de la EDP en x)."""
    x, t = _lift_pass(batch, problem.time_order, "t")
    t_pass = ansatz.evaluate(x, t, params)
    x_pass = None
    if problem.x_order > 0:
        x, t = _lift_pass(batch, problem.x_order, "x")
        x_pass = ansatz.evaluate(x, t, params)
    return DerivativeSlots.from_jets(t_pass, x_pass)


def window_loss(
    ansatz: WindowAnsatz,
    batch: CollocationPoints,
    problem: ProblemSpec,
    weights: LossWeights,
    mode: Literal["hard", "soft"],
    interface: Optional[InterfaceTargets] = None,
    params=None,
) -> Jet:
    """Pérdida como jet escalar; con `params` observados queda registrada en su cinta."""
    t_local = batch.t
    if problem.causal_scope == "window":
        t_local = batch.t - ansatz.t_start
        weights = weights.model_copy(update={"causal_t_max": ansatz.width})
    residual = problem.residual(pde_slots(ansatz, batch, problem, params))
    pointwise = weights.lambda_P_base * causal_weight(t_local, weights)
    loss = (residual * residual * pointwise).mean()
    if mode == "soft":
        if interface is None:
            raise ContractViolation("el modo blando necesita objetivos de interfaz")
        loss = loss + interface_loss(ansatz, interface, params) * weights.lambda_I
    return loss


def interface_loss(ansatz: WindowAnsatz, interface: InterfaceTargets, params=None) -> Jet:
    order = interface.order
    t = jet_lift(interface.t, 1.0, order)
    x = None if interface.x is None else jet_constant(interface.x, order)
    u = ansatz.evaluate(x, t, params)
    total = None
    for k, target in enumerate(interface.targets):
        mismatch = u.derivative(k) - target
        term = (mismatch * mismatch).mean()
        total = term if total is None else total + term
    return total


def assemble_loss(
    ansatz: WindowAnsatz,
    batch: CollocationPoints,
    problem: ProblemSpec,
    weights: LossWeights,
    mode: Literal["hard", "soft"],
    interface: Optional[InterfaceTargets] = None,
) -> tuple[float, GradientTape]:
    tape = GradientTape()
    watched = tape.watch(ansatz.params)
    loss = window_loss(ansatz, batch, problem, weights, mode, interface, watched)
    value = float(loss.value.reshape(-1)[0])
    if not np.isfinite(value):
        raise TrainingAbort(f"pérdida no finita ({value})", ansatz.window_index)
    if loss.is_traced:
        tape.set_output(loss)
    return value, tape
