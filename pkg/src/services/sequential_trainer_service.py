import logging
import time
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from tqdm import tqdm

from hcsp.ansatz import ContinuityOrder, TimeWindowPartition, WindowAnsatz
from hcsp.diffengine import value_and_gradient
from hcsp.errors import ConfigurationError, TrainingAbort
from hcsp.network import NetworkConfig, glorot_init
from hcsp.problems import ProblemSpec
from src.services.collocation_service import CollocationPoints, iter_minibatches, sample_collocation
from src.services.convergence_service import convergence_check
from src.services.implementations.adam_optimizer_service import AdamOptimizerService
from src.services.implementations.lbfgs_optimizer_service import LBFGSOptimizerService
from src.services.loss_service import interface_targets, window_loss
from src.services.schemas import (
    ConvergedReason,
    LossWeights,
    OptimizerSchedule,
    SamplingConfig,
    TelemetryRecord,
    WindowTrainState,
)
from src.settings.config import settings


class WindowSeeds(BaseModel):
    model_config = ConfigDict(frozen=True)

    init: int
    collocation: int
    evaluation: int
    minibatch: int
    interface: int

    @classmethod
    def derive(cls, seed: int, window_index: int) -> "WindowSeeds":
        state = np.random.SeedSequence([seed, window_index]).generate_state(5)
        return cls(**dict(zip(cls.model_fields, (int(s) for s in state))))


class WindowOutcome(BaseModel):
    window: int
    converged_reason: ConvergedReason
    adam_iterations: int
    lbfgs_iterations: int
    final_train_loss: Optional[float] = None
    final_eval_loss: Optional[float] = None


class TrainingResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    windows: list[WindowAnsatz]
    telemetry: list[TelemetryRecord]
    outcomes: list[WindowOutcome]
    wall_time_seconds: float
    failed_window: Optional[int] = None
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failed_window is not None


class SequentialTrainerService:
    """
    Entrena las ventanas en orden creciente de tiempo: Adam con un número fijo de iteraciones
    y después L-BFGS hasta el criterio de convergencia o el máximo de iteraciones. Los
    parámetros de cada ventana se congelan antes de empezar la siguiente.
    """

    def __init__(
        self,
        problem: ProblemSpec,
        network: NetworkConfig,
        sampling: SamplingConfig,
        schedule: OptimizerSchedule,
        weights: LossWeights,
        mode: Literal["hard", "soft"] = "hard",
        continuity: Optional[int] = None,
        composition: Literal["interpolated", "recursive"] = "interpolated",
    ):
        self.logger = logging.getLogger("hcsp")
        self.problem = problem
        self.network = network
        self.sampling = sampling
        self.schedule = schedule
        self.weights = weights
        self.mode = mode
        self.composition = composition
        self.order = self._continuity_order(continuity)

    def _continuity_order(self, continuity: Optional[int]) -> ContinuityOrder:
        required = self.problem.required_continuity
        if continuity is None:
            return required
        if continuity < required.m:
            raise ConfigurationError(
                f"{self.problem.name} necesita continuidad C^{required.m}, se pidió C^{continuity}"
            )
        order = ContinuityOrder(m=continuity)
        if order.m > required.m:
            self.logger.warning(
                f"[Trainer] m={order.m} > {required.m}: el problema queda sobre-restringido en las interfaces"
            )
        return order

    @property
    def _progress_disabled(self) -> bool:
        return not settings.PROGRESS or self.logger.getEffectiveLevel() > logging.INFO

    def train(self, partition: TimeWindowPartition) -> TrainingResult:
        started = time.perf_counter()
        windows: list[WindowAnsatz] = []
        telemetry: list[TelemetryRecord] = []
        outcomes: list[WindowOutcome] = []
        failed_window, failure = None, None
        self.logger.info(
            f"[Trainer] {self.problem.name}: nt={partition.nt}, modo={self.mode}, m={self.order.m}"
        )
        for index in range(1, partition.nt + 1):
            seeds = WindowSeeds.derive(self.sampling.rng_seed, index)
            ansatz = WindowAnsatz(
                window_index=index,
                partition=partition,
                order=self.order,
                network=self.network,
                params=glorot_init(self.network, seeds.init),
                predecessor=self.problem.ic_series if index == 1 else windows[-1],
                spatial_mask=self.problem.spatial_mask,
                mode=self.mode,
                composition=self.composition,
            )
            try:
                outcome = self._train_window(ansatz, seeds, telemetry, started)
            except TrainingAbort as e:
                failed_window = index
                failure = str(e)
                self.logger.error(f"[Trainer] Entrenamiento abortado: {failure}", exc_info=True)
                break
            ansatz.freeze()
            windows.append(ansatz)
            outcomes.append(outcome)
            self.logger.info(
                f"[Trainer] ventana {index}/{partition.nt} terminada ({outcome.converged_reason}, "
                f"pérdida={outcome.final_train_loss})"
            )
        return TrainingResult(
            windows=windows,
            telemetry=telemetry,
            outcomes=outcomes,
            wall_time_seconds=time.perf_counter() - started,
            failed_window=failed_window,
            failure=failure,
        )

    def _sample(self, ansatz: WindowAnsatz, seeds: WindowSeeds) -> tuple[CollocationPoints, CollocationPoints]:
        window = (ansatz.t_start, ansatz.t_end)
        domain = self.problem.spatial_domain
        points = sample_collocation(window, domain, self.sampling.n_pde_per_window, seeds.collocation)
        if self.sampling.full_batch:
            return points, points
        return points, sample_collocation(window, domain, self.sampling.eval_batch_size, seeds.evaluation)

    def _train_window(
        self, ansatz: WindowAnsatz, seeds: WindowSeeds, telemetry: list[TelemetryRecord], started: float
    ) -> WindowOutcome:
        index = ansatz.window_index
        points, eval_points = self._sample(ansatz, seeds)
        interface = None
        if self.mode == "soft":
            domain = self.problem.spatial_domain
            x = None
            if domain is not None:
                x = np.random.default_rng(seeds.interface).uniform(*domain, size=self.sampling.n_interface)
            interface = interface_targets(ansatz, x)

        def loss_on(batch, params):
            return window_loss(ansatz, batch, self.problem, self.weights, self.mode, interface, params)

        def objective_for(batch):
            return lambda params: value_and_gradient(lambda watched: loss_on(batch, watched), params)

        def eval_loss(params) -> float:
            return float(loss_on(eval_points, params).value.reshape(-1)[0])

        batches = iter_minibatches(points, self.sampling.batch_size, seeds.minibatch)
        state = WindowTrainState.initial(ansatz.params)
        try:
            adam = AdamOptimizerService(self.schedule)
            progress = tqdm(
                range(self.schedule.adam_iters), desc=f"ventana {index} Adam", disable=self._progress_disabled
            )
            for iteration in progress:
                state = adam.step(state, objective_for(next(batches)))
                done = iteration + 1
                if done % self.schedule.eval_every == 0 or done == self.schedule.adam_iters:
                    current_eval = eval_loss(state.params)
                    state = state.with_eval(current_eval)
                    telemetry.append(TelemetryRecord(
                        window=index, iteration=done, phase="adam", train_loss=state.loss_history[-1],
                        eval_loss=current_eval, wall_time=time.perf_counter() - started,
                    ))

            lbfgs = LBFGSOptimizerService(self.schedule)
            eval_history: list[float] = []
            reason: ConvergedReason = "max_iters"
            lbfgs_done = 0
            progress = tqdm(
                range(self.schedule.lbfgs_max_iters), desc=f"ventana {index} L-BFGS", disable=self._progress_disabled
            )
            for iteration in progress:
                # Objetivo fijo durante la iteración: el siguiente mini-lote de entrenamiento, no el de evaluación
                state = lbfgs.step(state, objective_for(next(batches)))
                lbfgs_done = iteration + 1
                converged = convergence_check(eval_history, self.schedule, lambda: eval_loss(state.params))
                state = state.with_eval(eval_history[-1])
                telemetry.append(TelemetryRecord(
                    window=index, iteration=lbfgs_done, phase="lbfgs", train_loss=state.loss_history[-1],
                    eval_loss=eval_history[-1], wall_time=time.perf_counter() - started,
                ))
                if state.converged_reason is not None:
                    reason = state.converged_reason
                    break
                if converged:
                    reason = "tolerance"
                    break
        except TrainingAbort as e:
            raise TrainingAbort(str(e), index) from e

        state = state.restore_best()
        ansatz.params = state.params
        final_eval = eval_loss(state.params)
        if not np.isfinite(final_eval):
            raise TrainingAbort(f"pérdida de evaluación no finita ({final_eval})", index)
        return WindowOutcome(
            window=index,
            converged_reason=reason,
            adam_iterations=self.schedule.adam_iters,
            lbfgs_iterations=lbfgs_done,
            final_train_loss=state.loss_history[-1] if state.loss_history else None,
            final_eval_loss=final_eval,
        )


def train_sequential(
    problem: ProblemSpec,
    partition: TimeWindowPartition,
    mode: Literal["hard", "soft"],
    network: NetworkConfig,
    sampling: SamplingConfig,
    schedule: OptimizerSchedule,
    weights: LossWeights,
    continuity: Optional[int] = None,
    composition: Literal["interpolated", "recursive"] = "interpolated",
) -> TrainingResult:
    trainer = SequentialTrainerService(problem, network, sampling, schedule, weights, mode, continuity, composition)
    return trainer.train(partition)
