import logging
from pathlib import Path
from typing import Optional

import numpy as np
from more_itertools import pairwise
from pydantic import BaseModel, ConfigDict

from hcsp.ansatz import TimeWindowPartition, WindowAnsatz
from hcsp.errors import ContractViolation, UndefinedMetricError
from hcsp.problems import ProblemSpec, ReferenceSolution
from src.cli.schemas import ComparisonRow, InterfaceJump, RunConfig, RunReport
from src.services.artifact_service import emit_artifacts
from src.services.implementations.analytic_reference_service import AnalyticReferenceService
from src.services.implementations.file_reference_service import FileReferenceService
from src.services.implementations.oracle_reference_service import OracleReferenceService
from src.services.reference_service import ReferenceService
from src.services.sequential_trainer_service import SequentialTrainerService
from src.settings.config import settings


def relative_l2(pred, ref) -> float:
    """‖pred - ref‖₂ / ‖ref‖₂ sobre toda la malla (norma euclídea del vector aplanado)."""
    reference = ref.values if isinstance(ref, ReferenceSolution) else np.asarray(ref, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != reference.shape:
        raise ContractViolation(f"formas distintas: predicción {pred.shape}, referencia {reference.shape}")
    norm = np.linalg.norm(reference.ravel())
    if norm == 0.0:
        raise UndefinedMetricError("la referencia tiene norma cero")
    return float(np.linalg.norm((pred - reference).ravel()) / norm)


def evaluation_grid(problem: ProblemSpec) -> tuple[Optional[np.ndarray], np.ndarray]:
    """
    EDP: 256 nodos en x por 201 instantes. En dominios periódicos se omite el extremo derecho
    para que la malla sea submalla de la del oráculo espectral. EDO: 2001 instantes.
    """
    horizon = problem.time_horizon
    if problem.is_ode:
        return None, np.linspace(0.0, horizon, settings.EVAL_NT_ODE)
    a, b = problem.spatial_domain
    if problem.bc == "periodic_embedding":
        grid_x = a + (b - a) * np.arange(settings.EVAL_NX) / settings.EVAL_NX
    else:
        grid_x = np.linspace(a, b, settings.EVAL_NX)
    return grid_x, np.linspace(0.0, horizon, settings.EVAL_NT)


def predict_grid(
    windows: list[WindowAnsatz],
    partition: TimeWindowPartition,
    grid_x: Optional[np.ndarray],
    grid_t: np.ndarray,
) -> np.ndarray:
    """Solución por tramos sobre la malla; las ventanas que falten quedan como NaN."""
    width = 1 if grid_x is None else len(grid_x)
    values = np.full((len(grid_t), width), np.nan)
    owner = partition.locate(grid_t)
    for ansatz in windows:
        rows = np.flatnonzero(owner == ansatz.window_index)
        if rows.size == 0:
            continue
        if grid_x is None:
            values[rows, 0] = ansatz.evaluate(None, grid_t[rows])
            continue
        t_mesh, x_mesh = np.meshgrid(grid_t[rows], grid_x, indexing="ij")
        values[rows] = ansatz.evaluate(x_mesh.ravel(), t_mesh.ravel()).reshape(rows.size, width)
    return values


def interface_jumps(windows: list[WindowAnsatz], x_points: Optional[np.ndarray], order: int) -> list[InterfaceJump]:
    """Máximo |Δ| del valor y de las derivadas temporales 0..order en cada borde interior."""
    jumps = []
    for left, right in pairwise(windows):
        n = 1 if x_points is None else len(x_points)
        t = np.full(n, left.t_end)
        before = left.time_derivatives(x_points, t, order)
        after = right.time_derivatives(x_points, t, order)
        difference = np.abs(after - before).reshape(order + 1, -1).max(axis=1)
        jumps.append(InterfaceJump(
            boundary=left.t_end, window_before=left.window_index, max_jump=[float(d) for d in difference]
        ))
    return jumps


def phase_space(windows: list[WindowAnsatz], partition: TimeWindowPartition, grid_t: np.ndarray) -> np.ndarray:
    """(x, x_t, x_tt) de la solución de la EDO sobre grid_t; forma (len(grid_t), 3)."""
    states = np.full((len(grid_t), 3), np.nan)
    owner = partition.locate(grid_t)
    for ansatz in windows:
        rows = np.flatnonzero(owner == ansatz.window_index)
        if rows.size:
            states[rows] = ansatz.time_derivatives(None, grid_t[rows], 2).T
    return states


def reference_service_for(config: RunConfig, problem: ProblemSpec) -> ReferenceService:
    if config.reference_file is not None:
        return FileReferenceService(config.reference_file)
    if problem.reference == "analytic":
        return AnalyticReferenceService()
    return OracleReferenceService()


class BenchmarkService:
    """Orquesta una ejecución completa: entrenamiento, malla de evaluación, métricas y artefactos."""

    def __init__(self, reference_service: Optional[ReferenceService] = None, ledger_path: Optional[Path] = None):
        self.logger = logging.getLogger("hcsp")
        self.reference_service = reference_service
        self.ledger_path = ledger_path or settings.RESULTS_DIR / settings.LEDGER_NAME

    def run(self, config: RunConfig) -> RunReport:
        self.logger.info(f"[Benchmark] --- Iniciando {config.label} (semilla {config.seed}) ---")
        try:
            problem = config.build_problem()
            partition = config.partition(problem)
            trainer = SequentialTrainerService(
                problem=problem,
                network=config.network_config(problem),
                sampling=config.sampling_config(),
                schedule=config.optimizer_schedule(),
                weights=config.loss_weights(problem),
                mode=config.mode,
                continuity=config.continuity,
                composition=config.composition,
            )
            result = trainer.train(partition)

            grid_x, grid_t = evaluation_grid(problem)
            predictions = predict_grid(result.windows, partition, grid_x, grid_t)
            reference_service = self.reference_service or reference_service_for(config, problem)
            reference = reference_service.reference(problem, grid_x, grid_t).values
            error = None
            if not result.failed:
                error = relative_l2(predictions, reference)

            report = RunReport(
                config=config,
                outcomes=result.outcomes,
                telemetry=result.telemetry,
                relative_l2=error,
                wall_time_seconds=result.wall_time_seconds,
                grid_x=grid_x,
                grid_t=grid_t,
                predictions=predictions,
                reference=reference,
                interface_jumps=interface_jumps(result.windows, grid_x, trainer.order.m),
                phase_space=phase_space(result.windows, partition, grid_t) if problem.is_ode else None,
                window_params=[ansatz.params for ansatz in result.windows],
                failed_window=result.failed_window,
                failure=result.failure,
            )
            if config.output_dir is not None:
                emit_artifacts(
                    report, config.output_dir,
                    ledger_path=self.ledger_path, images=config.render_images,
                )
            if report.failed:
                self.logger.warning(f"[Benchmark] {config.label}: fallo en la ventana {report.failed_window}")
            else:
                self.logger.info(
                    f"[Benchmark] {config.label}: L2 relativo={error:.4e}, "
                    f"tiempo={result.wall_time_seconds:.1f}s, salto máx.={report.max_interface_jump:.2e}"
                )
            return report
        except Exception as e:
            self.logger.error(f"[Benchmark] Error en {config.label}: {e}", exc_info=True)
            raise


def run_benchmark(
    config: RunConfig, reference_service: Optional[ReferenceService] = None, ledger_path: Optional[Path] = None
) -> RunReport:
    return BenchmarkService(reference_service, ledger_path).run(config)


class ModeComparison(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    hard: RunReport
    soft: RunReport
    row: ComparisonRow


def compare_modes(
    config: RunConfig, reference_service: Optional[ReferenceService] = None, ledger_path: Optional[Path] = None
) -> ModeComparison:
    """Ejecuta HCS y SCS con las mismas semillas; solo cambia el modo (λ_I solo actúa en SCS)."""
    service = BenchmarkService(reference_service, ledger_path)

    def arm(mode: str) -> RunConfig:
        update = {"mode": mode}
        if config.output_dir is not None:
            update["output_dir"] = config.output_dir / mode
        return config.model_copy(update=update)

    hard = service.run(arm("hard"))
    soft = service.run(arm("soft"))
    row = ComparisonRow(
        nt=config.nt,
        hcs_error=hard.relative_l2,
        hcs_time=hard.wall_time_seconds,
        scs_error=soft.relative_l2,
        scs_time=soft.wall_time_seconds,
    )
    return ModeComparison(hard=hard, soft=soft, row=row)
