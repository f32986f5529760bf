from pathlib import Path
from typing import Dict, List, Literal, Optional

import numpy as np
from joblib import hash as joblib_hash
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

from hcsp.ansatz import TimeWindowPartition
from hcsp.diffengine import ParameterVector
from hcsp.network import NetworkConfig
from hcsp.problems import ProblemSpec, build_problem
from hcsp.problems.spec import ProblemName
from src.services.schemas import LossWeights, OptimizerSchedule, SamplingConfig, TelemetryRecord
from src.services.sequential_trainer_service import WindowOutcome


class RunConfig(BaseModel):
    """
    Configuración de una ejecución. Los nombres de campo coinciden con las claves de los
    archivos `.cfg`; las constantes del problema (c, lambda1, k1, ...) viven en `constants`.
    """
    problem: ProblemName
    constants: Dict[str, float] = Field(default_factory=dict)
    nt: PositiveInt = 1
    mode: Literal["hard", "soft"] = "hard"

    nn_depth: PositiveInt = 4
    nn_width: PositiveInt = 32
    batch_type: Literal["MB", "FB"] = "MB"
    batch_size: PositiveInt = 128
    n_collocation: PositiveInt = 20000
    eval_batch_factor: PositiveInt = 4

    adam_step_size: PositiveFloat = 5e-3
    adam_iterations: NonNegativeInt = 10000
    lbfgs_iterations: NonNegativeInt = 1000
    lbfgs_history: PositiveInt = 20
    loss_tolerance: PositiveFloat = 1e-6
    eval_every: PositiveInt = 100

    lambda_i: NonNegativeFloat = 1.0
    causal_c_t: NonNegativeFloat = 10.0
    n_interface: PositiveInt = 256
    continuity: Optional[int] = Field(default=None, ge=0, le=2)
    composition: Literal["interpolated", "recursive"] = "interpolated"

    seed: int = 0
    output_dir: Optional[Path] = None
    reference_file: Optional[Path] = None
    render_images: bool = False

    @model_validator(mode="before")
    @classmethod
    def _full_batch_size(cls, data):
        if isinstance(data, dict) and data.get("batch_type") == "FB" and "batch_size" in data:
            data = {**data, "n_collocation": data["batch_size"]}
        return data

    # --- Construcción de los objetos del dominio ---------------------------------------------

    def build_problem(self) -> ProblemSpec:
        return build_problem(self.problem, **self.constants)

    def partition(self, problem: ProblemSpec) -> TimeWindowPartition:
        return TimeWindowPartition(t_start=0.0, t_end=problem.time_horizon, nt=self.nt)

    def network_config(self, problem: ProblemSpec) -> NetworkConfig:
        return NetworkConfig.for_inputs(
            depth=self.nn_depth, width=self.nn_width, spatial=not problem.is_ode, embedding=problem.embedding
        )

    def sampling_config(self) -> SamplingConfig:
        full_batch = self.batch_type == "FB"
        return SamplingConfig(
            n_pde_per_window=self.n_collocation,
            batch_size=self.batch_size,
            eval_batch_size=self.batch_size if full_batch else self.eval_batch_factor * self.batch_size,
            rng_seed=self.seed,
            full_batch=full_batch,
            n_interface=self.n_interface,
        )

    def optimizer_schedule(self) -> OptimizerSchedule:
        return OptimizerSchedule(
            adam_step=self.adam_step_size,
            adam_iters=self.adam_iterations,
            lbfgs_max_iters=self.lbfgs_iterations,
            lbfgs_history=self.lbfgs_history,
            loss_tolerance=self.loss_tolerance,
            eval_every=self.eval_every,
        )

    def loss_weights(self, problem: ProblemSpec) -> LossWeights:
        return LossWeights(lambda_I=self.lambda_i, causal_C_T=self.causal_c_t, causal_t_max=problem.time_horizon)

    # --- Identificación ------------------------------------------------------------------

    @property
    def constants_label(self) -> str:
        if not self.constants:
            return "-"
        return ";".join(f"{key}={value:g}" for key, value in sorted(self.constants.items()))

    @property
    def label(self) -> str:
        constants = "".join(f"_{key}{value:g}" for key, value in sorted(self.constants.items()))
        return f"{self.problem}{constants}_nt{self.nt}_{self.mode}"

    def fingerprint(self) -> str:
        return joblib_hash(self.model_dump(mode="json", exclude={"output_dir", "render_images"}))


class InterfaceJump(BaseModel):
    boundary: float
    window_before: PositiveInt
    max_jump: List[float]


class RunReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: RunConfig
    outcomes: List[WindowOutcome] = []
    telemetry: List[TelemetryRecord] = []
    relative_l2: Optional[NonNegativeFloat] = None
    wall_time_seconds: NonNegativeFloat
    grid_x: Optional[np.ndarray] = None
    grid_t: np.ndarray
    predictions: np.ndarray
    reference: Optional[np.ndarray] = None
    interface_jumps: List[InterfaceJump] = []
    phase_space: Optional[np.ndarray] = None
    window_params: List[ParameterVector] = []
    failed_window: Optional[int] = None
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failed_window is not None

    @property
    def max_interface_jump(self) -> float:
        return max((max(jump.max_jump) for jump in self.interface_jumps), default=0.0)


class ComparisonRow(BaseModel):
    nt: PositiveInt
    hcs_error: Optional[float] = None
    hcs_time: float
    scs_error: Optional[float] = None
    scs_time: float

    def as_line(self) -> str:
        def fmt(value):
            return "-" if value is None else f"{value:.4e}"
        return f"{self.nt:>4} | {fmt(self.hcs_error):>12} | {self.hcs_time:>10.1f} | {fmt(self.scs_error):>12} | {self.scs_time:>10.1f}"


COMPARISON_HEADER = f"{'nt':>4} | {'HCS error':>12} | {'HCS time':>10} | {'SCS error':>12} | {'SCS time':>10}"
