import logging
from pathlib import Path
from typing import Optional

import numpy as np
from joblib import Memory

from hcsp.problems import ProblemSpec, ReferenceSolution, build_problem, reference_oracle_ode, reference_oracle_pde
from src.services.reference_service import ReferenceService
from src.settings.config import settings


def _spectral_grid(name: str, constants: dict, time_horizon: float, nx: int, dt: float, samples: int):
    problem = build_problem(name, time_horizon=time_horizon, **constants)
    solution = reference_oracle_pde(problem, nx=nx, dt=dt, time_samples=samples)
    return solution.grid_x, solution.grid_t, solution.values


def _ode_grid(name: str, constants: dict, time_horizon: float, grid_t: np.ndarray, rtol: float, atol: float):
    problem = build_problem(name, time_horizon=time_horizon, **constants)
    solution = reference_oracle_ode(problem, grid_t, rtol=rtol, atol=atol)
    return solution.values


class OracleReferenceService(ReferenceService):
    """
    Oráculos integrados (espectral para Allen-Cahn/KdV, DOP853 para Jerk) con caché en disco
    de joblib. Los problemas se reconstruyen a partir de su nombre y constantes para que la
    clave de caché sea estable.
    """

    def __init__(self, cache_dir: Optional[Path] = None, nx: Optional[int] = None, dt: Optional[float] = None):
        self.logger = logging.getLogger("hcsp")
        self.nx = nx or settings.ORACLE_NX
        self.dt = dt or settings.ORACLE_DT
        memory = Memory(location=str(cache_dir or settings.ORACLE_CACHE_DIR), verbose=0)
        self._spectral = memory.cache(_spectral_grid)
        self._ode = memory.cache(_ode_grid)

    def reference(self, problem: ProblemSpec, grid_x: Optional[np.ndarray], grid_t: np.ndarray) -> ReferenceSolution:
        try:
            if problem.reference == "oracle_ode":
                values = self._ode(
                    problem.name, dict(problem.constants), problem.time_horizon,
                    np.asarray(grid_t, dtype=np.float64), settings.ORACLE_RTOL, settings.ORACLE_ATOL,
                )
                return ReferenceSolution(
                    problem=problem.name, grid_x=np.empty(0), grid_t=grid_t, values=values, provenance="oracle"
                )
            full = self.full_reference(problem, samples=len(grid_t))
            return ReferenceSolution(
                problem=problem.name,
                grid_x=grid_x,
                grid_t=grid_t,
                values=full.restrict(grid_x, grid_t),
                provenance="oracle",
            )
        except Exception as e:
            self.logger.error(f"[Oracle] Error generando la referencia de {problem.name}: {e}", exc_info=True)
            raise

    def full_reference(self, problem: ProblemSpec, samples: int) -> ReferenceSolution:
        grid_x, grid_t, values = self._spectral(
            problem.name, dict(problem.constants), problem.time_horizon, self.nx, self.dt, samples
        )
        return ReferenceSolution(
            problem=problem.name, grid_x=grid_x, grid_t=grid_t, values=values, provenance="oracle"
        )
