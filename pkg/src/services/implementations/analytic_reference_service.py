from typing import Optional

import numpy as np

from hcsp.problems import ProblemSpec, ReferenceSolution, analytic_solution
from src.services.reference_service import ReferenceService


class AnalyticReferenceService(ReferenceService):
    def reference(self, problem: ProblemSpec, grid_x: Optional[np.ndarray], grid_t: np.ndarray) -> ReferenceSolution:
        t, x = np.meshgrid(grid_t, grid_x, indexing="ij")
        return ReferenceSolution(
            problem=problem.name,
            grid_x=grid_x,
            grid_t=grid_t,
            values=analytic_solution(problem, x, t),
            provenance="analytic",
        )
