from typing import Optional

import numpy as np

from hcsp.problems import ProblemSpec, ReferenceSolution


class ReferenceService:
    """Interfaz para las fuentes de soluciones de referencia."""

    def reference(self, problem: ProblemSpec, grid_x: Optional[np.ndarray], grid_t: np.ndarray) -> ReferenceSolution:
        """
        Devuelve la referencia restringida a la malla de evaluación (grid_x es None para la EDO).
        """
        raise NotImplementedError
