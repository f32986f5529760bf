from .residuals import (  # noqa
    residual_advection,
    residual_allen_cahn,
    residual_jerk,
    residual_kdv,
    residual_wave,
)
from .spec import DerivativeSlots, ProblemSpec, ReferenceSolution  # noqa
from .registry import PROBLEMS, DEFAULT_CONSTANTS, build_problem  # noqa
from .oracles import (  # noqa
    SpectralETDRK4,
    analytic_solution,
    jerk_trajectory,
    reference_oracle_ode,
    reference_oracle_pde,
)
