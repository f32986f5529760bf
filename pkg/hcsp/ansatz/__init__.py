from .interpolation import dirichlet_mask, interp  # noqa
from .window_ansatz import (  # noqa
    ContinuityOrder,
    InitialConditionSeries,
    TimeWindowPartition,
    WindowAnsatz,
    ansatz_eval,
    ic_series_eval,
)
