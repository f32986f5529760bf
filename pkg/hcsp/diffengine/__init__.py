from .jet import (  # noqa
    MAX_ORDER,
    Jet,
    jet_affine,
    jet_arithmetic,
    jet_concat,
    jet_constant,
    jet_cos,
    jet_lift,
    jet_mean,
    jet_sin,
    jet_sum,
    jet_tanh,
)
from .parameters import LayerShape, ParameterVector  # noqa
from .tape import GradientTape, WatchedParameters, loss_gradient, value_and_gradient  # noqa
