"""
Registro de problemas de referencia: dominios, condiciones iniciales, tratamiento de contorno
y constantes por defecto. Las constantes se pueden sobrescribir por nombre.
"""

from __future__ import annotations

import math
from functools import partial

import numpy as np

from hcsp.ansatz import InitialConditionSeries
from hcsp.diffengine import Jet, jet_cos, jet_sin
from hcsp.errors import ConfigurationError
from hcsp.network import PeriodicEmbedding
from hcsp.problems import residuals
from hcsp.problems.spec import ProblemSpec

PROBLEMS = ("advection", "wave", "allen_cahn", "kdv", "jerk")

DEFAULT_CONSTANTS: dict[str, dict[str, float]] = {
    "advection": {"c": 30.0, "time_horizon": 1.0},
    "wave": {"c": 10.0, "time_horizon": 2.0 * math.pi},
    "allen_cahn": {
        "lambda1": residuals.ALLEN_CAHN_LAMBDA1,
        "lambda2": residuals.ALLEN_CAHN_LAMBDA2,
        "time_horizon": 1.0,
    },
    "kdv": {"lambda1": residuals.KDV_LAMBDA1, "lambda2": residuals.KDV_LAMBDA2, "time_horizon": 1.0},
    "jerk": {
        "k1": residuals.JERK_K1,
        "k2": residuals.JERK_K2,
        "k3": residuals.JERK_K3,
        "x0": 0.0,
        "v0": 1.0,
        "a0": 1.0,
        "time_horizon": 50.0,
    },
}


def _sin(x):
    return jet_sin(x) if isinstance(x, Jet) else np.sin(x)


def _cos(x):
    return jet_cos(x) if isinstance(x, Jet) else np.cos(x)


def _scaled_sin(x, amplitude: float):
    return _sin(x) * amplitude


def _allen_cahn_ic(x):
    return x * x * _cos(x * math.pi)


def _kdv_ic(x):
    return _cos(x * math.pi)


def _constant(x, value: float):
    return value


def build_problem(name: str, **overrides) -> ProblemSpec:
    if name not in DEFAULT_CONSTANTS:
        raise ConfigurationError(f"problema desconocido: {name!r} (disponibles: {', '.join(PROBLEMS)})")
    constants = dict(DEFAULT_CONSTANTS[name])
    unknown = set(overrides) - set(constants)
    if unknown:
        raise ConfigurationError(f"constantes no reconocidas para {name}: {sorted(unknown)}")
    constants.update({key: float(value) for key, value in overrides.items()})
    horizon = constants.pop("time_horizon")
    if horizon <= 0:
        raise ConfigurationError(f"horizonte temporal no positivo: {horizon}")

    if name == "advection":
        c = _positive(constants, "c")
        return ProblemSpec(
            name=name,
            spatial_domain=(0.0, 2.0 * math.pi),
            time_horizon=horizon,
            time_order=1,
            x_order=1,
            operator=lambda s: residuals.residual_advection(s.u_t, s.u_x, c),
            scaling=c,
            ic_series=InitialConditionSeries(terms=(_sin,)),
            bc="periodic_embedding",
            embedding=PeriodicEmbedding(omega=1.0),
            reference="analytic",
            constants=constants,
        )

    if name == "wave":
        c = _positive(constants, "c")
        return ProblemSpec(
            name=name,
            spatial_domain=(0.0, math.pi),
            time_horizon=horizon,
            time_order=2,
            x_order=2,
            operator=lambda s: residuals.residual_wave(s.u_tt, s.u_xx, c),
            scaling=c * c,
            ic_series=InitialConditionSeries(terms=(_sin, partial(_scaled_sin, amplitude=c))),
            bc="dirichlet_mask",
            reference="analytic",
            constants=constants,
        )

    if name == "allen_cahn":
        lambda1, lambda2 = constants["lambda1"], constants["lambda2"]
        return ProblemSpec(
            name=name,
            spatial_domain=(-1.0, 1.0),
            time_horizon=horizon,
            time_order=1,
            x_order=2,
            operator=lambda s: residuals.residual_allen_cahn(s.u, s.u_t, s.u_xx, lambda1, lambda2),
            ic_series=InitialConditionSeries(terms=(_allen_cahn_ic,)),
            bc="periodic_embedding",
            embedding=PeriodicEmbedding(omega=math.pi),
            reference="oracle_pde",
            constants=constants,
        )

    if name == "kdv":
        lambda1, lambda2 = constants["lambda1"], constants["lambda2"]
        return ProblemSpec(
            name=name,
            spatial_domain=(-1.0, 1.0),
            time_horizon=horizon,
            time_order=1,
            x_order=3,
            operator=lambda s: residuals.residual_kdv(s.u, s.u_t, s.u_x, s.u_xxx, lambda1, lambda2),
            ic_series=InitialConditionSeries(terms=(_kdv_ic,)),
            bc="periodic_embedding",
            embedding=PeriodicEmbedding(omega=math.pi),
            reference="oracle_pde",
            constants=constants,
        )

    k1, k2, k3 = constants["k1"], constants["k2"], constants["k3"]
    initial_state = (constants["x0"], constants["v0"], constants["a0"])
    return ProblemSpec(
        name=name,
        time_horizon=horizon,
        time_order=3,
        x_order=0,
        operator=lambda s: residuals.residual_jerk(s.u, s.u_t, s.u_tt, s.u_ttt, k1, k2, k3),
        ic_series=InitialConditionSeries(terms=tuple(partial(_constant, value=v) for v in initial_state)),
        bc="none",
        reference="oracle_ode",
        constants=constants,
        causal_scope="window",
    )


def _positive(constants: dict[str, float], key: str) -> float:
    value = constants[key]
    if value <= 0:
        raise ConfigurationError(f"la constante {key} debe ser positiva, no {value}")
    return value
