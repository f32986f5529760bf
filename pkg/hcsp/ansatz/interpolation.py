"""
Funciones de interpolación h_N(τ), h_{N+1}(τ) que mezclan la solución previa y la red de la
ventana actual. Para orden m se cumplen h_{N+1}(0) = 0, h_{N+1}(1) = 1 y las derivadas
1..m se anulan en ambos extremos; h_N = 1 - h_{N+1}.
"""

from __future__ import annotations

import numpy as np

from hcsp.diffengine import Jet
from hcsp.errors import ConfigurationError, ContractViolation

TAU_SLACK = 1e-12


def _blend(m: int, tau):
    if m == 0:
        return tau
    if m == 1:
        return tau * tau * (3.0 - 2.0 * tau)
    if m == 2:
        return tau * tau * tau * (10.0 + tau * (6.0 * tau - 15.0))
    raise ConfigurationError(f"orden de continuidad no soportado: m={m}")


def interp(m, tau):
    """
    Devuelve (h_prev, h_next) evaluados en τ. Acepta escalares, arrays o jets; con jets las
    derivadas respecto al tiempo de h se propagan por la regla del producto.
    """
    m = int(getattr(m, "m", m))
    value = tau.value if isinstance(tau, Jet) else np.asarray(tau, dtype=np.float64)
    if np.any(value < -TAU_SLACK) or np.any(value > 1.0 + TAU_SLACK):
        raise ContractViolation(
            f"τ fuera de [0, 1]: rango [{np.min(value):.6g}, {np.max(value):.6g}]"
        )
    h_next = _blend(m, tau)
    return 1.0 - h_next, h_next


def dirichlet_mask(x, domain: tuple[float, float]):
    """(x - a)(b - x): se anula en ambos extremos del dominio espacial."""
    a, b = domain
    return (x - a) * (b - x)
