"""
Soluciones de referencia integradas: pseudoespectral de Fourier con ETDRK4 (Allen-Cahn, KdV),
integración adaptativa DOP853 para la ecuación Jerk y soluciones analíticas
(advección, onda).
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from hcsp.errors import ConfigurationError, OracleError, UnsupportedProblemError
from hcsp.problems.residuals import residual_jerk
from hcsp.problems.spec import ProblemSpec, ReferenceSolution

logger = logging.getLogger("hcsp")

CONTOUR_POINTS = 32
DEFAULT_NX = 512
DEFAULT_DT = 1e-4
DEFAULT_TIME_SAMPLES = 201


class SpectralETDRK4:
    """
    Integrador ETDRK4 en espacio de Fourier para u_t = L u + N(u) periódico. Los coeficientes
    se obtienen por cuadratura sobre un círculo completo de radio 1 centrado en dt·L, así que
    admite operadores lineales complejos (dispersión).
    """

    def __init__(self, linear: np.ndarray, nonlinear, dt: float, contour_points: int = CONTOUR_POINTS):
        self.dt = dt
        self.nonlinear = nonlinear
        self.exp_full = np.exp(dt * linear)
        self.exp_half = np.exp(0.5 * dt * linear)
        roots = np.exp(2j * np.pi * (np.arange(1, contour_points + 1) - 0.5) / contour_points)
        lr = dt * linear[:, None] + roots[None, :]
        exp_lr = np.exp(lr)
        lr3 = lr ** 3
        self.q = dt * np.mean((np.exp(lr / 2.0) - 1.0) / lr, axis=1)
        self.f1 = dt * np.mean((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr ** 2)) / lr3, axis=1)
        self.f2 = dt * np.mean((2.0 + lr + exp_lr * (lr - 2.0)) / lr3, axis=1)
        self.f3 = dt * np.mean((-4.0 - 3.0 * lr - lr ** 2 + exp_lr * (4.0 - lr)) / lr3, axis=1)

    def step(self, v: np.ndarray) -> np.ndarray:
        nv = self.nonlinear(v)
        a = self.exp_half * v + self.q * nv
        na = self.nonlinear(a)
        b = self.exp_half * v + self.q * na
        nb = self.nonlinear(b)
        c = self.exp_half * a + self.q * (2.0 * nb - nv)
        nc = self.nonlinear(c)
        return self.exp_full * v + self.f1 * nv + 2.0 * self.f2 * (na + nb) + self.f3 * nc


def _spectral_operators(problem: ProblemSpec, nx: int):
    a, b = problem.spatial_domain
    n = np.fft.rfftfreq(nx, d=1.0 / nx)
    k = 2.0 * math.pi / (b - a) * n
    k_odd = k.copy()
    # Modo de Nyquist a cero en derivadas impares
    k_odd[-1] = 0.0
    lambda1 = problem.constants["lambda1"]
    lambda2 = problem.constants["lambda2"]

    if problem.name == "allen_cahn":
        linear = (-lambda1 * k ** 2 + lambda2).astype(np.complex128)

        def nonlinear(v):
            u = np.fft.irfft(v, n=nx)
            return -lambda2 * np.fft.rfft(u ** 3)

        return linear, nonlinear

    linear = 1j * lambda2 * k_odd ** 3

    def nonlinear(v):
        u = np.fft.irfft(v, n=nx)
        return -0.5j * lambda1 * k_odd * np.fft.rfft(u ** 2)

    return linear, nonlinear


def reference_oracle_pde(
    problem: ProblemSpec,
    nx: int = DEFAULT_NX,
    dt: float = DEFAULT_DT,
    time_samples: int = DEFAULT_TIME_SAMPLES,
) -> ReferenceSolution:
    """
    Resuelve Allen-Cahn o KdV sobre nx nodos periódicos y devuelve la malla (time_samples) x
    (nx + 1), repitiendo el nodo periódico en el extremo derecho.
    """
    if problem.name not in ("allen_cahn", "kdv"):
        raise UnsupportedProblemError(f"sin oráculo pseudoespectral para {problem.name!r}")
    if nx < 256 or nx & (nx - 1):
        raise ConfigurationError(f"nx debe ser potencia de dos >= 256, no {nx}")
    horizon = problem.time_horizon
    n_steps = int(round(horizon / dt))
    if n_steps < 1 or not math.isclose(n_steps * dt, horizon, rel_tol=1e-9):
        raise ConfigurationError(f"dt={dt} no divide el horizonte T={horizon}")
    intervals = time_samples - 1
    if intervals < 1 or n_steps % intervals:
        raise ConfigurationError(f"{n_steps} pasos no se reparten en {intervals} intervalos de salida")
    stride = n_steps // intervals

    a, b = problem.spatial_domain
    x = a + (b - a) * np.arange(nx) / nx
    u0 = np.asarray(problem.ic_series.terms[0](x), dtype=np.float64)
    linear, nonlinear = _spectral_operators(problem, nx)
    stepper = SpectralETDRK4(linear, nonlinear, dt)

    logger.info(f"[Oracle] {problem.name}: nx={nx}, dt={dt:g}, {n_steps} pasos")
    values = np.empty((time_samples, nx + 1))
    values[0, :nx] = u0
    v = np.fft.rfft(u0)
    for sample in range(1, time_samples):
        for _ in range(stride):
            v = stepper.step(v)
        values[sample, :nx] = np.fft.irfft(v, n=nx)
    values[:, nx] = values[:, 0]
    if not np.all(np.isfinite(values)):
        raise OracleError(f"el oráculo espectral de {problem.name} divergió (dt={dt:g})")

    grid_x = np.append(x, b)
    grid_t = np.linspace(0.0, horizon, time_samples)
    return ReferenceSolution(
        problem=problem.name, grid_x=grid_x, grid_t=grid_t, values=values, provenance="oracle"
    )


def jerk_trajectory(
    problem: ProblemSpec, t_grid: np.ndarray, rtol: float = 1e-10, atol: float = 1e-10
) -> np.ndarray:
    """Estado (x, x_t, x_tt) sobre t_grid; forma (len(t_grid), 3)."""
    if problem.name != "jerk":
        raise UnsupportedProblemError(f"sin oráculo EDO para {problem.name!r}")
    k1, k2, k3 = (problem.constants[key] for key in ("k1", "k2", "k3"))

    def rhs(_, state):
        x, x_t, x_tt = state
        return [x_t, x_tt, -residual_jerk(x, x_t, x_tt, 0.0, k1, k2, k3)]

    t_grid = np.asarray(t_grid, dtype=np.float64)
    initial = [float(g(None)) for g in problem.ic_series.terms]
    solution = solve_ivp(
        rhs, (0.0, float(t_grid[-1])), initial, method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol
    )
    if not solution.success:
        raise OracleError(f"DOP853 no alcanzó la tolerancia {rtol:g}: {solution.message}")
    return solution.y.T


def reference_oracle_ode(
    problem: ProblemSpec, t_grid: np.ndarray, rtol: float = 1e-10, atol: float = 1e-10
) -> ReferenceSolution:
    logger.info(f"[Oracle] {problem.name}: DOP853 rtol={rtol:g} sobre {len(t_grid)} instantes")
    states = jerk_trajectory(problem, t_grid, rtol, atol)
    return ReferenceSolution(
        problem=problem.name,
        grid_x=np.empty(0),
        grid_t=t_grid,
        values=states[:, :1],
        provenance="oracle",
    )


def analytic_solution(problem: ProblemSpec, x, t):
    c = problem.constants.get("c")
    if problem.name == "advection":
        return np.sin(np.asarray(x) - c * np.asarray(t))
    if problem.name == "wave":
        ct = c * np.asarray(t)
        return np.sin(x) * (np.sin(ct) + np.cos(ct))
    raise UnsupportedProblemError(f"{problem.name!r} no tiene solución analítica")
