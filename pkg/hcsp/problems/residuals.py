"""
Operadores residuales de los cinco problemas de referencia. Reciben las ranuras de derivadas
(jets de orden 0 o floats/arrays) y devuelven el residuo puntual ya escalado.
"""

ALLEN_CAHN_LAMBDA1 = 1e-4
ALLEN_CAHN_LAMBDA2 = 5.0
KDV_LAMBDA1 = 1.0
KDV_LAMBDA2 = 0.0025
JERK_K1 = -0.4
JERK_K2 = -2.1
JERK_K3 = -1.0


def residual_advection(u_t, u_x, c: float):
    # Normalizado por la velocidad de transporte
    return u_t * (1.0 / c) + u_x


def residual_wave(u_tt, u_xx, c: float):
    return u_tt * (1.0 / c ** 2) - u_xx


def residual_allen_cahn(u, u_t, u_xx, lambda1: float = ALLEN_CAHN_LAMBDA1, lambda2: float = ALLEN_CAHN_LAMBDA2):
    return u_t - lambda1 * u_xx + lambda2 * (u * u * u) - lambda2 * u


def residual_kdv(u, u_t, u_x, u_xxx, lambda1: float = KDV_LAMBDA1, lambda2: float = KDV_LAMBDA2):
    return u_t + lambda1 * (u * u_x) + lambda2 * u_xxx


def residual_jerk(x, x_t, x_tt, x_ttt, k1: float = JERK_K1, k2: float = JERK_K2, k3: float = JERK_K3):
    """x''' - (k1 x'' + k2 x' + x² + k3)."""
    return x_ttt - (k1 * x_tt + k2 * x_t + x * x + k3)
