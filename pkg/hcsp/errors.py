"""
Jerarquía de errores del paquete. La CLI traduce cada familia a un código de salida.
"""


class HCSPError(Exception):
    """Raíz de todos los errores propios de la librería."""


class ConfigurationError(HCSPError, ValueError):
    pass


class ContractViolation(HCSPError, ValueError):
    """Precondición incumplida por quien llama (órdenes, formas, ventanas)."""


class UnsupportedProblemError(HCSPError):
    pass


class OracleError(HCSPError):
    pass


class UndefinedMetricError(HCSPError, ArithmeticError):
    pass


class IngestionError(HCSPError):
    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"línea {line_number}: {message}"
        super().__init__(message)


class TrainingAbort(HCSPError):
    def __init__(self, message: str, window_index: int | None = None):
        self.window_index = window_index
        if window_index is not None:
            message = f"[ventana {window_index}] {message}"
        super().__init__(message)
