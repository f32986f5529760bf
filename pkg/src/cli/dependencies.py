from pathlib import Path
from typing import Optional

from src.services.benchmark_service import BenchmarkService
from src.services.implementations.analytic_reference_service import AnalyticReferenceService
from src.services.implementations.oracle_reference_service import OracleReferenceService
from src.services.reference_service import ReferenceService
from src.settings.config import settings


def get_benchmark_service(reference_service: Optional[ReferenceService] = None) -> BenchmarkService:
    """
    Sin servicio explícito, cada ejecución elige su referencia: archivo si la configuración
    lo indica, solución analítica si existe y, si no, el oráculo integrado.
    """
    return BenchmarkService(reference_service, ledger_path=ledger_path())


def get_oracle_service(cache_dir: Optional[Path] = None) -> OracleReferenceService:
    return OracleReferenceService(cache_dir=cache_dir or settings.ORACLE_CACHE_DIR)


def get_analytic_service() -> AnalyticReferenceService:
    return AnalyticReferenceService()


def default_output_dir(label: str) -> Path:
    return settings.RESULTS_DIR / label


def ledger_path() -> Path:
    return settings.RESULTS_DIR / settings.LEDGER_NAME
