"""
Configuración centralizada del banco de pruebas.
Carga variables desde un archivo .env en BASE_DIR usando dotenv; cualquier campo puede
sobrescribirse con una variable de entorno con prefijo HCSP_ (p. ej. HCSP_RESULTS_DIR).
"""

from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

BASE_DIR = Path(__file__).resolve().parent.parent.parent
load_dotenv(dotenv_path=BASE_DIR / ".env")


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="HCSP_", extra="ignore")

    # Directorios
    DEFAULTS_DIR: Path = BASE_DIR / "defaults"
    RESULTS_DIR: Path = BASE_DIR / "results"
    ORACLE_CACHE_DIR: Path = BASE_DIR / ".oracle_cache"
    LEDGER_NAME: str = "ledger.csv"

    # Logging
    LOG_LEVEL: str = "INFO"
    PROGRESS: bool = True

    # Oráculos de referencia
    ORACLE_NX: int = 512
    ORACLE_DT: float = 1e-4
    ORACLE_RTOL: float = 1e-10
    ORACLE_ATOL: float = 1e-10

    # Malla de evaluación (espacio x tiempo; la EDO usa solo tiempo)
    EVAL_NX: int = 256
    EVAL_NT: int = 201
    EVAL_NT_ODE: int = 2001

    # Barridos
    N_JOBS: int = 1


settings = Settings()
