import numpy as np
import pytest

from hcsp.network import NetworkConfig, PeriodicEmbedding
from hcsp.problems import build_problem
from src.cli.schemas import RunConfig
from src.settings.config import settings


@pytest.fixture(autouse=True)
def quiet_settings(monkeypatch, tmp_path):
    """
    Sin barras de progreso y con directorios de resultados y caché del oráculo temporales,
    para que ningún test escriba en el árbol del proyecto.
    """
    monkeypatch.setattr(settings, "PROGRESS", False)
    monkeypatch.setattr(settings, "RESULTS_DIR", tmp_path / "results")
    monkeypatch.setattr(settings, "ORACLE_CACHE_DIR", tmp_path / "oracle_cache")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_network():
    """Red espacio-tiempo sin embedding: entradas (x, t)."""
    return NetworkConfig.for_inputs(depth=2, width=8, spatial=True)


@pytest.fixture
def periodic_network():
    return NetworkConfig.for_inputs(depth=2, width=8, spatial=True, embedding=PeriodicEmbedding(omega=1.0))


@pytest.fixture
def advection():
    return build_problem("advection")


@pytest.fixture
def jerk():
    return build_problem("jerk")


@pytest.fixture
def tiny_run_config(tmp_path):
    """Advección con dos ventanas, red mínima y sin iteraciones: solo construcción y evaluación."""
    return RunConfig(
        problem="advection",
        nt=2,
        nn_depth=2,
        nn_width=8,
        batch_size=32,
        n_collocation=128,
        adam_iterations=0,
        lbfgs_iterations=0,
        output_dir=tmp_path / "run",
    )
