import pytest


@pytest.fixture(autouse=True)
def keep_test_logging(monkeypatch):
    # configure_logging usa force=True, que retira el handler de caplog
    monkeypatch.setattr("src.cli.app.configure_logging", lambda level=None: None)


TINY_RUN = """\
problem = advection
nt = 2
nn_depth = 2
nn_width = 8
batch_size = 32
n_collocation = 128
adam_iterations = 0
lbfgs_iterations = 0
"""


@pytest.fixture
def tiny_cfg(tmp_path):
    """Archivo .cfg mínimo: advección con dos ventanas y sin iteraciones."""
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_RUN, encoding="utf-8")
    return path
