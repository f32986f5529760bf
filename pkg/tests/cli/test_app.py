import csv

import numpy as np
import pytest

from hcsp.errors import TrainingAbort
from src.cli.app import EXIT_CONFIG_ERROR, EXIT_IO_ERROR, EXIT_OK, EXIT_TRAINING_FAILURE, main
from src.cli.commands import comparison_rows
from src.services.artifact_service import LEDGER_FIELDS, read_ledger
from src.services.implementations.adam_optimizer_service import AdamOptimizerService
from src.services.implementations.file_reference_service import write_grid_file
from src.settings.config import settings

# Argumentos inválidos que llegan a la validación de la configuración
CONFIG_ERRORS = [
    ["run"],
    ["run", "--problem", "advection", "--set", "learning_rate=1"],
    ["run", "--problem", "advection", "--nt", "0"],
    ["run", "--problem", "advection", "--set", "c=-3"],
    ["run", "--problem", "wave", "--continuity", "0"],
]


def test_run_writes_artifacts_and_ledger(tiny_cfg, tmp_path, capsys):
    output = tmp_path / "out"
    assert main(["run", str(tiny_cfg), "--output-dir", str(output)]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "advection_c30_nt2_hard: L2 relativo" in stdout
    assert "saltos (orden 0..0)" in stdout
    assert (output / "solution.csv").exists()
    rows = read_ledger(settings.RESULTS_DIR / settings.LEDGER_NAME)
    assert rows[-1]["problem"] == "advection" and rows[-1]["nt"] == "2"


def test_run_defaults_output_to_results_dir(tiny_cfg):
    assert main(["run", str(tiny_cfg), "--mode", "soft"]) == EXIT_OK
    assert (settings.RESULTS_DIR / "advection_c30_nt2_soft" / "solution.csv").exists()


@pytest.mark.parametrize("argv", CONFIG_ERRORS)
def test_configuration_errors_exit_with_2(argv, capsys):
    assert main(argv) == EXIT_CONFIG_ERROR
    assert capsys.readouterr().err.startswith("error:")


def test_argparse_rejects_unknown_choices():
    with pytest.raises(SystemExit) as excinfo:
        main(["run", "--problem", "burgers"])
    assert excinfo.value.code == 2


def test_missing_reference_file_exits_with_3(tiny_cfg, tmp_path):
    argv = ["run", str(tiny_cfg), "--reference-file", str(tmp_path / "missing.csv")]
    assert main(argv) == EXIT_IO_ERROR


def test_malformed_ingest_exits_with_3(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("# problem=jerk nx=0 nt_grid=1 provenance=oracle\n# x=\n# t=0\ninf\n", encoding="utf-8")
    assert main(["ingest", str(path)]) == EXIT_IO_ERROR
    assert "línea 4" in capsys.readouterr().err


def test_training_failure_exits_with_1(tiny_cfg, monkeypatch, capsys):
    def abort(self, state, objective):
        raise TrainingAbort("gradiente no finito en Adam")

    monkeypatch.setattr(AdamOptimizerService, "step", abort)
    assert main(["run", str(tiny_cfg), "--adam-iterations", "1"]) == EXIT_TRAINING_FAILURE
    assert "FALLO: [ventana 1]" in capsys.readouterr().out


def test_compare_prints_the_table(tiny_cfg, tmp_path, capsys):
    assert main(["compare", str(tiny_cfg), "--output-dir", str(tmp_path / "cmp")]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    header = lines.index(next(line for line in lines if "HCS error" in line))
    assert lines[header + 1].split("|")[0].strip() == "2"
    assert (tmp_path / "cmp" / "hard" / "solution.csv").exists()
    assert (tmp_path / "cmp" / "soft" / "solution.csv").exists()


def test_sweep_runs_every_file(tmp_path, tiny_cfg, capsys):
    folder = tmp_path / "sweep"
    folder.mkdir()
    (folder / "hard.cfg").write_text(tiny_cfg.read_text())
    (folder / "soft.cfg").write_text(tiny_cfg.read_text() + "mode = soft\n")
    assert main(["sweep", str(folder), "--n-jobs", "1"]) == EXIT_OK
    assert "2/2 ejecuciones completas" in capsys.readouterr().out
    assert [row["mode"] for row in read_ledger(settings.RESULTS_DIR / settings.LEDGER_NAME)] == ["hard", "soft"]


def test_oracle_then_ingest_and_compare(tmp_path, capsys):
    reference = tmp_path / "wave_ref.csv"
    assert main(["oracle", "--problem", "wave", "--output", str(reference)]) == EXIT_OK
    assert "wave 201x256 (analytic)" in capsys.readouterr().out

    assert main(["ingest", str(reference)]) == EXIT_OK
    assert "válido" in capsys.readouterr().out

    grid_x = np.linspace(0.0, np.pi, 256)[::5]
    grid_t = np.linspace(0.0, 2 * np.pi, 201)[::10]
    t, x = np.meshgrid(grid_t, grid_x, indexing="ij")
    exact = np.sin(x) * (np.sin(10.0 * t) + np.cos(10.0 * t))
    solution = write_grid_file(tmp_path / "solution.csv", "wave", grid_x, grid_t, exact * 1.01, "prediction")
    assert main(["ingest", str(reference), "--compare", str(solution)]) == EXIT_OK
    line = capsys.readouterr().out.splitlines()[-1]
    assert float(line.rsplit(" ", 1)[-1]) == pytest.approx(0.01, rel=1e-6)


def _write_ledger(path, entries):
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=LEDGER_FIELDS)
        writer.writeheader()
        for entry in entries:
            writer.writerow({"seed": 0, "timestamp": "2026-01-01T00:00:00+00:00", **entry})


LEDGER_ENTRIES = [
    {"problem": "kdv", "constants": "-", "nt": 4, "mode": "hard", "relative_l2": "5e-2", "seconds": "10"},
    {"problem": "kdv", "constants": "-", "nt": 4, "mode": "soft", "relative_l2": "2e-1", "seconds": "12"},
    {"problem": "kdv", "constants": "-", "nt": 4, "mode": "hard", "relative_l2": "4e-2", "seconds": "11"},
    {"problem": "advection", "constants": "c=30", "nt": 1, "mode": "soft", "relative_l2": "", "seconds": "3"},
]


def test_latest_entry_per_mode_wins():
    rows = comparison_rows([{k: str(v) for k, v in entry.items()} for entry in LEDGER_ENTRIES])
    kdv = rows[("kdv", "-", 4)]
    assert (kdv.hcs_error, kdv.hcs_time, kdv.scs_error) == (4e-2, 11.0, 2e-1)
    advection = rows[("advection", "c=30", 1)]
    assert advection.hcs_error is None and advection.scs_error is None


def test_report_groups_by_problem(tmp_path, capsys):
    ledger = tmp_path / "ledger.csv"
    _write_ledger(ledger, LEDGER_ENTRIES)
    assert main(["report", "--ledger", str(ledger)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "advection [c=30]" in out and "kdv [-]" in out
    assert out.index("advection [c=30]") < out.index("kdv [-]")
    assert "4.0000e-02" in out and "5.0000e-02" not in out
