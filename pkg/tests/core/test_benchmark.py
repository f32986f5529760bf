import math

import numpy as np
import pytest

from hcsp.diffengine import ParameterVector
from hcsp.errors import ContractViolation, TrainingAbort, UndefinedMetricError
from hcsp.problems import ReferenceSolution, build_problem
from src.cli.schemas import RunConfig
from src.services.artifact_service import read_ledger
from src.services.benchmark_service import (
    compare_modes,
    evaluation_grid,
    relative_l2,
    run_benchmark,
)
from src.services.implementations.adam_optimizer_service import AdamOptimizerService
from src.services.implementations.file_reference_service import ingest_reference
from src.services.reference_service import ReferenceService


class OnesReferenceService(ReferenceService):
    """Referencia constante, para no depender de un oráculo en los tests de orquestación."""

    def reference(self, problem, grid_x, grid_t):
        width = 1 if grid_x is None else len(grid_x)
        return ReferenceSolution(
            problem=problem.name,
            grid_x=np.empty(0) if grid_x is None else grid_x,
            grid_t=grid_t,
            values=np.ones((len(grid_t), width)),
            provenance="oracle",
        )


class RelativeL2Suite:
    def test_known_values(self):
        assert relative_l2([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
        assert relative_l2([2.0, 4.0], [1.0, 2.0]) == pytest.approx(1.0)
        assert relative_l2([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(1.0)
        assert relative_l2([1.0, 1.0], [1.0, 0.0]) == pytest.approx(1.0)

    def test_accepts_a_reference_solution(self):
        reference = OnesReferenceService().reference(build_problem("jerk"), None, np.linspace(0, 1, 4))
        assert relative_l2(np.full((4, 1), 1.5), reference) == pytest.approx(0.5)

    def test_zero_reference_is_undefined(self):
        with pytest.raises(UndefinedMetricError):
            relative_l2([1.0, 2.0], [0.0, 0.0])

    def test_shapes_must_match(self):
        with pytest.raises(ContractViolation):
            relative_l2(np.zeros((2, 3)), np.ones((3, 2)))


class EvaluationGridSuite:
    def test_periodic_grid_skips_right_endpoint(self):
        grid_x, grid_t = evaluation_grid(build_problem("advection"))
        assert len(grid_x) == 256 and len(grid_t) == 201
        assert grid_x[0] == 0.0 and grid_x[-1] < 2 * math.pi
        assert grid_x[1] - grid_x[0] == pytest.approx(2 * math.pi / 256)

    def test_dirichlet_grid_includes_both_edges(self):
        grid_x, grid_t = evaluation_grid(build_problem("wave"))
        assert grid_x[0] == 0.0 and grid_x[-1] == pytest.approx(math.pi)
        assert grid_t[-1] == pytest.approx(2 * math.pi)

    def test_ode_grid(self, jerk):
        grid_x, grid_t = evaluation_grid(jerk)
        assert grid_x is None
        assert len(grid_t) == 2001 and grid_t[-1] == 50.0


class BenchmarkRunSuite:
    def test_untrained_run_writes_every_artifact(self, tiny_run_config, tmp_path):
        ledger = tmp_path / "ledger.csv"
        report = run_benchmark(tiny_run_config, ledger_path=ledger)
        assert not report.failed
        assert report.relative_l2 is not None and report.relative_l2 > 0.0
        assert report.predictions.shape == (201, 256)
        assert report.max_interface_jump < 1e-10

        out = tiny_run_config.output_dir
        for name in ("solution.csv", "error.csv", "loss_window_1.csv", "loss_window_2.csv", "window_1.npz", "window_2.npz"):
            assert (out / name).exists(), name
        assert not (out / "phase_space.csv").exists()

        solution = ingest_reference(out / "solution.csv")
        np.testing.assert_array_equal(solution.values, report.predictions)
        rows = read_ledger(ledger)
        assert [(row["problem"], row["nt"], row["mode"]) for row in rows] == [("advection", "2", "hard")]

    def test_solution_bytes_are_reproducible(self, tiny_run_config, tmp_path):
        first = run_benchmark(tiny_run_config.model_copy(update={"output_dir": tmp_path / "a"}), ledger_path=tmp_path / "l.csv")
        second = run_benchmark(tiny_run_config.model_copy(update={"output_dir": tmp_path / "b"}), ledger_path=tmp_path / "l.csv")
        assert (tmp_path / "a" / "solution.csv").read_bytes() == (tmp_path / "b" / "solution.csv").read_bytes()
        assert first.relative_l2 == second.relative_l2
        for name in ("window_1.npz", "window_2.npz"):
            (params_a, seed_a), (params_b, seed_b) = (ParameterVector.load(tmp_path / run / name) for run in "ab")
            np.testing.assert_array_equal(params_a.values, params_b.values)
            assert params_a.layout == params_b.layout and seed_a == seed_b
        rows = read_ledger(tmp_path / "l.csv")
        assert len(rows) == 2
        assert rows[0]["fingerprint"] == rows[1]["fingerprint"] != ""

    def test_ode_run_writes_phase_space(self, tmp_path):
        config = RunConfig(
            problem="jerk", nt=2, nn_depth=2, nn_width=8, batch_type="FB", batch_size=32,
            adam_iterations=0, lbfgs_iterations=0, output_dir=tmp_path / "jerk",
        )
        report = run_benchmark(config, reference_service=OnesReferenceService(), ledger_path=tmp_path / "l.csv")
        assert report.phase_space.shape == (2001, 3)
        table = np.loadtxt(tmp_path / "jerk" / "phase_space.csv", delimiter=",", skiprows=1)
        assert table.shape == (2001, 4)
        np.testing.assert_allclose(table[0], [0.0, 0.0, 1.0, 1.0], atol=1e-12)
        assert report.max_interface_jump < 1e-10

    def test_failed_run_reports_no_error(self, tiny_run_config, tmp_path, monkeypatch, caplog):
        def abort(self, state, objective):
            raise TrainingAbort("gradiente no finito en Adam")

        monkeypatch.setattr(AdamOptimizerService, "step", abort)
        config = tiny_run_config.model_copy(update={"adam_iterations": 1})
        with caplog.at_level("WARNING", logger="hcsp"):
            report = run_benchmark(config, ledger_path=tmp_path / "l.csv")
        assert report.failed and report.failed_window == 1
        assert report.relative_l2 is None
        assert np.isnan(report.predictions).all()
        assert read_ledger(tmp_path / "l.csv")[0]["relative_l2"] == ""
        assert "fallo en la ventana 1" in caplog.text

    def test_reference_errors_are_logged_and_raised(self, tiny_run_config, tmp_path, caplog):
        config = tiny_run_config.model_copy(update={"reference_file": tmp_path / "missing.csv"})
        with pytest.raises(OSError):
            run_benchmark(config, ledger_path=tmp_path / "l.csv")
        assert "[Benchmark] Error" in caplog.text


class CompareModesSuite:
    def test_both_arms_share_seeds_and_split_outputs(self, tiny_run_config, tmp_path):
        comparison = compare_modes(tiny_run_config, ledger_path=tmp_path / "l.csv")
        assert comparison.hard.config.mode == "hard" and comparison.soft.config.mode == "soft"
        assert comparison.hard.config.seed == comparison.soft.config.seed
        assert (tiny_run_config.output_dir / "hard" / "solution.csv").exists()
        assert (tiny_run_config.output_dir / "soft" / "solution.csv").exists()
        assert comparison.row.nt == 2
        assert comparison.row.hcs_error == comparison.hard.relative_l2
        assert comparison.soft.max_interface_jump > comparison.hard.max_interface_jump
        assert [row["mode"] for row in read_ledger(tmp_path / "l.csv")] == ["hard", "soft"]
