"""
Un manejador por subcomando. Cada manejador recibe el `argparse.Namespace` y devuelve el
código de salida; las excepciones las traduce `app.main`.
"""

import argparse
import logging
from collections import OrderedDict
from pathlib import Path

from joblib import Parallel, delayed
from tqdm import tqdm

from hcsp.errors import ConfigurationError
from src.cli import dependencies
from src.cli.config_files import LINE_PATTERN, expand_config_paths, load_run_config
from src.cli.schemas import COMPARISON_HEADER, ComparisonRow, RunConfig
from src.services.artifact_service import read_ledger
from src.services.benchmark_service import compare_modes, evaluation_grid, relative_l2
from src.services.implementations.file_reference_service import ingest_reference, write_reference
from src.settings.config import settings

# Opciones que coinciden con las columnas de la tabla de hiperparámetros
HYPERPARAMETER_FLAGS = (
    "nn_depth", "nn_width", "batch_type", "batch_size", "adam_step_size",
    "adam_iterations", "lbfgs_iterations", "lambda_i",
)
RUN_FLAGS = ("problem", "nt", "mode", "seed", "continuity", "composition", "output_dir", "reference_file")

logger = logging.getLogger("hcsp")


def collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for key in (*RUN_FLAGS, *HYPERPARAMETER_FLAGS):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "render_images", False):
        overrides["render_images"] = True
    for assignment in getattr(args, "set", None) or []:
        match_ = LINE_PATTERN.match(assignment)
        if match_ is None:
            raise ConfigurationError(f"--set espera CLAVE=VALOR, se recibió {assignment!r}")
        overrides[match_.group("key").lower()] = match_.group("value")
    return overrides


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(getattr(args, "config", None), collect_overrides(args))
    if config.output_dir is None:
        config = config.model_copy(update={"output_dir": dependencies.default_output_dir(config.label)})
    return config


def _print_report(report) -> None:
    error = "-" if report.relative_l2 is None else f"{report.relative_l2:.4e}"
    print(f"{report.config.label}: L2 relativo {error}, {report.wall_time_seconds:.1f} s")
    for jump in report.interface_jumps:
        jumps = ", ".join(f"{value:.2e}" for value in jump.max_jump)
        print(f"  t = {jump.boundary:.6g}: saltos (orden 0..{len(jump.max_jump) - 1}) = {jumps}")
    if report.failed:
        print(f"  FALLO: {report.failure}")


def run_command(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    report = dependencies.get_benchmark_service().run(config)
    _print_report(report)
    return 1 if report.failed else 0


def compare_command(args: argparse.Namespace) -> int:
    config = load_run_config(getattr(args, "config", None), collect_overrides(args))
    if config.output_dir is None:
        label = config.label.removesuffix(f"_{config.mode}")
        config = config.model_copy(update={"output_dir": dependencies.default_output_dir(label)})
    comparison = compare_modes(config, ledger_path=dependencies.ledger_path())
    for report in (comparison.hard, comparison.soft):
        _print_report(report)
    print()
    print(COMPARISON_HEADER)
    print(comparison.row.as_line())
    return 1 if comparison.hard.failed or comparison.soft.failed else 0


def _sweep_one(path: Path, overrides: dict) -> tuple[str, bool]:
    config = load_run_config(path, overrides)
    config = config.model_copy(update={"output_dir": dependencies.default_output_dir(config.label)})
    report = dependencies.get_benchmark_service().run(config)
    return config.label, report.failed


def sweep_command(args: argparse.Namespace) -> int:
    paths = expand_config_paths(args.configs)
    if not paths:
        raise ConfigurationError("el barrido no contiene archivos .cfg")
    overrides = {key: value for key, value in collect_overrides(args).items() if key != "output_dir"}
    n_jobs = args.n_jobs or settings.N_JOBS
    logger.info(f"[CLI] barrido de {len(paths)} configuraciones con n_jobs={n_jobs}")
    results = Parallel(n_jobs=n_jobs)(
        delayed(_sweep_one)(path, overrides) for path in tqdm(paths, desc="barrido", disable=not settings.PROGRESS)
    )
    failed = [label for label, did_fail in results if did_fail]
    for label in failed:
        print(f"FALLO: {label}")
    print(f"{len(results) - len(failed)}/{len(results)} ejecuciones completas")
    return 1 if failed else 0


def oracle_command(args: argparse.Namespace) -> int:
    """Referencia completa: malla del oráculo espectral, o la malla de evaluación en los demás casos."""
    problem = load_run_config(getattr(args, "config", None), collect_overrides(args)).build_problem()
    grid_x, grid_t = evaluation_grid(problem)
    if problem.reference == "oracle_pde":
        reference = dependencies.get_oracle_service().full_reference(problem, samples=settings.EVAL_NT)
    elif problem.reference == "oracle_ode":
        reference = dependencies.get_oracle_service().reference(problem, grid_x, grid_t)
    else:
        reference = dependencies.get_analytic_service().reference(problem, grid_x, grid_t)
    path = write_reference(args.output, reference)
    print(f"{path}: {reference.problem} {reference.values.shape[0]}x{reference.values.shape[1]} ({reference.provenance})")
    return 0


def ingest_command(args: argparse.Namespace) -> int:
    reference = ingest_reference(args.path)
    print(f"{args.path}: {reference.problem} {reference.values.shape[0]}x{reference.values.shape[1]} válido")
    if args.compare is not None:
        solution = ingest_reference(args.compare)
        grid_x = None if solution.is_ode else solution.grid_x
        error = relative_l2(solution.values, reference.restrict(grid_x, solution.grid_t))
        print(f"L2 relativo de {args.compare}: {error:.6e}")
    return 0


def comparison_rows(entries: list[dict]) -> "OrderedDict[tuple, ComparisonRow]":
    """Agrupa el registro por (problema, constantes, nt); gana la última entrada de cada modo."""
    latest: "OrderedDict[tuple, dict]" = OrderedDict()
    for entry in entries:
        key = (entry["problem"], entry["constants"], int(entry["nt"]))
        latest.setdefault(key, {})[entry["mode"]] = entry

    def error(entry):
        return float(entry["relative_l2"]) if entry and entry["relative_l2"] else None

    rows = OrderedDict()
    for key, modes in latest.items():
        hard, soft = modes.get("hard"), modes.get("soft")
        rows[key] = ComparisonRow(
            nt=key[2],
            hcs_error=error(hard),
            hcs_time=float(hard["seconds"]) if hard else 0.0,
            scs_error=error(soft),
            scs_time=float(soft["seconds"]) if soft else 0.0,
        )
    return rows


def report_command(args: argparse.Namespace) -> int:
    path = Path(args.ledger) if args.ledger else dependencies.ledger_path()
    rows = comparison_rows(read_ledger(path))
    current = None
    for (problem, constants, _), row in sorted(rows.items()):
        if (problem, constants) != current:
            current = (problem, constants)
            print(f"\n{problem} [{constants}]")
            print(COMPARISON_HEADER)
        print(row.as_line())
    return 0
