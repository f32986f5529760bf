import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from hcsp.errors import ConfigurationError, IngestionError, TrainingAbort, UnsupportedProblemError
from src.cli import commands
from src.settings.config import settings

EXIT_OK = 0
EXIT_TRAINING_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3

logger = logging.getLogger("hcsp")


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(message)s",
        datefmt="%H:%M:%S",
        force=True,
    )


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ConfigurationError, ValidationError, UnsupportedProblemError)):
        return EXIT_CONFIG_ERROR
    if isinstance(error, (OSError, IngestionError)):
        return EXIT_IO_ERROR
    return EXIT_TRAINING_FAILURE


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", nargs="?", type=Path, help="archivo .cfg (clave = valor)")
    parser.add_argument("--problem", choices=["advection", "wave", "allen_cahn", "kdv", "jerk"])
    parser.add_argument("--nt", type=int, help="número de ventanas temporales")
    parser.add_argument("--mode", choices=["hard", "soft"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--continuity", type=int, choices=[0, 1, 2], help="orden m de continuidad en las interfaces")
    parser.add_argument("--composition", choices=["interpolated", "recursive"])
    parser.add_argument("--output-dir", type=Path)
    parser.add_argument("--reference-file", type=Path, help="referencia en formato de malla")
    parser.add_argument("--render-images", action="store_true")
    parser.add_argument("--set", action="append", metavar="CLAVE=VALOR", help="cualquier clave del .cfg")

    table = parser.add_argument_group("hiperparámetros")
    table.add_argument("--nn-depth", type=int)
    table.add_argument("--nn-width", type=int)
    table.add_argument("--batch-type", choices=["MB", "FB"])
    table.add_argument("--batch-size", type=int)
    table.add_argument("--adam-step-size", type=float)
    table.add_argument("--adam-iterations", type=int)
    table.add_argument("--lbfgs-iterations", type=int)
    table.add_argument("--lambda-i", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcsp",
        description="PINNs secuenciales por ventanas temporales con continuidad impuesta (HCS) o penalizada (SCS).",
    )
    parser.add_argument("--log-level", help=f"nivel de logging (por defecto {settings.LOG_LEVEL})")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="entrena y evalúa una configuración")
    _add_run_options(run)
    run.set_defaults(handler=commands.run_command)

    compare = subparsers.add_parser("compare", help="HCS frente a SCS con las mismas semillas")
    _add_run_options(compare)
    compare.set_defaults(handler=commands.compare_command)

    sweep = subparsers.add_parser("sweep", help="ejecuta varios .cfg (o directorios) en paralelo")
    sweep.add_argument("configs", nargs="+", type=Path)
    sweep.add_argument("--n-jobs", type=int, help=f"procesos en paralelo (por defecto {settings.N_JOBS})")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--set", action="append", metavar="CLAVE=VALOR")
    sweep.set_defaults(handler=commands.sweep_command)

    oracle = subparsers.add_parser("oracle", help="genera una referencia en formato de malla")
    oracle.add_argument("config", nargs="?", type=Path)
    oracle.add_argument("--problem", choices=["advection", "wave", "allen_cahn", "kdv", "jerk"])
    oracle.add_argument("--set", action="append", metavar="CLAVE=VALOR")
    oracle.add_argument("--output", type=Path, required=True)
    oracle.set_defaults(handler=commands.oracle_command)

    ingest = subparsers.add_parser("ingest", help="valida un archivo de malla")
    ingest.add_argument("path", type=Path)
    ingest.add_argument("--compare", type=Path, help="solution.csv a comparar contra la referencia")
    ingest.set_defaults(handler=commands.ingest_command)

    report = subparsers.add_parser("report", help="tabla HCS/SCS a partir del registro de resultados")
    report.add_argument("--ledger", type=Path)
    report.set_defaults(handler=commands.report_command)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    logger.info(f"[CLI] Subcomando '{args.command}'")
    try:
        return args.handler(args)
    except TrainingAbort as e:
        logger.error(f"[CLI] Entrenamiento abortado: {e}")
        return EXIT_TRAINING_FAILURE
    except Exception as e:
        code = exit_code_for(e)
        logger.error(f"[CLI] Error ({type(e).__name__}): {e}", exc_info=code == EXIT_TRAINING_FAILURE)
        print(f"error: {e}", file=sys.stderr)
        return code
