"""
Formato de malla en texto:

    # problem=<nombre> nx=<n> nt_grid=<m> provenance=<p>
    # x=<x_0>,<x_1>,...
    # t=<t_0>,<t_1>,...
    <u(x_0, t_0)>,<u(x_1, t_0)>,...
    ...

Una fila por instante. Los valores se escriben con 17 cifras significativas, así que una
exportación seguida de una ingesta reproduce los datos bit a bit.
"""

import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np
import regex

from hcsp.errors import IngestionError
from hcsp.problems import ProblemSpec, ReferenceSolution
from src.services.reference_service import ReferenceService

HEADER_PATTERN = regex.compile(
    r"^#\s*problem=(?P<problem>\S+)\s+nx=(?P<nx>\d+)\s+nt_grid=(?P<nt>\d+)\s+provenance=(?P<provenance>\S+)\s*$"
)
AXIS_PATTERN = r"^#\s*{axis}=(?P<values>.*)$"

logger = logging.getLogger("hcsp")


def _format_row(values) -> str:
    return ",".join(f"{float(v):.17g}" for v in values)


def write_grid_file(
    path: Path,
    problem: str,
    grid_x: Optional[np.ndarray],
    grid_t: np.ndarray,
    values: np.ndarray,
    provenance: str,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid_x = np.empty(0) if grid_x is None else np.asarray(grid_x)
    values = np.asarray(values, dtype=np.float64).reshape(len(grid_t), -1)
    lines = [
        f"# problem={problem} nx={len(grid_x)} nt_grid={len(grid_t)} provenance={provenance}",
        f"# x={_format_row(grid_x)}",
        f"# t={_format_row(grid_t)}",
    ]
    lines.extend(_format_row(row) for row in values)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_reference(path: Path, reference: ReferenceSolution) -> Path:
    grid_x = None if reference.is_ode else reference.grid_x
    return write_grid_file(path, reference.problem, grid_x, reference.grid_t, reference.values, reference.provenance)


def _parse_floats(text: str, line_number: int, expected: Optional[int] = None) -> list[float]:
    text = text.strip()
    if not text:
        values = []
    else:
        try:
            values = [float(item) for item in text.split(",")]
        except ValueError as e:
            raise IngestionError(f"valor no numérico ({e})", line_number) from e
    if expected is not None and len(values) != expected:
        raise IngestionError(f"se esperaban {expected} valores y hay {len(values)}", line_number)
    if not all(math.isfinite(v) for v in values):
        raise IngestionError("valor no finito", line_number)
    return values


def _parse_axis(line: str, axis: str, line_number: int, expected: int) -> np.ndarray:
    match_ = regex.match(AXIS_PATTERN.format(axis=axis), line)
    if match_ is None:
        raise IngestionError(f"falta la línea de malla '# {axis}='", line_number)
    return np.array(_parse_floats(match_.group("values"), line_number, expected))


def ingest_reference(path) -> ReferenceSolution:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise IngestionError("archivo vacío", 1)
    header = HEADER_PATTERN.match(lines[0])
    if header is None:
        raise IngestionError(f"cabecera mal formada: {lines[0]!r}", 1)
    nx, nt = int(header.group("nx")), int(header.group("nt"))
    if len(lines) < 3:
        raise IngestionError("faltan las líneas de malla", len(lines) + 1)
    grid_x = _parse_axis(lines[1], "x", 2, nx)
    grid_t = _parse_axis(lines[2], "t", 3, nt)

    body = [(number, line) for number, line in enumerate(lines[3:], start=4) if line.strip()]
    if len(body) != nt:
        offending = body[nt][0] if len(body) > nt else len(lines) + 1
        raise IngestionError(f"la cabecera declara {nt} filas y el cuerpo tiene {len(body)}", offending)
    width = max(1, nx)
    values = np.array([_parse_floats(line, number, width) for number, line in body]).reshape(nt, width)
    logger.info(f"[Ingest] {path.name}: {header.group('problem')} {nt}x{width}")
    return ReferenceSolution(
        problem=header.group("problem"),
        grid_x=grid_x,
        grid_t=grid_t,
        values=values,
        provenance="ingested-file",
    )


class FileReferenceService(ReferenceService):
    def __init__(self, path):
        self.path = Path(path)
        self.logger = logging.getLogger("hcsp")

    def reference(self, problem: ProblemSpec, grid_x: Optional[np.ndarray], grid_t: np.ndarray) -> ReferenceSolution:
        try:
            ingested = ingest_reference(self.path)
            if ingested.problem != problem.name:
                raise IngestionError(f"el archivo es de {ingested.problem!r}, no de {problem.name!r}", 1)
            return ReferenceSolution(
                problem=problem.name,
                grid_x=np.empty(0) if grid_x is None else grid_x,
                grid_t=grid_t,
                values=ingested.restrict(grid_x, grid_t),
                provenance="ingested-file",
            )
        except Exception as e:
            self.logger.error(f"[Ingest] Error leyendo {self.path}: {e}", exc_info=True)
            raise
